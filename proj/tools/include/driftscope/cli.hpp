#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "driftscope/recover.hpp"

namespace driftscope::cli {

// Strict JSON config. Every key is optional at the top level and defaults to the
// PipelineConfig default; unknown keys, type mismatches and missing required keys inside
// nested objects raise ConfigError naming the key. The effective configuration is stored
// in PipelineConfig::echo.
PipelineConfig parse_config_text(const std::string& text);
PipelineConfig parse_config(const std::filesystem::path& path);

// Exit status for an exception escaping a command: 2 config, 3 data, 4 solver, 1 other.
int exit_code(const std::exception& e);

// Worker count from DRIFTSCOPE_WORKERS (0 when unset). Throws ConfigError if malformed.
std::size_t workers_from_env();

struct CheckRow {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Built-in oracle comparisons run by `driftscope check`.
std::vector<CheckRow> self_check();

// Entry point of the driftscope executable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace driftscope::cli
