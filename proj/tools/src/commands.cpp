#include <chrono>
#include <deque>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "driftscope/cli.hpp"
#include "driftscope/dgf.hpp"
#include "driftscope/xray.hpp"
#include "driftscope/error.hpp"
#include "driftscope/parallel.hpp"

namespace driftscope::cli {

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int verbosity = 0;
  bool quiet = false;
  // phantom
  std::string kind;
  double sigma = 0.0;
  double disc_radius = 0.0;
};

PipelineConfig load(const Options& o) {
  PipelineConfig cfg = o.config.empty() ? parse_config_text("{}") : parse_config(o.config);
  auto echo = nlohmann::ordered_json::parse(cfg.echo);
  if (!o.out.empty()) {
    cfg.output_dir = o.out;
    echo["output_dir"] = o.out;
  }
  if (o.seed) {
    cfg.seed = *o.seed;
    echo["seed"] = *o.seed;
  }
  cfg.echo = echo.dump();
  return cfg;
}

class Log {
 public:
  Log(std::ostream& err, int level) : err_(err), level_(level), start_(std::chrono::steady_clock::now()) {}
  void info(const std::string& msg) const {
    if (level_ < 1) return;
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    err_ << "[" << std::fixed << std::setprecision(2) << s << "s] " << msg << '\n';
    err_.unsetf(std::ios::floatfield);
  }

 private:
  std::ostream& err_;
  int level_;
  std::chrono::steady_clock::time_point start_;
};

void print_report(std::ostream& out, const ReconstructionReport& r) {
  out << "chords_fitted " << r.chords_fitted << '\n'
      << "fit_residual_max " << r.fit_residual_max << '\n'
      << "sinogram_masked " << r.sinogram_masked << '\n'
      << "solver_residual " << r.solver_residual << '\n'
      << "solver_iterations " << r.solver_iterations << '\n'
      << "min_u " << r.min_u << '\n'
      << "curl_norm " << r.curl_norm << '\n';
  if (r.metrics) out << "rel_L2 " << r.metrics->rel_l2 << '\n' << "max_abs " << r.metrics->max_abs << '\n';
}

void write_phantom(const PipelineConfig& cfg, const Options& o, std::ostream& out) {
  const Disc* disc = cfg.domain.disc();
  if (!disc) throw ConfigError("phantom needs a disc domain");
  const double R = disc->radius;
  const Vec2 c = disc->center;
  const BeamGeometry& geo = cfg.geometry;
  std::vector<double> sino(geo.n_angles * geo.n_offsets);
  ScalarFn v;
  if (o.kind == "radial-gaussian") {
    const double s = o.sigma > 0.0 ? o.sigma : R / 3.0;
    v = [=](Vec2 p) { return norm(p - c) < R ? std::exp(-norm2(p - c) / (s * s)) : 0.0; };
    for (std::size_t k = 0; k < geo.n_angles; ++k)
      for (std::size_t j = 0; j < geo.n_offsets; ++j) {
        const double z = geo.offset(j, R);
        sino[k * geo.n_offsets + j] =
            std::exp(-z * z / (s * s)) * s * std::sqrt(std::numbers::pi) * std::erf(std::sqrt(R * R - z * z) / s);
      }
  } else if (o.kind == "disc") {
    const double r0 = o.disc_radius > 0.0 ? o.disc_radius : 0.5 * R;
    if (r0 > R) throw ConfigError("--disc-radius exceeds the domain radius");
    v = [=](Vec2 p) { return norm(p - c) < r0 ? 1.0 : 0.0; };
    for (std::size_t k = 0; k < geo.n_angles; ++k)
      for (std::size_t j = 0; j < geo.n_offsets; ++j) {
        const double z = geo.offset(j, R);
        sino[k * geo.n_offsets + j] = std::abs(z) < r0 ? 2.0 * std::sqrt(r0 * r0 - z * z) : 0.0;
      }
  } else {
    throw ConfigError("--kind: expected radial-gaussian or disc, got '" + o.kind + "'");
  }
  std::filesystem::create_directories(cfg.output_dir);
  write_dgf(cfg.output_dir / "phantom.dgf", sample_scalar(v, cfg.grid()));
  const Sinogram s(geo, R, c, std::move(sino), std::vector<char>(geo.n_angles * geo.n_offsets, 1));
  std::ofstream f(cfg.output_dir / "sinogram.csv", std::ios::binary);
  if (!f) throw DataError("cannot write " + (cfg.output_dir / "sinogram.csv").string());
  write_sinogram_csv(f, s);
  out << "wrote " << (cfg.output_dir / "phantom.dgf").string() << " and " << (cfg.output_dir / "sinogram.csv").string()
      << '\n';
}

int run_check(std::ostream& out) {
  const auto rows = self_check();
  bool all = true;
  out << std::left << std::setw(34) << "check" << std::setw(14) << "value" << std::setw(14) << "tolerance"
      << "result\n";
  for (const CheckRow& r : rows) {
    out << std::left << std::setw(34) << r.name << std::setw(14) << r.value << std::setw(14) << r.tolerance
        << (r.pass ? "PASS" : "FAIL") << '\n';
    all = all && r.pass;
  }
  return all ? 0 : 1;
}

}  // namespace

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const SolverError*>(&e)) return 4;
  return 1;
}

std::size_t workers_from_env() {
  const char* s = std::getenv("DRIFTSCOPE_WORKERS");
  if (!s || !*s) return 0;
  char* end = nullptr;
  const long long v = std::strtoll(s, &end, 10);
  if (*end != '\0' || v < 1) throw ConfigError("DRIFTSCOPE_WORKERS must be a positive integer, got '" + std::string(s) + "'");
  return static_cast<std::size_t>(v);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Drift reconstruction from exterior transition densities"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "driftscope 0.1.0");
  Options o;

  // Flags get their own storage per subcommand; CLI11 resets a shared flag variable from
  // the subcommands that were not selected.
  std::deque<std::pair<int, bool>> flags;
  const auto common = [&](CLI::App* sub) {
    auto& [verbose, quiet] = flags.emplace_back(0, false);
    sub->add_option("-c,--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("-o,--out", o.out, "Output directory (overrides output_dir)");
    sub->add_option("-s,--seed", o.seed, "Seed (overrides seed)");
    sub->add_flag("-v,--verbose", verbose, "Progress messages on stderr");
    sub->add_flag("-q,--quiet", quiet, "No summary on stdout");
  };
  struct Stage {
    const char* name;
    const char* help;
    void (*fn)(const PipelineConfig&);
  };
  const Stage stages[] = {
      {"gen-data", "Tabulate density pairs over the beam geometry -> dataset.csv", stage_gen_data},
      {"fit", "Small-time fit per chord: dataset.csv -> fits.csv", stage_fit},
      {"sinogram", "Assemble the X-ray sinogram: fits.csv -> sinogram.csv", stage_sinogram},
      {"invert", "Filtered back-projection: sinogram.csv -> V_hat.dgf", stage_invert},
      {"solve", "Dirichlet solve: fits.csv, V_hat.dgf -> u.dgf, bvp.csv", stage_solve},
  };
  std::vector<std::pair<CLI::App*, const Stage*>> stage_cmds;
  for (const Stage& s : stages) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    common(sub);
    stage_cmds.emplace_back(sub, &s);
  }
  CLI::App* recover = app.add_subcommand("recover", "Drift from u: u.dgf -> psi_hat.dgf, c_hat_*.dgf, report.json");
  common(recover);
  CLI::App* pipeline = app.add_subcommand("pipeline", "Run every stage in order");
  common(pipeline);
  CLI::App* phantom = app.add_subcommand("phantom", "Write a phantom field and its analytic sinogram");
  common(phantom);
  phantom->add_option("-k,--kind", o.kind, "radial-gaussian or disc")->required();
  phantom->add_option("--sigma", o.sigma, "Gaussian width (default radius / 3)");
  phantom->add_option("--disc-radius", o.disc_radius, "Disc phantom radius (default radius / 2)");
  CLI::App* check = app.add_subcommand("check", "Run the built-in oracle comparisons");
  check->add_flag("-v,--verbose", flags.emplace_back(0, false).first, "Progress messages on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  for (const auto& [verbose, quiet] : flags) {
    o.verbosity += verbose;
    o.quiet = o.quiet || quiet;
  }

  const Log log(err, o.verbosity);
  try {
    if (const std::size_t w = workers_from_env()) set_worker_count(w);
    log.info("workers " + std::to_string(worker_count()));
    if (check->parsed()) return run_check(out);

    const PipelineConfig cfg = load(o);
    log.info("config " + cfg.echo);
    for (const auto& [sub, stage] : stage_cmds) {
      if (!sub->parsed()) continue;
      try {
        stage->fn(cfg);
      } catch (...) {
        rethrow_tagged(stage->name);
      }
      log.info(std::string(stage->name) + " done");
      if (!o.quiet) out << stage->name << " ok, artifacts in " << cfg.output_dir.string() << '\n';
      return 0;
    }
    if (recover->parsed()) {
      std::optional<ReconstructionReport> rep;
      try {
        rep.emplace(stage_recover(cfg));
      } catch (...) {
        rethrow_tagged("recover");
      }
      log.info("recover done");
      if (!o.quiet) print_report(out, *rep);
      return 0;
    }
    if (pipeline->parsed()) {
      const ReconstructionReport rep = run_pipeline(cfg);
      log.info("pipeline done");
      if (!o.quiet) print_report(out, rep);
      return 0;
    }
    if (phantom->parsed()) {
      write_phantom(cfg, o, o.quiet ? err : out);
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e);
  }
  return 1;
}

}  // namespace driftscope::cli
