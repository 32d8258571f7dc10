#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <string>

#include <json.hpp>

#include "csv.hpp"
#include "driftscope/dgf.hpp"
#include "driftscope/error.hpp"
#include "driftscope/recover.hpp"
#include "format.hpp"

namespace driftscope {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw DataError("cannot write " + p.string());
  return f;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw DataError("cannot read " + p.string() + " (run the previous stage first)");
  return f;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::vector<FitRow> load_fits(const PipelineConfig& cfg) {
  auto in = open_in(cfg.output_dir / "fits.csv");
  return read_fits_csv(in);
}

struct BvpDiagnostics {
  double residual = 0.0;
  std::size_t iterations = 0;
  double min_u = 0.0;
  double peclet_max = 0.0;
};

BvpDiagnostics load_bvp(const PipelineConfig& cfg) {
  auto in = open_in(cfg.output_dir / "bvp.csv");
  detail::expect_header(in, {"residual", "iterations", "min_u", "peclet_max"}, "bvp diagnostics");
  std::string line;
  if (!std::getline(in, line)) throw DataError("bvp diagnostics: missing row");
  const auto f = detail::split_row(line);
  if (f.size() != 4) throw DataError("bvp diagnostics: expected 4 columns");
  return {detail::parse_double(f[0], "bvp"), detail::parse_uint(f[1], "bvp"), detail::parse_double(f[2], "bvp"),
          detail::parse_double(f[3], "bvp")};
}

// SOURCE_DATE_EPOCH pins the timestamp so that repeated runs give identical reports.
std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(epoch, &end, 10);
    if (end != epoch && *end == '\0') now = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <class F>
void run_stage(const char* name, F&& f) {
  try {
    f();
  } catch (...) {
    rethrow_tagged(name);
  }
}

}  // namespace

void PipelineConfig::validate() const {
  geometry.validate();
  if (!ladder.empty()) validate_ladder(ladder);
  if (grid_n < 5) throw ConfigError("grid_n must be at least 5");
  if (!(solver_tol > 0.0)) throw ConfigError("solver_tol must be positive");
  if (max_iter == 0) throw ConfigError("max_iter must be positive");
  if (!(density_floor > 0.0)) throw ConfigError("density_floor must be positive");
  if (boundary_nodes != 0 && boundary_nodes < 3) throw ConfigError("boundary_nodes must be at least 3");
  if (reference_node >= effective_boundary_nodes()) throw ConfigError("reference_node out of range");
  if (!(metric_scale > 0.0 && metric_scale <= 1.0)) throw ConfigError("metric_scale must lie in (0, 1]");
}

std::vector<double> PipelineConfig::effective_ladder() const {
  return ladder.empty() ? default_ladder(domain.circumradius()) : ladder;
}

std::size_t PipelineConfig::effective_boundary_nodes() const {
  return boundary_nodes != 0 ? boundary_nodes : 2 * geometry.n_angles;
}

void stage_gen_data(const PipelineConfig& cfg) {
  cfg.validate();
  ensure_dir(cfg.output_dir);
  const BoundaryDataset ds = build_boundary_dataset(cfg.observed, cfg.reference, cfg.domain, cfg.geometry,
                                                    cfg.effective_ladder(), {cfg.density_floor});
  auto out = open_out(cfg.output_dir / "dataset.csv");
  write_dataset_csv(out, ds);
  auto rec = open_out(cfg.output_dir / "records.csv");
  rec << "angle_index,offset_index,reason\n";
  for (const auto& r : ds.records) rec << r.angle_index << ',' << r.offset_index << ',' << r.reason << '\n';
}

void stage_fit(const PipelineConfig& cfg) {
  cfg.validate();
  auto in = open_in(cfg.output_dir / "dataset.csv");
  const BoundaryDataset ds = read_dataset_csv(in, cfg.geometry, cfg.domain.center());
  auto out = open_out(cfg.output_dir / "fits.csv");
  write_fits_csv(out, fit_dataset(ds));
}

void stage_sinogram(const PipelineConfig& cfg) {
  cfg.validate();
  const Sinogram s = sinogram_from_fits(load_fits(cfg), cfg.domain, cfg.geometry);
  auto out = open_out(cfg.output_dir / "sinogram.csv");
  write_sinogram_csv(out, s);
}

void stage_invert(const PipelineConfig& cfg) {
  cfg.validate();
  auto in = open_in(cfg.output_dir / "sinogram.csv");
  const Sinogram s = read_sinogram_csv(in, cfg.domain.center());
  const FbpResult r = fbp_invert(s, cfg.grid(), cfg.domain, cfg.filter);
  write_dgf(cfg.output_dir / "V_hat.dgf", r.field);
}

void stage_solve(const PipelineConfig& cfg) {
  cfg.validate();
  const Grid grid = cfg.grid();
  const ScalarField v = read_dgf(cfg.output_dir / "V_hat.dgf");
  if (!(v.grid() == grid)) throw DataError("V_hat.dgf grid does not match the configured grid");
  const BoundaryPsi psi = boundary_psi_from_fits(load_fits(cfg), cfg.domain, cfg.geometry,
                                                 cfg.effective_boundary_nodes(), cfg.reference_node);
  const DomainSpec domain(cfg.domain, grid);
  const LinearSystem sys = assemble_dirichlet_system(DiffusionField::constant(grid, SymMat2::identity()),
                                                     VectorField::zeros(grid), v, domain,
                                                     boundary_values_from_psi(psi));
  const BvpSolution sol = solve_bvp(sys, cfg.solver_tol, cfg.max_iter);
  write_dgf(cfg.output_dir / "u.dgf", sol.u);
  auto out = open_out(cfg.output_dir / "bvp.csv");
  write_bvp_diagnostics_csv(out, sol);
}

ReconstructionReport stage_recover(const PipelineConfig& cfg) {
  cfg.validate();
  const Grid grid = cfg.grid();
  const DomainSpec domain(cfg.domain, grid);
  const ScalarField u = read_dgf(cfg.output_dir / "u.dgf");
  const ScalarField v = read_dgf(cfg.output_dir / "V_hat.dgf");
  if (!(u.grid() == grid) || !(v.grid() == grid)) throw DataError("field grids do not match the configured grid");
  std::vector<char> mask(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) mask[k] = domain.inside(k) ? 1 : 0;

  const DiffusionField a = DiffusionField::constant(grid, SymMat2::identity());
  ScalarField psi = psi_from_u(u, mask);
  VectorField c = drift_from_psi(psi, a, domain);
  write_dgf(cfg.output_dir / "psi_hat.dgf", psi);
  write_dgf(cfg.output_dir / "c_hat_x.dgf", c.component(0));
  write_dgf(cfg.output_dir / "c_hat_y.dgf", c.component(1));

  const std::vector<FitRow> fits = load_fits(cfg);
  auto sin = open_in(cfg.output_dir / "sinogram.csv");
  const Sinogram sino = read_sinogram_csv(sin, cfg.domain.center());
  const BvpDiagnostics bvp = load_bvp(cfg);
  const BoundaryPsi bpsi = boundary_psi_from_fits(fits, cfg.domain, cfg.geometry, cfg.effective_boundary_nodes(),
                                                  cfg.reference_node);

  ReconstructionReport rep{std::move(psi), v, std::move(c), std::nullopt};
  rep.chords_fitted = fits.size();
  for (const FitRow& f : fits) {
    rep.fit_residual_max = std::max(rep.fit_residual_max, f.fit.residual);
    rep.fit_residual_mean += f.fit.residual;
  }
  if (!fits.empty()) rep.fit_residual_mean /= static_cast<double>(fits.size());
  rep.sinogram_masked = cfg.geometry.n_angles * cfg.geometry.n_offsets - sino.valid_count();
  rep.boundary_interpolated = bpsi.interpolated_nodes();
  rep.solver_residual = bvp.residual;
  rep.solver_iterations = bvp.iterations;
  rep.min_u = bvp.min_u;
  rep.peclet_max = bvp.peclet_max;
  const Shape region = cfg.domain.scaled(cfg.metric_scale);
  rep.curl_norm = gradient_consistency(rep.c_hat, a, region);

  if (cfg.truth) {
    Metrics m;
    double err2 = 0.0, ref2 = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const Vec2 p = grid.node(k);
      if (!region.contains(p)) continue;
      const Vec2 truth = cfg.truth->drift(p);
      const Vec2 d = rep.c_hat[k] - truth;
      err2 += norm2(d);
      ref2 += norm2(truth);
      m.max_abs = std::max(m.max_abs, norm(d));
    }
    m.rel_l2 = ref2 > 0.0 ? std::sqrt(err2 / ref2) : NAN;
    m.curl_norm = rep.curl_norm;
    rep.metrics = m;
  }

  nlohmann::ordered_json j;
  j["meta"] = {{"timestamp", utc_timestamp()}, {"version", "0.1.0"}};
  j["config"] = nlohmann::ordered_json::parse(cfg.echo);
  j["diagnostics"] = {{"chords_fitted", rep.chords_fitted},
                      {"fit_residual_max", rep.fit_residual_max},
                      {"fit_residual_mean", rep.fit_residual_mean},
                      {"sinogram_masked", rep.sinogram_masked},
                      {"boundary_interpolated", rep.boundary_interpolated},
                      {"solver_residual", rep.solver_residual},
                      {"solver_iterations", rep.solver_iterations},
                      {"min_u", rep.min_u},
                      {"peclet_max", rep.peclet_max},
                      {"curl_norm", rep.curl_norm}};
  if (rep.metrics) {
    j["metrics"] = {{"rel_L2", rep.metrics->rel_l2},
                    {"max_abs", rep.metrics->max_abs},
                    {"curl_norm", rep.metrics->curl_norm}};
  }
  auto out = open_out(cfg.output_dir / "report.json");
  out << j.dump(2) << '\n';
  return rep;
}

ReconstructionReport run_pipeline(const PipelineConfig& cfg) {
  run_stage("config", [&] { cfg.validate(); });
  run_stage("gen-data", [&] { stage_gen_data(cfg); });
  run_stage("fit", [&] { stage_fit(cfg); });
  run_stage("sinogram", [&] { stage_sinogram(cfg); });
  run_stage("invert", [&] { stage_invert(cfg); });
  run_stage("solve", [&] { stage_solve(cfg); });
  std::optional<ReconstructionReport> rep;
  run_stage("recover", [&] { rep.emplace(stage_recover(cfg)); });
  return std::move(*rep);
}

}  // namespace driftscope
