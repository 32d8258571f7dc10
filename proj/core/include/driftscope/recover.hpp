#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "driftscope/diffusion.hpp"
#include "driftscope/elliptic.hpp"
#include "driftscope/fields.hpp"
#include "driftscope/smalltime.hpp"
#include "driftscope/xray.hpp"

namespace driftscope {

// psi = log u (gauge psi(y0) = 0 is carried by the boundary data). Throws DataError if u
// is not positive at a masked node.
ScalarField psi_from_u(const ScalarField& u, const std::vector<char>& mask);

// c = a grad psi; with a domain, nodes outside it are set to zero.
VectorField drift_from_psi(const ScalarField& psi, const DiffusionField& a);
VectorField drift_from_psi(const ScalarField& psi, const DiffusionField& a, const DomainSpec& domain);

// L2 norm over the region of d_y (a^{-1}c)_1 - d_x (a^{-1}c)_2 (whole grid when no region).
double gradient_consistency(const VectorField& c, const DiffusionField& a);
double gradient_consistency(const VectorField& c, const DiffusionField& a, const Shape& region);

// Product lifting of a 1-D diffusion on (lower, upper): the second component is an
// independent diffusion with kernel p2, and the unbounded strip is truncated to
// |x2| < truncation.
struct LiftedProblem {
  KernelSpec observed;
  KernelSpec reference;
  Shape domain;
  double truncation;
};
LiftedProblem lift_1d(const Kernel1D& p1, const Kernel1D& p2, double lower, double upper, double truncation);

// Square-cell grid around the domain with n_long nodes along its longer side and a
// margin of 1/16 of the half-extent on every side.
Grid domain_grid(const Shape& domain, std::size_t n_long);

// Known drift for metrics.
struct TruthSpec {
  enum class Kind { linear, gaussian_bump };
  Kind kind = Kind::linear;
  // linear: c(x) = matrix x + offset, matrix row-major.
  std::array<double, 4> matrix{};
  Vec2 offset{};
  // gaussian_bump: c = grad psi, psi = alpha exp(-|x - center|^2 / sigma^2).
  double alpha = 0.0;
  double sigma = 1.0;
  Vec2 center{};

  Vec2 drift(Vec2 x) const;
};

struct PipelineConfig {
  Shape domain = Shape(Disc{{0.0, 0.0}, 1.0});
  BeamGeometry geometry;
  std::vector<double> ladder;  // empty: default_ladder(circumradius)
  std::size_t grid_n = 129;
  KernelSpec observed = KernelSpec(OuKernel{1.0});
  KernelSpec reference = KernelSpec(BrownianKernel{});
  FbpFilter filter = FbpFilter::hann;
  double solver_tol = 1e-10;
  std::size_t max_iter = 20000;
  double density_floor = 1e-30;
  std::size_t boundary_nodes = 0;  // 0: 2 * n_angles
  std::size_t reference_node = 0;
  std::uint64_t seed = 0;
  double metric_scale = 0.8;
  std::optional<TruthSpec> truth;
  std::filesystem::path output_dir = "out";
  // JSON text of the effective configuration, echoed into report.json.
  std::string echo = "{}";

  void validate() const;
  std::vector<double> effective_ladder() const;
  std::size_t effective_boundary_nodes() const;
  Grid grid() const { return domain_grid(domain, grid_n); }
};

struct Metrics {
  double rel_l2 = 0.0;  // NaN when the true drift vanishes on the region
  double max_abs = 0.0;
  double curl_norm = 0.0;
};

struct ReconstructionReport {
  ScalarField psi_hat;
  ScalarField v_hat;
  VectorField c_hat;
  std::optional<Metrics> metrics;
  std::size_t chords_fitted = 0;
  double fit_residual_max = 0.0;
  double fit_residual_mean = 0.0;
  std::size_t sinogram_masked = 0;
  std::size_t boundary_interpolated = 0;
  double solver_residual = 0.0;
  std::size_t solver_iterations = 0;
  double min_u = 0.0;
  double peclet_max = 0.0;
  double curl_norm = 0.0;
};

// Pipeline stages. Each reads the previous stage's files from cfg.output_dir and writes
// its own, so running them one by one equals run_pipeline.
void stage_gen_data(const PipelineConfig& cfg);   // -> dataset.csv
void stage_fit(const PipelineConfig& cfg);        // dataset.csv -> fits.csv
void stage_sinogram(const PipelineConfig& cfg);   // fits.csv -> sinogram.csv
void stage_invert(const PipelineConfig& cfg);     // sinogram.csv -> V_hat.dgf
void stage_solve(const PipelineConfig& cfg);      // fits.csv, V_hat.dgf -> u.dgf, bvp.csv
ReconstructionReport stage_recover(const PipelineConfig& cfg);  // -> psi_hat.dgf, c_hat_*.dgf, report.json

// All stages in order; errors are rethrown with the stage name prefixed.
ReconstructionReport run_pipeline(const PipelineConfig& cfg);

}  // namespace driftscope
