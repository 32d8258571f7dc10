#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "driftscope/density.hpp"
#include "driftscope/fields.hpp"
#include "driftscope/geometry.hpp"
#include "driftscope/rng.hpp"

namespace driftscope {

using DriftFn = std::function<Vec2(Vec2)>;
using DiffusionFn = std::function<SymMat2(Vec2)>;

// Field adapters. Drift and diffusion are extended by clamping to the grid extent;
// potentials are extended by zero (V_Lambda := V 1_Lambda); scalar_of throws outside.
DriftFn drift_of(const VectorField& c);
DiffusionFn diffusion_of(const DiffusionField& a);
ScalarFn potential_of(const ScalarField& v);
ScalarFn scalar_of(const ScalarField& f);

// ---------------------------------------------------------------------------------
// Closed-form transition kernels (d = 2 unless suffixed _1d).

double gaussian_kernel(Vec2 x, double t, Vec2 y);
double log_gaussian_kernel(Vec2 x, double t, Vec2 y);
// Ornstein-Uhlenbeck with drift -theta*x and unit diffusion.
double ou_kernel(Vec2 x, double t, Vec2 y, double theta);
double log_ou_kernel(Vec2 x, double t, Vec2 y, double theta);

double log_gaussian_kernel_1d(double x, double t, double y);
double log_ou_kernel_1d(double x, double t, double y, double theta);

// ---------------------------------------------------------------------------------
// Kernel specifications.

struct Brownian1D {};
struct Ou1D {
  double theta = 1.0;
};
struct Custom1D {
  std::string label;
  std::function<double(double, double, double)> log_density;  // (x, t, y) -> log p
};
using Kernel1D = std::variant<Brownian1D, Ou1D, Custom1D>;

double log_density_1d(const Kernel1D& k, double x, double t, double y);
std::string describe(const Kernel1D& k);

struct BrownianKernel {};
struct OuKernel {
  double theta = 1.0;
};
// Density slices p(source, t_k, .) on a grid, e.g. from fokker_planck_forward.
struct TabulatedSource {
  Vec2 source;
  std::vector<double> times;
  std::vector<ScalarField> slices;
};
struct TabulatedKernel {
  std::vector<TabulatedSource> sources;
  double source_tolerance = 1e-9;
};
// p((x1,x2), t, (y1,y2)) = p1(x1, t, y1) * p2(x2, t, y2): independent components.
struct ProductKernel {
  Kernel1D first;
  Kernel1D second;
};

class KernelSpec {
 public:
  using Kind = std::variant<BrownianKernel, OuKernel, TabulatedKernel, ProductKernel>;

  KernelSpec(Kind kind);

  const Kind& kind() const { return kind_; }
  std::string describe() const;

  // Density value; nullopt when a tabulated kernel yields a nonpositive value.
  // Throws DataError when the kernel cannot be evaluated at (x, t, y).
  std::optional<Density> density(Vec2 x, double t, Vec2 y) const;
  // Linear-scale value; for the Brownian kernel this is exactly gaussian_kernel().
  double value(Vec2 x, double t, Vec2 y) const;

 private:
  Kind kind_;
};

// Slice mass on its grid (trapezoid rule).
double field_mass(const ScalarField& f);

// ---------------------------------------------------------------------------------
// Monte Carlo.

struct Path {
  std::vector<double> times;
  std::vector<Vec2> states;
};

struct McConfig {
  std::size_t n_paths = 1000;
  std::size_t n_steps = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  // Paths discarded for hitting a step cap (feynman_kac_exit only).
  std::size_t capped = 0;
  // Largest |grad psi| seen on the sampled bridges (density_via_representation only).
  // The representation needs a Novikov-type bound on the drift; this is a proxy for it.
  double max_grad_psi = 0.0;
};

// x_{k+1} = x_k + c(x_k) h + a^{1/2}(x_k) sqrt(h) xi_k, h = t / n_steps. Path p uses
// substream(seed, p).
std::vector<Path> euler_maruyama(const DriftFn& c, const DiffusionFn& a, Vec2 x0, double t, const McConfig& cfg);
Path euler_maruyama_path(const DriftFn& c, const DiffusionFn& a, Vec2 x0, double t, std::size_t n_steps,
                         SplitMix64& rng);

// Brownian bridge from x at time 0 to y at time t on a uniform grid, sequential
// conditional-Gaussian construction. Endpoints are exact.
Path brownian_bridge(Vec2 x, Vec2 y, double t, std::size_t n_steps, std::uint64_t seed);
Path brownian_bridge(Vec2 x, Vec2 y, double t, std::size_t n_steps, SplitMix64& rng);

// E over Brownian bridges x -> y in time t of exp(-int_0^t V), trapezoid in time.
McEstimate bridge_functional(const ScalarFn& v, Vec2 x, Vec2 y, double t, const McConfig& cfg);

// p_b(x,t,y) * exp(psi(y) - psi(x)) * bridge_functional(V, x, y, t).
McEstimate density_via_representation(const KernelSpec& pb, const ScalarFn& psi, const ScalarFn& v, Vec2 x,
                                      Vec2 y, double t, const McConfig& cfg);
McEstimate density_via_representation(const KernelSpec& pb, const ScalarField& psi, const ScalarField& v, Vec2 x,
                                      Vec2 y, double t, const McConfig& cfg);

// u(x) = E[exp(-int_0^tau V(w_s) ds) f(w_tau)] for Brownian motion started at x and
// stopped on leaving the domain. Euler steps of size h; cfg.n_steps caps the steps per
// path. Capped paths are excluded and counted; more than 1% capped is an error.
McEstimate feynman_kac_exit(const ScalarFn& v, const ScalarFn& f, const Shape& domain, Vec2 x, const McConfig& cfg,
                            double h);
McEstimate feynman_kac_exit(const ScalarField& v, const ScalarFn& f, const DomainSpec& domain, Vec2 x,
                            const McConfig& cfg, double h);

// CSV rows "x1, x2, y1, y2, t, estimate, stderr, n_paths, seed".
struct McRow {
  Vec2 x;
  Vec2 y;
  double t = 0.0;
  McEstimate result;
};
void write_mc_csv(std::ostream& out, const std::vector<McRow>& rows);

// ---------------------------------------------------------------------------------
// Fokker-Planck forward solver.

struct FokkerPlanckOptions {
  double solver_tol = 1e-12;
  std::size_t max_iter = 5000;
  // Largest tolerated negative mass before renormalization.
  double negative_mass_tol = 1e-6;
};

struct FokkerPlanckResult {
  std::vector<double> times;
  // Clipped to be nonnegative and renormalized to unit mass.
  std::vector<ScalarField> slices;
  // Mass before renormalization minus one.
  std::vector<double> normalization_drift;
  std::vector<double> negative_mass;
  // Largest fraction of mass found within two nodes of the grid edge.
  double edge_mass_fraction = 0.0;
  // Standard deviation of the Gaussian mollifier replacing delta_{x0}.
  double mollifier_width = 0.0;
  std::size_t steps = 0;
};

// Crank-Nicolson for dp/dt = 1/2 d_i d_j (a^{ij} p) - d_i (c^i p), zero Dirichlet data on
// the outermost ring, initial condition a Gaussian of width 2h centred at x0.
FokkerPlanckResult fokker_planck_forward(const DriftFn& c, const DiffusionFn& a, Vec2 x0,
                                         const std::vector<double>& t_out, const Grid& grid, double dt,
                                         const FokkerPlanckOptions& opts = {});
FokkerPlanckResult fokker_planck_forward(const VectorField& c, const DiffusionField& a, Vec2 x0,
                                         const std::vector<double>& t_out, double dt,
                                         const FokkerPlanckOptions& opts = {});

}  // namespace driftscope
