#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "driftscope/diffusion.hpp"
#include "driftscope/error.hpp"
#include "driftscope/sparse.hpp"

namespace driftscope {

namespace {

// Divergence-form generator adjoint L* p = 1/2 d_i d_j (a^{ij} p) - d_i (c^i p) on the
// nodes off the outermost ring. Ring values are held at zero, so their columns drop out.
// Away from the ring every column sums to zero and discrete mass is conserved.
CsrMatrix assemble_adjoint(const Grid& g, const DriftFn& c, const DiffusionFn& a, std::vector<std::size_t>& nodes) {
  const std::size_t nx = g.nx(), ny = g.ny();
  std::vector<std::size_t> slot(g.size(), SIZE_MAX);
  nodes.clear();
  for (std::size_t j = 1; j + 1 < ny; ++j)
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      slot[g.index(i, j)] = nodes.size();
      nodes.push_back(g.index(i, j));
    }

  std::vector<SymMat2> am(g.size());
  std::vector<Vec2> cm(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    am[k] = a(g.node(k));
    cm[k] = c(g.node(k));
  }

  const double dx = g.dx(), dy = g.dy();
  CsrMatrix m(nodes.size());
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  auto add = [&](std::size_t i, std::size_t j, double v) {
    const std::size_t s = slot[g.index(i, j)];
    if (s == SIZE_MAX) return;
    cols.push_back(s);
    vals.push_back(v);
  };
  for (std::size_t r = 0; r < nodes.size(); ++r) {
    const std::size_t k = nodes[r];
    const std::size_t i = k % nx, j = k / nx;
    cols.clear();
    vals.clear();
    const auto at = [&](std::size_t ii, std::size_t jj) { return g.index(ii, jj); };
    add(i, j, -am[k].a11 / (dx * dx) - am[k].a22 / (dy * dy));
    add(i + 1, j, 0.5 * am[at(i + 1, j)].a11 / (dx * dx) - cm[at(i + 1, j)].x / (2.0 * dx));
    add(i - 1, j, 0.5 * am[at(i - 1, j)].a11 / (dx * dx) + cm[at(i - 1, j)].x / (2.0 * dx));
    add(i, j + 1, 0.5 * am[at(i, j + 1)].a22 / (dy * dy) - cm[at(i, j + 1)].y / (2.0 * dy));
    add(i, j - 1, 0.5 * am[at(i, j - 1)].a22 / (dy * dy) + cm[at(i, j - 1)].y / (2.0 * dy));
    const double q = 1.0 / (4.0 * dx * dy);
    add(i + 1, j + 1, q * am[at(i + 1, j + 1)].a12);
    add(i - 1, j - 1, q * am[at(i - 1, j - 1)].a12);
    add(i + 1, j - 1, -q * am[at(i + 1, j - 1)].a12);
    add(i - 1, j + 1, -q * am[at(i - 1, j + 1)].a12);
    m.push_row(cols, vals);
  }
  return m;
}

double discrete_mass(std::span<const double> p, double cell) {
  double s = 0.0;
  for (double v : p) s += v;
  return s * cell;
}

}  // namespace

FokkerPlanckResult fokker_planck_forward(const DriftFn& c, const DiffusionFn& a, Vec2 x0,
                                         const std::vector<double>& t_out, const Grid& grid, double dt,
                                         const FokkerPlanckOptions& opts) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("Fokker-Planck time step must be positive");
  if (t_out.empty()) throw ConfigError("Fokker-Planck solve needs at least one output time");
  for (std::size_t k = 0; k < t_out.size(); ++k) {
    if (!(t_out[k] > 0.0) || (k > 0 && !(t_out[k] > t_out[k - 1])))
      throw ConfigError("Fokker-Planck output times must be positive and increasing");
  }
  if (grid.nx() < 5 || grid.ny() < 5) throw ConfigError("Fokker-Planck grid needs at least 5x5 nodes");
  if (!grid.contains(x0)) throw DomainError("Fokker-Planck source lies outside the grid");

  std::vector<std::size_t> nodes;
  const CsrMatrix lstar = assemble_adjoint(grid, c, a, nodes);
  const std::size_t n = nodes.size();
  const std::vector<double> ldiag = lstar.diagonal();
  const double cell = grid.cell_area();

  FokkerPlanckResult out;
  out.mollifier_width = 2.0 * std::max(grid.dx(), grid.dy());
  const double s2 = out.mollifier_width * out.mollifier_width;

  std::vector<double> p(n);
  for (std::size_t r = 0; r < n; ++r)
    p[r] = std::exp(-norm2(grid.node(nodes[r]) - x0) / (2.0 * s2)) / (2.0 * std::numbers::pi * s2);
  {
    const double m0 = discrete_mass(p, cell);
    if (!(m0 > 0.0)) throw DomainError("Fokker-Planck initial mollifier has no mass on the grid");
    for (double& v : p) v /= m0;
  }

  std::vector<double> lp(n), rhs(n), diag(n), next(n);
  double t_now = 0.0;
  for (double target : t_out) {
    const double span = target - t_now;
    const auto n_steps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt - 1e-9)));
    const double h = span / static_cast<double>(n_steps);
    for (std::size_t r = 0; r < n; ++r) diag[r] = 1.0 - 0.5 * h * ldiag[r];
    const LinearOperator lhs = [&](std::span<const double> x, std::span<double> y) {
      lstar.multiply(x, y);
      for (std::size_t r = 0; r < n; ++r) y[r] = x[r] - 0.5 * h * y[r];
    };
    for (std::size_t s = 0; s < n_steps; ++s) {
      lstar.multiply(p, lp);
      for (std::size_t r = 0; r < n; ++r) rhs[r] = p[r] + 0.5 * h * lp[r];
      next = p;
      const KrylovResult kr = bicgstab(lhs, diag, rhs, next, opts.solver_tol, opts.max_iter);
      if (!kr.converged)
        throw SolverError("Fokker-Planck step did not converge (relative residual " +
                          std::to_string(kr.relative_residual) + ")");
      p.swap(next);
      ++out.steps;
    }
    t_now = target;

    double neg = 0.0;
    for (double v : p) {
      if (!std::isfinite(v)) throw SolverError("Fokker-Planck solution became non-finite");
      if (v < 0.0) neg -= v;
    }
    neg *= cell;
    const double raw = discrete_mass(p, cell);
    if (!(raw > 0.0) || raw > 1.5)
      throw SolverError("Fokker-Planck mass drifted to " + std::to_string(raw) + "; reduce dt or refine the grid");
    if (neg > opts.negative_mass_tol)
      throw SolverError("Fokker-Planck negative mass " + std::to_string(neg) + " exceeds tolerance");

    std::vector<double> full(grid.size(), 0.0);
    double clipped = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      full[nodes[r]] = std::max(p[r], 0.0);
      clipped += full[nodes[r]];
    }
    clipped *= cell;
    double edge = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const std::size_t i = k % grid.nx(), j = k / grid.nx();
      if (i < 3 || j < 3 || i + 3 >= grid.nx() || j + 3 >= grid.ny()) edge += full[k];
    }
    out.edge_mass_fraction = std::max(out.edge_mass_fraction, edge * cell / clipped);
    for (double& v : full) v /= clipped;

    out.times.push_back(target);
    out.slices.emplace_back(grid, std::move(full));
    out.normalization_drift.push_back(raw - 1.0);
    out.negative_mass.push_back(neg);
  }
  return out;
}

FokkerPlanckResult fokker_planck_forward(const VectorField& c, const DiffusionField& a, Vec2 x0,
                                         const std::vector<double>& t_out, double dt,
                                         const FokkerPlanckOptions& opts) {
  if (!(c.grid() == a.grid())) throw ConfigError("drift and diffusion fields must share a grid");
  return fokker_planck_forward(drift_of(c), diffusion_of(a), x0, t_out, c.grid(), dt, opts);
}

}  // namespace driftscope
