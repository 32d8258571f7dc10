#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "driftscope/elliptic.hpp"
#include "driftscope/error.hpp"
#include "driftscope/parallel.hpp"
#include "format.hpp"

namespace driftscope {

namespace {

struct Leg {
  double arm;
  std::size_t unknown;  // SIZE_MAX when the leg ends on the boundary
  double value;         // g at the boundary end
};

struct RowBuilder {
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  double rhs = 0.0;
  double center = 0.0;

  // Adds coef * u(leg end) to L u.
  void add(const Leg& leg, double coef) {
    if (leg.unknown != SIZE_MAX) {
      cols.push_back(leg.unknown);
      vals.push_back(-coef);
    } else {
      rhs += coef * leg.value;
    }
  }

  // coef_scale * second derivative along a line with legs plus and minus.
  void second(const Leg& plus, const Leg& minus, double coef_scale) {
    const double hp = plus.arm, hm = minus.arm;
    add(plus, coef_scale * 2.0 / (hp * (hp + hm)));
    add(minus, coef_scale * 2.0 / (hm * (hp + hm)));
    center -= coef_scale * 2.0 / (hp * hm);
  }

  void first(const Leg& plus, const Leg& minus, double coef_scale) {
    const double hp = plus.arm, hm = minus.arm;
    add(plus, coef_scale * hm / (hp * (hp + hm)));
    add(minus, -coef_scale * hp / (hm * (hp + hm)));
    center += coef_scale * (hp - hm) / (hp * hm);
  }
};

}  // namespace

LinearSystem assemble_dirichlet_system(const DiffusionField& a, const VectorField& b, const ScalarField& v,
                                       const DomainSpec& domain, const ScalarFn& g) {
  const Grid& grid = domain.grid();
  if (!(a.grid() == grid) || !(b.grid() == grid) || !(v.grid() == grid))
    throw ConfigError("coefficient fields must share the domain grid");
  const Shape& shape = domain.shape();

  LinearSystem sys{grid, {}, std::vector<std::size_t>(grid.size(), SIZE_MAX), CsrMatrix(0), {}, {}, {}, 0.0, {}};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (domain.inside(k)) {
      sys.unknown_of_node[k] = sys.node_of_unknown.size();
      sys.node_of_unknown.push_back(k);
    }
  }
  const std::size_t n = sys.node_of_unknown.size();
  if (n == 0) throw GeometryError("domain contains no grid nodes");

  sys.boundary_fill.assign(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t k) {
    if (sys.unknown_of_node[k] == SIZE_MAX) sys.boundary_fill[k] = g(shape.project_to_boundary(grid.node(k)));
  });

  const double dx = grid.dx(), dy = grid.dy();
  const double on_boundary = domain.boundary_tolerance();

  const auto leg = [&](std::size_t i, std::size_t j, int di, int dj) -> Leg {
    const Vec2 p = grid.node(i, j);
    const Vec2 step{di * dx, dj * dy};
    const std::size_t q = grid.index(i + di, j + dj);
    if (sys.unknown_of_node[q] != SIZE_MAX) return {norm(step), sys.unknown_of_node[q], 0.0};
    const Vec2 pq = grid.node(q);
    if (std::abs(shape.signed_distance(pq)) <= on_boundary) return {norm(step), SIZE_MAX, g(pq)};
    const auto hit = shape.intersect_line(p, step);
    if (!hit || !(hit->exit > 0.0))
      throw GeometryError("no boundary intersection from node (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    const double theta = std::min(hit->exit, 1.0);
    return {theta * norm(step), SIZE_MAX, g(p + theta * step)};
  };

  std::vector<RowBuilder> rows(n);
  std::vector<double> peclet(n, 0.0);
  parallel_for(n, [&](std::size_t r) {
    const std::size_t k = sys.node_of_unknown[r];
    const std::size_t i = k % grid.nx(), j = k / grid.nx();
    const SymMat2 ak = a[k];
    const Vec2 bk = b[k];
    RowBuilder& row = rows[r];

    const Leg east = leg(i, j, 1, 0), west = leg(i, j, -1, 0);
    const Leg north = leg(i, j, 0, 1), south = leg(i, j, 0, -1);
    row.second(east, west, 0.5 * ak.a11);
    row.second(north, south, 0.5 * ak.a22);
    if (bk.x != 0.0) row.first(east, west, bk.x);
    if (bk.y != 0.0) row.first(north, south, bk.y);
    if (ak.a12 != 0.0) {
      // u_xy = l^2 (d2/de1^2 - d2/de2^2) / (4 dx dy), e1 = (dx, dy)/l, e2 = (dx, -dy)/l.
      const double scale = ak.a12 * (dx * dx + dy * dy) / (4.0 * dx * dy);
      row.second(leg(i, j, 1, 1), leg(i, j, -1, -1), scale);
      row.second(leg(i, j, 1, -1), leg(i, j, -1, 1), -scale);
    }
    row.center -= v[k];
    row.cols.push_back(r);
    row.vals.push_back(-row.center);
    peclet[r] = std::max(2.0 * std::abs(bk.x) * dx / ak.a11, 2.0 * std::abs(bk.y) * dy / ak.a22);
  });

  sys.matrix = CsrMatrix(n);
  sys.rhs.resize(n);
  sys.initial_guess.resize(n);
  double v_min = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    sys.matrix.push_row(rows[r].cols, rows[r].vals);
    sys.rhs[r] = rows[r].rhs;
    const std::size_t k = sys.node_of_unknown[r];
    sys.initial_guess[r] = g(shape.project_to_boundary(grid.node(k)));
    sys.peclet_max = std::max(sys.peclet_max, peclet[r]);
    v_min = std::min(v_min, v[k]);
  }
  for (double x : sys.rhs)
    if (!std::isfinite(x)) throw DataError("boundary data produced a non-finite right-hand side");
  if (sys.peclet_max > 2.0)
    sys.warnings.push_back("cell Peclet number " + detail::format_double(sys.peclet_max) +
                           " exceeds 2; central differencing may oscillate");
  if (v_min < 0.0)
    sys.warnings.push_back("potential takes negative values (min " + detail::format_double(v_min) +
                           "); uniqueness is not guaranteed");
  return sys;
}

BvpSolution solve_bvp(const LinearSystem& system, double tol, std::size_t max_iter) {
  if (!(tol > 0.0)) throw ConfigError("solver tolerance must be positive");
  const std::size_t n = system.dimension();
  const CsrMatrix& m = system.matrix;
  const LinearOperator op = [&](std::span<const double> x, std::span<double> y) { m.multiply(x, y); };
  const std::vector<double> diag = m.diagonal();
  std::vector<double> x = system.initial_guess;

  BvpSolution sol{ScalarField::zeros(system.grid), {}, 0.0, 0, 0.0, 0.0, system.peclet_max, false, system.warnings};
  sol.used_cg = m.is_symmetric();
  const KrylovResult kr = sol.used_cg ? conjugate_gradient(op, diag, system.rhs, x, tol, max_iter)
                                      : bicgstab(op, diag, system.rhs, x, tol, max_iter);
  if (kr.breakdown)
    throw SolverError("Krylov breakdown after " + std::to_string(kr.iterations) + " iterations (relative residual " +
                      detail::format_double(kr.relative_residual) + ")");
  if (!kr.converged)
    throw SolverError("solver did not reach tol " + detail::format_double(tol) + " in " + std::to_string(max_iter) +
                      " iterations (relative residual " + detail::format_double(kr.relative_residual) + ")");
  sol.residual_norm = kr.relative_residual;
  sol.iterations = kr.iterations;
  sol.smallest_ritz = smallest_ritz_value(op, n, std::min<std::size_t>(30, n));

  std::vector<double> u = system.boundary_fill;
  sol.mask.assign(system.grid.size(), 0);
  sol.min_u = x.empty() ? 0.0 : x[0];
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t k = system.node_of_unknown[r];
    u[k] = x[r];
    sol.mask[k] = 1;
    sol.min_u = std::min(sol.min_u, x[r]);
  }
  if (!(sol.min_u > 0.0))
    sol.warnings.push_back("min u = " + detail::format_double(sol.min_u) + " <= 0; log u is undefined there");
  sol.u = ScalarField(system.grid, std::move(u));
  return sol;
}

ScalarFn boundary_values_from_psi(const BoundaryPsi& psi) {
  const double ref = psi.values()[psi.reference_node()];
  return [psi, ref](Vec2 p) { return std::exp(psi.at(p) - ref); };
}

void write_bvp_diagnostics_csv(std::ostream& out, const BvpSolution& s) {
  using detail::format_double;
  out << "residual,iterations,min_u,peclet_max\n"
      << format_double(s.residual_norm) << ',' << s.iterations << ',' << format_double(s.min_u) << ','
      << format_double(s.peclet_max) << '\n';
}

}  // namespace driftscope
