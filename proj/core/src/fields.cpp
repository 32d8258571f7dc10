#include "driftscope/fields.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "driftscope/error.hpp"

namespace driftscope {

namespace {

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw DomainError(std::string(what) + ": fields do not share a grid");
}

// Second differences with the exact arithmetic shared by laplacian() and
// potential_from_psi().
inline double d2x(std::span<const double> f, const Grid& g, std::size_t i, std::size_t j) {
  return (f[g.index(i + 1, j)] - 2.0 * f[g.index(i, j)] + f[g.index(i - 1, j)]) / (g.dx() * g.dx());
}
inline double d2y(std::span<const double> f, const Grid& g, std::size_t i, std::size_t j) {
  return (f[g.index(i, j + 1)] - 2.0 * f[g.index(i, j)] + f[g.index(i, j - 1)]) / (g.dy() * g.dy());
}
inline double dxy(std::span<const double> f, const Grid& g, std::size_t i, std::size_t j) {
  return (f[g.index(i + 1, j + 1)] - f[g.index(i + 1, j - 1)] - f[g.index(i - 1, j + 1)] +
          f[g.index(i - 1, j - 1)]) /
         (4.0 * g.dx() * g.dy());
}

// First derivative along one axis: central inside, one-sided second order at the ends.
inline double d1(double fm2, double fm1, double f0, double fp1, double fp2, std::size_t k, std::size_t n, double h) {
  if (k == 0) return (4.0 * (fp1 - f0) - (fp2 - f0)) / (2.0 * h);
  if (k == n - 1) return (4.0 * (f0 - fm1) - (f0 - fm2)) / (2.0 * h);
  return (fp1 - fm1) / (2.0 * h);
}

}  // namespace

Grid::Grid(double x0, double y0, double dx, double dy, std::size_t nx, std::size_t ny)
    : x0_(x0), y0_(y0), dx_(dx), dy_(dy), nx_(nx), ny_(ny) {
  if (!(dx > 0.0) || !(dy > 0.0)) throw DomainError("Grid: spacings must be positive");
  if (nx < 2 || ny < 2) throw DomainError("Grid: need at least 2 nodes per axis");
  if (!std::isfinite(x0) || !std::isfinite(y0)) throw DomainError("Grid: origin must be finite");
}

Grid Grid::covering(Vec2 lower, Vec2 upper, std::size_t nx, std::size_t ny) {
  if (nx < 2 || ny < 2) throw DomainError("Grid::covering: need at least 2 nodes per axis");
  return Grid(lower.x, lower.y, (upper.x - lower.x) / static_cast<double>(nx - 1),
              (upper.y - lower.y) / static_cast<double>(ny - 1), nx, ny);
}

bool Grid::contains(Vec2 p) const {
  const double ex = 1e-9 * dx_;
  const double ey = 1e-9 * dy_;
  return p.x >= x0_ - ex && p.x <= x_max() + ex && p.y >= y0_ - ey && p.y <= y_max() + ey;
}

ScalarField::ScalarField(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw DomainError("ScalarField: value count does not match grid");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      std::ostringstream msg;
      msg << "ScalarField: non-finite value at node (" << k % grid_.nx() << ", " << k / grid_.nx() << ")";
      throw DomainError(msg.str());
    }
  }
}

ScalarField ScalarField::zeros(const Grid& grid) { return ScalarField(grid, std::vector<double>(grid.size(), 0.0)); }

VectorField::VectorField(Grid grid, std::vector<Vec2> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw DomainError("VectorField: value count does not match grid");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k].x) || !std::isfinite(values_[k].y)) {
      std::ostringstream msg;
      msg << "VectorField: non-finite value at node (" << k % grid_.nx() << ", " << k / grid_.nx() << ")";
      throw DomainError(msg.str());
    }
  }
}

VectorField VectorField::zeros(const Grid& grid) { return VectorField(grid, std::vector<Vec2>(grid.size())); }

ScalarField VectorField::component(int axis) const {
  std::vector<double> out(values_.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = axis == 0 ? values_[k].x : values_[k].y;
  return ScalarField(grid_, std::move(out));
}

DiffusionField::DiffusionField(Grid grid, std::vector<SymMat2> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw DomainError("DiffusionField: value count does not match grid");
  delta_ = std::numeric_limits<double>::infinity();
  constant_ = true;
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const SymMat2& a = values_[k];
    if (!std::isfinite(a.a11) || !std::isfinite(a.a12) || !std::isfinite(a.a22) || !a.positive_definite()) {
      std::ostringstream msg;
      msg << "DiffusionField: matrix at node (" << k % grid_.nx() << ", " << k / grid_.nx()
          << ") is not symmetric positive-definite";
      throw DomainError(msg.str());
    }
    delta_ = std::min(delta_, a.min_eigenvalue());
    if (!(a == values_[0])) constant_ = false;
  }
}

DiffusionField DiffusionField::constant(const Grid& grid, SymMat2 a) {
  return DiffusionField(grid, std::vector<SymMat2>(grid.size(), a));
}

DomainSpec::DomainSpec(Shape shape, Grid grid) : shape_(shape), grid_(grid) {
  const Vec2 lo = shape_.box_lower();
  const Vec2 hi = shape_.box_upper();
  if (!(lo.x > grid_.x0() && lo.y > grid_.y0() && hi.x < grid_.x_max() && hi.y < grid_.y_max()))
    throw GeometryError("DomainSpec: domain closure must lie strictly inside the grid extent");
}

double DomainSpec::boundary_tolerance() const { return 1e-9 * std::min(grid_.dx(), grid_.dy()); }

bool DomainSpec::inside(std::size_t k) const {
  return shape_.signed_distance(grid_.node(k)) < -boundary_tolerance();
}

NodeClass DomainSpec::classify(std::size_t i, std::size_t j) const {
  if (!inside(grid_.index(i, j))) return NodeClass::exterior;
  // The shape lies strictly inside the grid, so inside nodes are never on the outer ring.
  const bool all_in = inside(grid_.index(i + 1, j)) && inside(grid_.index(i - 1, j)) &&
                      inside(grid_.index(i, j + 1)) && inside(grid_.index(i, j - 1));
  return all_in ? NodeClass::interior : NodeClass::boundary_adjacent;
}

std::vector<NodeClass> DomainSpec::classify_all() const {
  std::vector<NodeClass> out(grid_.size());
  for (std::size_t j = 0; j < grid_.ny(); ++j)
    for (std::size_t i = 0; i < grid_.nx(); ++i) out[grid_.index(i, j)] = classify(i, j);
  return out;
}

ScalarField sample_scalar(const ScalarFn& f, const Grid& grid) {
  std::vector<double> values(grid.size());
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = f(grid.node(k));
  return ScalarField(grid, std::move(values));
}

double interp(const ScalarField& field, Vec2 p) {
  const Grid& g = field.grid();
  const double u = (p.x - g.x0()) / g.dx();
  const double v = (p.y - g.y0()) / g.dy();
  const double umax = static_cast<double>(g.nx() - 1);
  const double vmax = static_cast<double>(g.ny() - 1);
  constexpr double eps = 1e-9;
  if (!(u >= -eps && u <= umax + eps && v >= -eps && v <= vmax + eps)) {
    std::ostringstream msg;
    msg << "interp: point (" << p.x << ", " << p.y << ") outside grid extent";
    throw OutOfBoundsError(msg.str());
  }
  // Snap to nodes so node values come back exactly.
  double uc = std::clamp(u, 0.0, umax);
  double vc = std::clamp(v, 0.0, vmax);
  if (std::abs(uc - std::round(uc)) <= eps) uc = std::round(uc);
  if (std::abs(vc - std::round(vc)) <= eps) vc = std::round(vc);
  const auto i = std::min(static_cast<std::size_t>(uc), g.nx() - 2);
  const auto j = std::min(static_cast<std::size_t>(vc), g.ny() - 2);
  const double fx = uc - static_cast<double>(i);
  const double fy = vc - static_cast<double>(j);
  const auto f = field.values();
  return f[g.index(i, j)] * (1.0 - fx) * (1.0 - fy) + f[g.index(i + 1, j)] * fx * (1.0 - fy) +
         f[g.index(i, j + 1)] * (1.0 - fx) * fy + f[g.index(i + 1, j + 1)] * fx * fy;
}

VectorField gradient(const ScalarField& field) {
  const Grid& g = field.grid();
  if (g.nx() < 3 || g.ny() < 3) throw DomainError("gradient: need at least 3 nodes per axis");
  const auto f = field.values();
  std::vector<Vec2> out(g.size());
  const std::size_t nx = g.nx();
  const std::size_t ny = g.ny();
  auto at = [&](std::size_t i, std::size_t j) { return f[g.index(i, j)]; };
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      // Out-of-range taps are never read by d1 for the corresponding end case.
      const double gx = d1(i >= 2 ? at(i - 2, j) : 0.0, i >= 1 ? at(i - 1, j) : 0.0, at(i, j),
                           i + 1 < nx ? at(i + 1, j) : 0.0, i + 2 < nx ? at(i + 2, j) : 0.0, i, nx, g.dx());
      const double gy = d1(j >= 2 ? at(i, j - 2) : 0.0, j >= 1 ? at(i, j - 1) : 0.0, at(i, j),
                           j + 1 < ny ? at(i, j + 1) : 0.0, j + 2 < ny ? at(i, j + 2) : 0.0, j, ny, g.dy());
      out[g.index(i, j)] = {gx, gy};
    }
  }
  return VectorField(g, std::move(out));
}

ScalarField laplacian(const ScalarField& field) {
  const Grid& g = field.grid();
  const auto f = field.values();
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t j = 1; j + 1 < g.ny(); ++j)
    for (std::size_t i = 1; i + 1 < g.nx(); ++i) out[g.index(i, j)] = d2x(f, g, i, j) + d2y(f, g, i, j);
  return ScalarField(g, std::move(out));
}

ScalarField potential_from_psi(const ScalarField& psi, const DiffusionField& a, const VectorField& b) {
  const Grid& g = psi.grid();
  require_same_grid(g, a.grid(), "potential_from_psi");
  require_same_grid(g, b.grid(), "potential_from_psi");
  const auto f = psi.values();
  const VectorField grad = gradient(psi);
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
    for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      const SymMat2 m = a[k];
      const Vec2 gp = grad[k];
      const double cross = m.a12 != 0.0 ? 2.0 * m.a12 * dxy(f, g, i, j) : 0.0;
      const double trace = m.a11 * d2x(f, g, i, j) + cross + m.a22 * d2y(f, g, i, j);
      const double drift = dot(b[k], gp);
      const double quad = dot(gp, m.apply(gp));
      out[k] = 0.5 * trace + drift + 0.5 * quad;
    }
  }
  return ScalarField(g, std::move(out));
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "operator+");
  std::vector<double> out(a.grid().size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = a[k] + b[k];
  return ScalarField(a.grid(), std::move(out));
}

ScalarField operator*(double s, const ScalarField& a) {
  std::vector<double> out(a.grid().size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = s * a[k];
  return ScalarField(a.grid(), std::move(out));
}

}  // namespace driftscope
