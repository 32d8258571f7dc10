#include <cmath>
#include <string>

#include "driftscope/error.hpp"
#include "driftscope/recover.hpp"
#include "format.hpp"

namespace driftscope {

ScalarField psi_from_u(const ScalarField& u, const std::vector<char>& mask) {
  const Grid& g = u.grid();
  if (mask.size() != g.size()) throw ConfigError("mask size does not match the grid");
  double min_u = INFINITY;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (mask[k]) min_u = std::min(min_u, u[k]);
  if (!(min_u > 0.0))
    throw DataError("u is not positive inside the domain (min_u = " + detail::format_double(min_u) + ")");
  std::vector<double> psi(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!(u[k] > 0.0))
      throw DataError("u is not positive at node " + std::to_string(k) + " outside the domain");
    psi[k] = std::log(u[k]);
  }
  return ScalarField(g, std::move(psi));
}

VectorField drift_from_psi(const ScalarField& psi, const DiffusionField& a) {
  if (!(psi.grid() == a.grid())) throw ConfigError("psi and a must share a grid");
  const VectorField grad = gradient(psi);
  std::vector<Vec2> c(psi.grid().size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = a[k].apply(grad[k]);
  return VectorField(psi.grid(), std::move(c));
}

VectorField drift_from_psi(const ScalarField& psi, const DiffusionField& a, const DomainSpec& domain) {
  if (!(domain.grid() == psi.grid())) throw ConfigError("psi and the domain must share a grid");
  const VectorField full = drift_from_psi(psi, a);
  std::vector<Vec2> c(full.values().begin(), full.values().end());
  for (std::size_t k = 0; k < c.size(); ++k)
    if (!domain.inside(k)) c[k] = Vec2{};
  return VectorField(psi.grid(), std::move(c));
}

namespace {

double curl_norm(const VectorField& c, const DiffusionField& a, const Shape* region) {
  if (!(c.grid() == a.grid())) throw ConfigError("c and a must share a grid");
  const Grid& g = c.grid();
  std::vector<double> w1(g.size()), w2(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec2 w = a[k].inverse().apply(c[k]);
    w1[k] = w.x;
    w2[k] = w.y;
  }
  const VectorField g1 = gradient(ScalarField(g, std::move(w1)));
  const VectorField g2 = gradient(ScalarField(g, std::move(w2)));
  double sum = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (region && !region->contains(g.node(k))) continue;
    const double curl = g1[k].y - g2[k].x;
    sum += curl * curl;
  }
  return std::sqrt(sum * g.cell_area());
}

}  // namespace

double gradient_consistency(const VectorField& c, const DiffusionField& a) { return curl_norm(c, a, nullptr); }

double gradient_consistency(const VectorField& c, const DiffusionField& a, const Shape& region) {
  return curl_norm(c, a, &region);
}

LiftedProblem lift_1d(const Kernel1D& p1, const Kernel1D& p2, double lower, double upper, double truncation) {
  if (!(lower < upper)) throw ConfigError("lifting interval must have lower < upper");
  if (!(truncation > 0.0)) throw ConfigError("truncation level must be positive");
  try {
    const double probe = log_density_1d(p1, lower, 0.01 * (upper - lower) * (upper - lower), upper);
    if (std::isnan(probe)) throw DataError("1-d kernel returned NaN");
  } catch (const DataError&) {
    throw;
  } catch (const Error& e) {
    throw DataError(std::string("1-d kernel evaluation failed: ") + e.what());
  }
  return {KernelSpec(ProductKernel{p1, p2}), KernelSpec(ProductKernel{Brownian1D{}, Brownian1D{}}),
          Shape(Rectangle{{lower, -truncation}, {upper, truncation}}), truncation};
}

Grid domain_grid(const Shape& domain, std::size_t n_long) {
  if (n_long < 5) throw ConfigError("grid_n must be at least 5");
  const Vec2 lo = domain.box_lower(), hi = domain.box_upper();
  const Vec2 c = 0.5 * (lo + hi);
  const double w = hi.x - lo.x, h = hi.y - lo.y;
  const double margin = std::max(w, h) / 32.0;
  const double step = (std::max(w, h) + 2.0 * margin) / static_cast<double>(n_long - 1);
  const auto count = [&](double extent) {
    return static_cast<std::size_t>(std::ceil((extent + 2.0 * margin) / step - 1e-9)) + 1;
  };
  const std::size_t nx = count(w), ny = count(h);
  return Grid(c.x - 0.5 * static_cast<double>(nx - 1) * step, c.y - 0.5 * static_cast<double>(ny - 1) * step, step,
              step, nx, ny);
}

Vec2 TruthSpec::drift(Vec2 x) const {
  if (kind == Kind::linear)
    return {matrix[0] * x.x + matrix[1] * x.y + offset.x, matrix[2] * x.x + matrix[3] * x.y + offset.y};
  const Vec2 d = x - center;
  const double e = alpha * std::exp(-norm2(d) / (sigma * sigma));
  return (-2.0 * e / (sigma * sigma)) * d;
}

}  // namespace driftscope
