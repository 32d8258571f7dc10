#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "driftscope/error.hpp"
#include "driftscope/smalltime.hpp"

namespace driftscope {

namespace {

struct Stencil {
  std::size_t i0, i1;
  double w0, w1;
};

Stencil locate(double s, double perimeter, std::size_t n) {
  double u = std::fmod(s, perimeter);
  if (u < 0.0) u += perimeter;
  u *= static_cast<double>(n) / perimeter;
  auto i0 = static_cast<std::size_t>(std::floor(u));
  double a = u - static_cast<double>(i0);
  if (i0 >= n) {
    i0 = 0;
    a = 0.0;
  }
  return {i0, (i0 + 1) % n, 1.0 - a, a};
}

}  // namespace

BoundaryPsi::BoundaryPsi(Shape shape, std::vector<double> values, std::size_t reference_node,
                         std::size_t interpolated_nodes)
    : shape_(std::move(shape)), values_(std::move(values)), reference_(reference_node),
      interpolated_(interpolated_nodes) {
  if (values_.size() < 3) throw DataError("boundary psi needs at least 3 nodes");
  if (reference_ >= values_.size()) throw ConfigError("boundary reference node out of range");
  for (double v : values_)
    if (!std::isfinite(v)) throw DataError("boundary psi has a non-finite value");
}

double BoundaryPsi::at_param(double s) const {
  const Stencil st = locate(s, shape_.perimeter(), values_.size());
  return st.w0 * values_[st.i0] + st.w1 * values_[st.i1];
}

BoundaryPsi BoundaryPsi::regauged(std::size_t reference_node) const {
  if (reference_node >= values_.size()) throw ConfigError("boundary reference node out of range");
  std::vector<double> v = values_;
  const double shift = values_[reference_node];
  for (double& x : v) x -= shift;
  return BoundaryPsi(shape_, std::move(v), reference_node, interpolated_);
}

BoundaryPsi boundary_psi_from_fits(const std::vector<FitRow>& fits, const Shape& domain, const BeamGeometry& geo,
                                   std::size_t n_nodes, std::size_t reference_node) {
  if (n_nodes < 3) throw ConfigError("boundary_nodes must be at least 3");
  if (reference_node >= n_nodes) throw ConfigError("boundary reference node out of range");
  const double perimeter = domain.perimeter();

  struct Equation {
    Stencil sx, sy;
    double rhs;
  };
  std::vector<Equation> eqs;
  eqs.reserve(fits.size());
  std::vector<char> touched(n_nodes, 0);
  for (const FitRow& f : fits) {
    if (f.angle_index >= geo.n_angles || f.offset_index >= geo.n_offsets)
      throw DataError("fit (" + std::to_string(f.angle_index) + ", " + std::to_string(f.offset_index) +
                      ") lies outside the beam geometry");
    const auto chord = beam_chord(domain, geo, f.angle_index, f.offset_index);
    if (!chord)
      throw DataError("fit (" + std::to_string(f.angle_index) + ", " + std::to_string(f.offset_index) +
                      ") refers to a line that misses the domain");
    Equation e{locate(domain.boundary_param(chord->x), perimeter, n_nodes),
               locate(domain.boundary_param(chord->y), perimeter, n_nodes), f.fit.delta_psi};
    for (const Stencil* s : {&e.sx, &e.sy}) {
      if (s->w0 > 0.0) touched[s->i0] = 1;
      if (s->w1 > 0.0) touched[s->i1] = 1;
    }
    eqs.push_back(e);
  }

  std::vector<std::size_t> slot(n_nodes, SIZE_MAX);
  std::size_t n_valid = 0;
  for (std::size_t i = 0; i < n_nodes; ++i)
    if (touched[i]) slot[i] = n_valid++;
  const std::size_t n_missing = n_nodes - n_valid;
  if (n_valid < 2 || static_cast<double>(n_missing) > 0.05 * static_cast<double>(n_nodes))
    throw DataError("boundary psi undetermined at " + std::to_string(n_missing) + " of " + std::to_string(n_nodes) +
                    " boundary nodes");

  // Normal equations of the chord differences plus a sum-zero gauge row.
  const auto nv = static_cast<Eigen::Index>(n_valid);
  Eigen::MatrixXd ata = Eigen::MatrixXd::Ones(nv, nv);
  Eigen::VectorXd atb = Eigen::VectorXd::Zero(nv);
  for (const Equation& e : eqs) {
    std::pair<std::size_t, double> row[4] = {
        {e.sy.i0, e.sy.w0}, {e.sy.i1, e.sy.w1}, {e.sx.i0, -e.sx.w0}, {e.sx.i1, -e.sx.w1}};
    for (const auto& [ia, wa] : row) {
      if (wa == 0.0) continue;
      const auto a = static_cast<Eigen::Index>(slot[ia]);
      atb(a) += wa * e.rhs;
      for (const auto& [ib, wb] : row) {
        if (wb == 0.0) continue;
        ata(a, static_cast<Eigen::Index>(slot[ib])) += wa * wb;
      }
    }
  }
  // Parallel-beam endpoints pair up so that s_x + s_y is a whole number of node spacings,
  // which leaves the alternating mode (-1)^i invisible to the chord equations. A weak
  // second-difference penalty picks the smooth member of that null space.
  const double lambda = 1e-6 * ata.diagonal().mean();
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const std::size_t im = (i + n_nodes - 1) % n_nodes, ip = (i + 1) % n_nodes;
    if (!touched[im] || !touched[i] || !touched[ip]) continue;
    const std::pair<std::size_t, double> row[3] = {{im, 1.0}, {i, -2.0}, {ip, 1.0}};
    for (const auto& [ia, wa] : row)
      for (const auto& [ib, wb] : row)
        ata(static_cast<Eigen::Index>(slot[ia]), static_cast<Eigen::Index>(slot[ib])) += lambda * wa * wb;
  }
  const Eigen::VectorXd sol = ata.ldlt().solve(atb);
  if (!sol.allFinite()) throw DataError("boundary psi least-squares system is singular");

  std::vector<double> values(n_nodes, 0.0);
  for (std::size_t i = 0; i < n_nodes; ++i)
    if (touched[i]) values[i] = sol(static_cast<Eigen::Index>(slot[i]));
  // Periodic linear interpolation across runs of untouched nodes.
  for (std::size_t i = 0; i < n_nodes; ++i) {
    if (touched[i]) continue;
    std::size_t lo = i, hi = i, dl = 0, dh = 0;
    while (!touched[lo]) {
      lo = (lo + n_nodes - 1) % n_nodes;
      ++dl;
    }
    while (!touched[hi]) {
      hi = (hi + 1) % n_nodes;
      ++dh;
    }
    const double a = static_cast<double>(dl) / static_cast<double>(dl + dh);
    values[i] = (1.0 - a) * values[lo] + a * values[hi];
  }
  const double shift = values[reference_node];
  for (double& v : values) v -= shift;
  return BoundaryPsi(domain, std::move(values), reference_node, n_missing);
}

}  // namespace driftscope
