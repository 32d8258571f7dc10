#include <cmath>
#include <numbers>

#include "driftscope/cli.hpp"
#include "driftscope/diffusion.hpp"
#include "driftscope/elliptic.hpp"
#include "driftscope/smalltime.hpp"
#include "driftscope/xray.hpp"

namespace driftscope::cli {

namespace {

double gaussian(Vec2 p) { return std::exp(-norm2(p)); }

// Sinogram of e^{-|x|^2} cut off at radius R.
Sinogram gaussian_sinogram(const BeamGeometry& geo, double R) {
  std::vector<double> v(geo.n_angles * geo.n_offsets);
  for (std::size_t k = 0; k < geo.n_angles; ++k)
    for (std::size_t j = 0; j < geo.n_offsets; ++j) {
      const double z = geo.offset(j, R);
      v[k * geo.n_offsets + j] = std::exp(-z * z) * std::sqrt(std::numbers::pi) * std::erf(std::sqrt(R * R - z * z));
    }
  return Sinogram(geo, R, {0, 0}, std::move(v), std::vector<char>(geo.n_angles * geo.n_offsets, 1));
}

CheckRow row(std::string name, double value, double tol) { return {std::move(name), value, tol, value <= tol}; }

CheckRow kernel_check() {
  const Vec2 x{0.3, -0.2}, y{-0.1, 0.5};
  const double t = 0.4;
  const double r2 = norm2(y - x);
  const double exact = std::exp(-r2 / (2 * t)) / (2 * std::numbers::pi * t);
  return row("gaussian kernel rel err", std::abs(gaussian_kernel(x, t, y) / exact - 1), 1e-14);
}

CheckRow fit_check() {
  // OU(1) against Brownian on the chord (1,0)->(0,1): V = (|x|^2 - 2)/2 averages to -2/3.
  const KernelSpec ou(OuKernel{1.0}), bm(BrownianKernel{});
  const Vec2 x{1, 0}, y{0, 1};
  const auto times = default_ladder(1.0);
  std::vector<double> r;
  for (double t : times) r.push_back(log_ratio(*ou.density(x, t, y), *bm.density(x, t, y)));
  const ChordFit f = fit_small_time(times, r);
  return row("small-time fit F rel err", std::abs(f.F / (-2.0 / 3.0) - 1), 0.01);
}

CheckRow xray_check() {
  const double R = 5.0;
  const Shape disc(Disc{{0, 0}, R});
  const BeamGeometry geo{5, 11};
  double worst = 0;
  for (std::size_t k = 0; k < geo.n_angles; ++k)
    for (std::size_t j = 0; j < geo.n_offsets; ++j) {
      const double z = geo.offset(j, R);
      const double exact = std::sqrt(std::numbers::pi) * std::exp(-z * z) * std::erf(std::sqrt(R * R - z * z));
      worst = std::max(worst, std::abs(forward_xray(ScalarFn(gaussian), *beam_chord(disc, geo, k, j)) - exact));
    }
  return row("x-ray gaussian abs err", worst, 1e-6);
}

CheckRow fbp_check() {
  const double R = 3.0;
  const Shape disc(Disc{{0, 0}, R});
  const Grid g = Grid::covering({-R, -R}, {R, R}, 129, 129);
  const auto rec = fbp_invert(gaussian_sinogram(BeamGeometry{128, 257}, R), g, disc, FbpFilter::ram_lak);
  double num = 0, den = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!disc.contains(g.node(k))) continue;
    const double e = gaussian(g.node(k));
    num += (rec.field[k] - e) * (rec.field[k] - e);
    den += e * e;
  }
  return row("fbp gaussian rel L2", std::sqrt(num / den), 0.03);
}

CheckRow fourier_slice_row() {
  const double R = 3.0;
  const Shape disc(Disc{{0, 0}, R});
  const Grid g = Grid::covering({-R, -R}, {R, R}, 128, 128);
  const auto v = sample_scalar(gaussian, g);
  return row("fourier slice mismatch", fourier_slice_check(v, forward_sinogram(v, disc, BeamGeometry{16, 128}), disc),
             0.02);
}

CheckRow elliptic_check() {
  // 1/2 Lap u - u = 0 with u = e^{x+y}; the error ratio under grid halving should be near 4.
  const Shape disc(Disc{{0, 0}, 1.0});
  const auto exact = [](Vec2 p) { return std::exp(p.x + p.y); };
  double err[2];
  int i = 0;
  for (std::size_t n : {33, 65}) {
    const DomainSpec dom(disc, Grid::covering({-1.1, -1.1}, {1.1, 1.1}, n, n));
    const Grid& g = dom.grid();
    const auto sys = assemble_dirichlet_system(DiffusionField::constant(g, SymMat2::identity()),
                                               VectorField(g, std::vector<Vec2>(g.size())),
                                               sample_scalar([](Vec2) { return 1.0; }, g), dom, exact);
    const BvpSolution s = solve_bvp(sys, 1e-12);
    double e = 0;
    for (std::size_t k = 0; k < g.size(); ++k)
      if (s.mask[k]) e = std::max(e, std::abs(s.u[k] - exact(g.node(k))));
    err[i++] = e;
  }
  const double ratio = err[0] / err[1];
  return {"elliptic refinement ratio", ratio, 4.0, ratio >= 3.2 && ratio <= 4.8};
}

CheckRow bridge_check() {
  const double kappa = 1.3, t = 0.7;
  const auto e = bridge_functional([&](Vec2) { return kappa; }, {0.2, 0}, {-0.4, 0.3}, t, McConfig{200, 20, 1});
  return row("bridge constant-V abs err", std::abs(e.estimate - std::exp(-kappa * t)), 1e-14);
}

}  // namespace

std::vector<CheckRow> self_check() {
  return {kernel_check(), fit_check(), xray_check(), fbp_check(), fourier_slice_row(), elliptic_check(),
          bridge_check()};
}

}  // namespace driftscope::cli
