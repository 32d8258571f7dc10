#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "driftscope/error.hpp"
#include "driftscope/parallel.hpp"
#include "driftscope/xray.hpp"

namespace driftscope {

namespace {

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : real(fftw_alloc_real(n)), spec(fftw_alloc_complex(n / 2 + 1)) {}
  ~FftwBuffer() {
    fftw_free(real);
    fftw_free(spec);
  }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  double* real;
  fftw_complex* spec;
};

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Fills masked bins of one angle by linear interpolation between valid neighbours,
// holding the end values flat. Returns the number of bins filled.
std::size_t infill_row(std::span<double> row, std::span<const char> valid) {
  const std::size_t n = row.size();
  std::size_t filled = 0;
  std::size_t prev = SIZE_MAX;
  for (std::size_t j = 0; j < n; ++j) {
    if (!valid[j]) continue;
    if (prev == SIZE_MAX) {
      for (std::size_t i = 0; i < j; ++i) row[i] = row[j];
      filled += j;
    } else {
      for (std::size_t i = prev + 1; i < j; ++i) {
        const double a = static_cast<double>(i - prev) / static_cast<double>(j - prev);
        row[i] = (1.0 - a) * row[prev] + a * row[j];
      }
      filled += j - prev - 1;
    }
    prev = j;
  }
  for (std::size_t i = prev + 1; i < n; ++i) row[i] = row[prev];
  filled += n - prev - 1;
  return filled;
}

}  // namespace

FbpFilter parse_filter(const std::string& name) {
  if (name == "ram-lak") return FbpFilter::ram_lak;
  if (name == "hann") return FbpFilter::hann;
  throw ConfigError("unknown filter '" + name + "' (expected ram-lak or hann)");
}

std::string to_string(FbpFilter f) { return f == FbpFilter::ram_lak ? "ram-lak" : "hann"; }

FbpResult fbp_invert(const Sinogram& sino, const Grid& out_grid, const Shape& domain, FbpFilter filter) {
  const auto& geo = sino.geometry();
  if (geo.n_angles < 2) throw DataError("fbp needs at least 2 angles");
  const std::size_t n_off = geo.n_offsets;
  const std::size_t n_bins = geo.n_angles * n_off;
  if (static_cast<double>(sino.valid_count()) < 0.9 * static_cast<double>(n_bins))
    throw DataError("fbp needs at least 90% valid sinogram bins (" + std::to_string(sino.valid_count()) + " of " +
                    std::to_string(n_bins) + ")");

  std::vector<double> rows(sino.values().begin(), sino.values().end());
  std::size_t infilled = 0;
  for (std::size_t k = 0; k < geo.n_angles; ++k) {
    std::span<double> row(rows.data() + k * n_off, n_off);
    std::span<const char> valid(sino.mask().data() + k * n_off, n_off);
    bool any = false;
    for (char v : valid) any = any || v;
    if (!any) throw DataError("sinogram angle " + std::to_string(k) + " is fully masked");
    for (std::size_t j = 0; j < n_off; ++j)
      if (!valid[j]) row[j] = 0.0;
    infilled += infill_row(row, valid);
  }

  // Filtered rows on bins -1 .. n_off (the two virtual end bins sit at offsets -R and R).
  const double tau = sino.spacing();
  const std::size_t len = next_pow2(2 * (n_off + 2));
  const std::size_t n_spec = len / 2 + 1;
  FftwBuffer buf(len);
  const fftw_plan fwd = fftw_plan_dft_r2c_1d(static_cast<int>(len), buf.real, buf.spec, FFTW_ESTIMATE);
  const fftw_plan inv = fftw_plan_dft_c2r_1d(static_cast<int>(len), buf.spec, buf.real, FFTW_ESTIMATE);

  // Discrete Ram-Lak kernel h[0] = 1/(4 tau^2), h[odd n] = -1/(pi^2 n^2 tau^2), stored
  // circularly, scaled by tau (the convolution quadrature weight).
  for (std::size_t i = 0; i < len; ++i) {
    const long n = i <= len / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(len);
    double h = 0.0;
    if (n == 0)
      h = 1.0 / (4.0 * tau * tau);
    else if (n % 2 != 0)
      h = -1.0 / (std::numbers::pi * std::numbers::pi * static_cast<double>(n * n) * tau * tau);
    buf.real[i] = h * tau;
  }
  fftw_execute(fwd);
  std::vector<std::complex<double>> response(n_spec);
  for (std::size_t f = 0; f < n_spec; ++f) {
    double w = 1.0;
    if (filter == FbpFilter::hann)
      w = 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(f) / static_cast<double>(len / 2)));
    response[f] = w * std::complex<double>(buf.spec[f][0], buf.spec[f][1]) / static_cast<double>(len);
  }

  const std::size_t n_ext = n_off + 2;
  std::vector<double> filtered(geo.n_angles * n_ext);
  for (std::size_t k = 0; k < geo.n_angles; ++k) {
    std::fill(buf.real, buf.real + len, 0.0);
    for (std::size_t j = 0; j < n_off; ++j) buf.real[j] = rows[k * n_off + j];
    fftw_execute(fwd);
    for (std::size_t f = 0; f < n_spec; ++f) {
      const std::complex<double> z = std::complex<double>(buf.spec[f][0], buf.spec[f][1]) * response[f];
      buf.spec[f][0] = z.real();
      buf.spec[f][1] = z.imag();
    }
    fftw_execute(inv);
    double* out = filtered.data() + k * n_ext;
    out[0] = buf.real[len - 1];
    for (std::size_t j = 0; j <= n_off; ++j) out[j + 1] = buf.real[j];
  }
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(inv);

  std::vector<Vec2> normals(geo.n_angles);
  for (std::size_t k = 0; k < geo.n_angles; ++k) normals[k] = geo.normal(k);
  const double radius = sino.radius();
  const Vec2 c = sino.center();
  const double weight = std::numbers::pi / static_cast<double>(geo.n_angles);

  std::vector<double> values(out_grid.size(), 0.0);
  parallel_for(out_grid.ny(), [&](std::size_t jy) {
    for (std::size_t ix = 0; ix < out_grid.nx(); ++ix) {
      const Vec2 p = out_grid.node(ix, jy);
      if (!domain.contains(p)) continue;
      const Vec2 d = p - c;
      double sum = 0.0;
      for (std::size_t k = 0; k < geo.n_angles; ++k) {
        // Extended index: bin j sits at u = j + 1, so u = (t + R) / tau.
        const double u = (dot(d, normals[k]) + radius) / tau;
        if (u < 0.0 || u > static_cast<double>(n_ext - 1)) continue;
        const auto i0 = std::min(static_cast<std::size_t>(u), n_ext - 2);
        const double a = u - static_cast<double>(i0);
        const double* q = filtered.data() + k * n_ext;
        sum += (1.0 - a) * q[i0] + a * q[i0 + 1];
      }
      values[out_grid.index(ix, jy)] = weight * sum;
    }
  });
  return {ScalarField(out_grid, std::move(values)), infilled};
}

}  // namespace driftscope
