#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <string>

#include "csv.hpp"
#include "driftscope/error.hpp"
#include "driftscope/parallel.hpp"
#include "driftscope/xray.hpp"
#include "format.hpp"

namespace driftscope {

Sinogram::Sinogram(BeamGeometry geo, double radius, Vec2 center, std::vector<double> values, std::vector<char> valid)
    : geo_(geo), radius_(radius), center_(center), values_(std::move(values)), valid_(std::move(valid)) {
  geo_.validate();
  if (!(radius_ > 0.0) || !std::isfinite(radius_)) throw DataError("sinogram radius must be positive");
  const std::size_t n = geo_.n_angles * geo_.n_offsets;
  if (values_.size() != n || valid_.size() != n) throw DataError("sinogram dimensions are inconsistent");
  for (std::size_t b = 0; b < n; ++b)
    if (valid_[b] && !std::isfinite(values_[b])) throw DataError("sinogram has a non-finite valid bin");
}

Sinogram Sinogram::zeros(const BeamGeometry& geo, double radius, Vec2 center) {
  const std::size_t n = geo.n_angles * geo.n_offsets;
  return Sinogram(geo, radius, center, std::vector<double>(n, 0.0), std::vector<char>(n, 1));
}

std::size_t Sinogram::valid_count() const {
  std::size_t c = 0;
  for (char v : valid_) c += v ? 1 : 0;
  return c;
}

void write_sinogram_csv(std::ostream& out, const Sinogram& s) {
  using detail::format_double;
  const auto& g = s.geometry();
  out << "n_angles,n_offsets,R\n" << g.n_angles << ',' << g.n_offsets << ',' << format_double(s.radius()) << '\n';
  out << "angle_index,offset_index,value,valid\n";
  for (std::size_t k = 0; k < g.n_angles; ++k)
    for (std::size_t j = 0; j < g.n_offsets; ++j)
      out << k << ',' << j << ',' << format_double(s.value(k, j)) << ',' << (s.valid(k, j) ? 1 : 0) << '\n';
}

Sinogram read_sinogram_csv(std::istream& in, Vec2 center) {
  detail::expect_header(in, {"n_angles", "n_offsets", "R"}, "sinogram");
  std::string line;
  if (!std::getline(in, line)) throw DataError("sinogram: missing geometry line");
  auto f = detail::split_row(line);
  if (f.size() != 3) throw DataError("sinogram: geometry line needs 3 columns");
  BeamGeometry geo{detail::parse_uint(f[0], "sinogram"), detail::parse_uint(f[1], "sinogram")};
  geo.validate();
  const double radius = detail::parse_double(f[2], "sinogram");
  detail::expect_header(in, {"angle_index", "offset_index", "value", "valid"}, "sinogram");
  const std::size_t n = geo.n_angles * geo.n_offsets;
  std::vector<double> values(n, 0.0);
  std::vector<char> valid(n, 0), seen(n, 0);
  std::size_t row = 3;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const std::string where = "sinogram row " + std::to_string(row);
    f = detail::split_row(line);
    if (f.size() != 4) throw DataError(where + ": expected 4 columns");
    const auto k = detail::parse_uint(f[0], where.c_str());
    const auto j = detail::parse_uint(f[1], where.c_str());
    if (k >= geo.n_angles || j >= geo.n_offsets) throw DataError(where + ": index outside the geometry");
    const std::size_t b = k * geo.n_offsets + j;
    if (seen[b]) throw DataError(where + ": duplicate bin");
    seen[b] = 1;
    values[b] = detail::parse_double(f[2], where.c_str());
    const auto v = detail::parse_uint(f[3], where.c_str());
    if (v > 1) throw DataError(where + ": valid flag must be 0 or 1");
    valid[b] = static_cast<char>(v);
  }
  return Sinogram(geo, radius, center, std::move(values), std::move(valid));
}

double forward_xray(const ScalarFn& v, const Chord& chord, std::size_t n_quad) {
  if (n_quad < 16) throw ConfigError("forward_xray needs n_quad >= 16");
  const double h = 1.0 / static_cast<double>(n_quad);
  double sum = 0.5 * (v(chord.x) + v(chord.y));
  for (std::size_t i = 1; i < n_quad; ++i) sum += v(chord.x + (static_cast<double>(i) * h) * (chord.y - chord.x));
  return sum * h * chord.length;
}

double forward_xray(const ScalarField& v, const Chord& chord, std::size_t n_quad) {
  const Grid& g = v.grid();
  if (!g.contains(chord.x) || !g.contains(chord.y)) throw OutOfBoundsError("chord leaves the grid extent");
  return forward_xray([&](Vec2 p) { return interp(v, p); }, chord, n_quad);
}

Sinogram forward_sinogram(const ScalarField& v, const Shape& domain, const BeamGeometry& geo, std::size_t n_quad) {
  geo.validate();
  const std::size_t n = geo.n_angles * geo.n_offsets;
  std::vector<double> values(n, 0.0);
  parallel_for(n, [&](std::size_t b) {
    if (const auto chord = beam_chord(domain, geo, b / geo.n_offsets, b % geo.n_offsets))
      values[b] = forward_xray(v, *chord, n_quad);
  });
  return Sinogram(geo, domain.circumradius(), domain.center(), std::move(values), std::vector<char>(n, 1));
}

Sinogram sinogram_from_fits(const std::vector<FitRow>& fits, const Shape& domain, const BeamGeometry& geo) {
  geo.validate();
  const std::size_t n = geo.n_angles * geo.n_offsets;
  std::vector<double> values(n, 0.0);
  std::vector<char> valid(n, 0), seen(n, 0);
  for (std::size_t b = 0; b < n; ++b)
    if (!beam_chord(domain, geo, b / geo.n_offsets, b % geo.n_offsets)) valid[b] = 1;
  for (const FitRow& f : fits) {
    const std::string tag = "fit (" + std::to_string(f.angle_index) + ", " + std::to_string(f.offset_index) + ")";
    if (f.angle_index >= geo.n_angles || f.offset_index >= geo.n_offsets)
      throw DataError(tag + " is outside the beam geometry");
    const std::size_t b = f.angle_index * geo.n_offsets + f.offset_index;
    if (seen[b]) throw DataError(tag + " appears twice");
    seen[b] = 1;
    const auto chord = beam_chord(domain, geo, f.angle_index, f.offset_index);
    if (!chord) throw DataError(tag + " refers to a line that misses the domain");
    values[b] = f.fit.F * chord->length;
    valid[b] = 1;
  }
  return Sinogram(geo, domain.circumradius(), domain.center(), std::move(values), std::move(valid));
}

double fourier_slice_check(const ScalarField& v, const Sinogram& sino, const Shape& domain) {
  const Grid& g = v.grid();
  const auto& geo = sino.geometry();
  const double tau = sino.spacing();
  const Vec2 c = sino.center();
  constexpr std::size_t n_freq = 9;  // p_m = m * p_max / 8, m = 0..8; negative p are conjugates
  const double p_max = std::numbers::pi / (2.0 * tau);

  std::vector<double> masked(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (domain.contains(g.node(k))) masked[k] = v[k];

  using cd = std::complex<double>;
  const std::size_t n_pts = geo.n_angles * n_freq;
  std::vector<cd> slice(n_pts), proj(n_pts);
  parallel_for(n_pts, [&](std::size_t q) {
    const std::size_t k = q / n_freq, m = q % n_freq;
    const double p = p_max * static_cast<double>(m) / static_cast<double>(n_freq - 1);
    const Vec2 xi = p * geo.normal(k);
    // 2-D transform at xi, separable in x and y.
    std::vector<cd> ex(g.nx());
    for (std::size_t i = 0; i < g.nx(); ++i) ex[i] = std::polar(1.0, -xi.x * (g.node(i, 0).x - c.x));
    cd total = 0.0;
    for (std::size_t j = 0; j < g.ny(); ++j) {
      cd row = 0.0;
      for (std::size_t i = 0; i < g.nx(); ++i) row += masked[g.index(i, j)] * ex[i];
      total += row * std::polar(1.0, -xi.y * (g.node(0, j).y - c.y));
    }
    slice[q] = total * g.cell_area();
    cd pr = 0.0;
    for (std::size_t j = 0; j < geo.n_offsets; ++j)
      if (sino.valid(k, j)) pr += sino.value(k, j) * std::polar(1.0, -p * geo.offset(j, sino.radius()));
    proj[q] = pr * tau;
  });

  double scale = 0.0, worst = 0.0;
  for (std::size_t q = 0; q < n_pts; ++q) {
    scale = std::max(scale, std::abs(slice[q]));
    worst = std::max(worst, std::abs(proj[q] - slice[q]));
  }
  if (scale == 0.0) return worst;
  return worst / scale;
}

}  // namespace driftscope
