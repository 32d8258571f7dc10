#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <string>

#include <Eigen/Dense>

#include "csv.hpp"
#include "driftscope/error.hpp"
#include "driftscope/parallel.hpp"
#include "driftscope/smalltime.hpp"
#include "format.hpp"

namespace driftscope {

namespace {

std::string chord_tag(std::size_t k, std::size_t j) {
  return "chord (" + std::to_string(k) + ", " + std::to_string(j) + ")";
}

// Weighted least squares with weights 1/t on the monomials 1, t, ..., t^(degree).
Eigen::VectorXd wls_polyfit(const std::vector<double>& t, const std::vector<double>& r, int degree,
                            Eigen::MatrixXd* normal_inverse = nullptr) {
  const auto m = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd x(m, degree + 1);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sw = 1.0 / std::sqrt(t[i]);
    double p = 1.0;
    for (int d = 0; d <= degree; ++d) {
      x(i, d) = sw * p;
      p *= t[i];
    }
    b(i) = sw * r[i];
  }
  const auto qr = x.colPivHouseholderQr();
  if (normal_inverse) *normal_inverse = (x.transpose() * x).inverse();
  return qr.solve(b);
}

}  // namespace

Chord Chord::between(Vec2 x, Vec2 y, Vec2 center) {
  Chord c;
  c.x = x;
  c.y = y;
  c.length = norm(y - x);
  if (!(c.length > 0.0)) throw GeometryError("chord endpoints coincide");
  c.omega = (1.0 / c.length) * (y - x);
  c.z = dot(x - center, Vec2{c.omega.y, -c.omega.x});
  return c;
}

void BeamGeometry::validate() const {
  if (n_angles < 2) throw ConfigError("n_angles must be at least 2");
  if (n_offsets < 1) throw ConfigError("n_offsets must be positive");
}

double BeamGeometry::angle(std::size_t k) const {
  return std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_angles);
}

Vec2 BeamGeometry::normal(std::size_t k) const {
  const double th = angle(k);
  return {std::cos(th), std::sin(th)};
}

Vec2 BeamGeometry::direction(std::size_t k) const {
  const double th = angle(k);
  return {-std::sin(th), std::cos(th)};
}

double BeamGeometry::offset_spacing(double radius) const {
  return 2.0 * radius / static_cast<double>(n_offsets + 1);
}

double BeamGeometry::offset(std::size_t j, double radius) const {
  return -radius + static_cast<double>(j + 1) * offset_spacing(radius);
}

std::optional<Chord> beam_chord(const Shape& shape, const BeamGeometry& geo, std::size_t k, std::size_t j) {
  const double radius = shape.circumradius();
  const Vec2 c = shape.center();
  const Vec2 n = geo.normal(k);
  const Vec2 omega = geo.direction(k);
  const double z = geo.offset(j, radius);
  const Vec2 origin = c + z * n;
  const auto hit = shape.intersect_line(origin, omega);
  if (!hit || hit->exit - hit->enter <= 1e-12 * radius) return std::nullopt;
  Chord ch;
  ch.x = origin + hit->enter * omega;
  ch.y = origin + hit->exit * omega;
  ch.omega = omega;
  ch.z = z;
  ch.length = hit->exit - hit->enter;
  return ch;
}

std::vector<double> default_ladder(double radius) {
  const double t1 = 0.02 * radius * radius;
  return {t1, t1 / 2.0, t1 / 4.0, t1 / 8.0};
}

void validate_ladder(const std::vector<double>& times) {
  if (times.size() < 3) throw ConfigError("ladder needs at least 3 times");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] > 0.0) || !std::isfinite(times[k])) throw ConfigError("ladder times must be positive");
    if (k > 0 && !(times[k] < times[k - 1])) throw ConfigError("times must be decreasing");
  }
}

double log_ratio(double p_c, double p_b, double floor) {
  if (!(p_c > floor)) throw DataError("observed density " + detail::format_double(p_c) + " is not above the floor");
  if (!(p_b > floor)) throw DataError("reference density " + detail::format_double(p_b) + " is not above the floor");
  return std::log(p_c) - std::log(p_b);
}

double log_ratio(const Density& p_c, const Density& p_b) {
  return std::log(p_c.mantissa()) - std::log(p_b.mantissa()) +
         static_cast<double>(p_c.exponent() - p_b.exponent()) * std::numbers::ln10;
}

ChordFit fit_small_time(const std::vector<double>& times, const std::vector<double>& log_ratios) {
  if (times.size() != log_ratios.size()) throw DataError("fit: times and log-ratios differ in length");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0) || !std::isfinite(times[i])) throw DataError("fit: times must be positive");
    if (!std::isfinite(log_ratios[i])) throw DataError("fit: non-finite log-ratio");
  }
  const std::set<double> distinct(times.begin(), times.end());
  if (distinct.size() < 3)
    throw DataError("fit: rank-deficient design, need at least 3 distinct times (got " +
                    std::to_string(distinct.size()) + ")");

  Eigen::MatrixXd ninv;
  const Eigen::VectorXd lin = wls_polyfit(times, log_ratios, 1, &ninv);
  const Eigen::VectorXd quad = wls_polyfit(times, log_ratios, 2);

  const std::size_t m = times.size();
  double wss = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double w = 1.0 / times[i];
    const double e = log_ratios[i] - (lin(0) + lin(1) * times[i]);
    wss += w * e * e;
    wsum += w;
  }

  ChordFit fit;
  fit.delta_psi = lin(0);
  fit.F = -lin(1);
  fit.residual = std::sqrt(wss / wsum);
  const double s2 = m > 2 ? wss / static_cast<double>(m - 2) : 0.0;
  // Parameters (delta_psi, F) = (c0, -c1): flip the sign of the off-diagonal entry.
  const double bias_psi = lin(0) - quad(0);
  const double bias_f = -(lin(1) - quad(1));
  fit.covariance = {s2 * ninv(0, 0) + bias_psi * bias_psi, -s2 * ninv(0, 1) + bias_psi * bias_f,
                    s2 * ninv(1, 1) + bias_f * bias_f};
  return fit;
}

BoundaryDataset build_boundary_dataset(const KernelSpec& observed, const KernelSpec& reference, const Shape& domain,
                                       const BeamGeometry& geo, const std::vector<double>& times,
                                       const DatasetOptions& opts) {
  geo.validate();
  validate_ladder(times);
  const double log_floor = std::log(opts.density_floor);
  const std::size_t n_bins = geo.n_angles * geo.n_offsets;

  struct Bin {
    std::optional<ChordSamples> samples;
    std::vector<DatasetRecord> records;
  };
  std::vector<Bin> bins(n_bins);

  parallel_for(n_bins, [&](std::size_t b) {
    const std::size_t k = b / geo.n_offsets, j = b % geo.n_offsets;
    Bin& bin = bins[b];
    const auto chord = beam_chord(domain, geo, k, j);
    if (!chord) {
      bin.records.push_back({k, j, "line misses the domain"});
      return;
    }
    ChordSamples s;
    s.angle_index = k;
    s.offset_index = j;
    s.chord = *chord;
    for (double t : times) {
      std::optional<Density> po, pr;
      try {
        po = observed.density(chord->x, t, chord->y);
        pr = reference.density(chord->x, t, chord->y);
      } catch (const Error& e) {
        throw DataError(chord_tag(k, j) + " at t=" + detail::format_double(t) + ": " + e.what());
      }
      const auto below = [&](const std::optional<Density>& d) {
        return !d || (d->linear_scale() && d->log() <= log_floor);
      };
      if (below(po) || below(pr)) {
        bin.records.push_back({k, j, "t=" + detail::format_double(t) + ": density below floor, sample dropped"});
        continue;
      }
      s.times.push_back(t);
      s.observed.push_back(*po);
      s.reference.push_back(*pr);
    }
    if (s.times.size() < 3) {
      bin.records.push_back({k, j, "fewer than 3 times survive, chord excluded"});
      return;
    }
    bin.samples = std::move(s);
  });

  BoundaryDataset ds;
  ds.geometry = geo;
  ds.times = times;
  ds.provenance = "observed=" + observed.describe() + "; reference=" + reference.describe();
  for (Bin& bin : bins) {
    if (bin.samples) ds.chords.push_back(std::move(*bin.samples));
    for (auto& r : bin.records) ds.records.push_back(std::move(r));
  }
  return ds;
}

void write_dataset_csv(std::ostream& out, const BoundaryDataset& ds) {
  using detail::format_double;
  out << "angle_index,offset_index,x1,x2,y1,y2,t,p_obs,p_ref\n";
  for (const ChordSamples& s : ds.chords) {
    const std::string head = std::to_string(s.angle_index) + ',' + std::to_string(s.offset_index) + ',' +
                             format_double(s.chord.x.x) + ',' + format_double(s.chord.x.y) + ',' +
                             format_double(s.chord.y.x) + ',' + format_double(s.chord.y.y) + ',';
    for (std::size_t i = 0; i < s.times.size(); ++i)
      out << head << format_double(s.times[i]) << ',' << s.observed[i].to_string() << ','
          << s.reference[i].to_string() << '\n';
  }
}

BoundaryDataset read_dataset_csv(std::istream& in, const BeamGeometry& geo, Vec2 center) {
  geo.validate();
  detail::expect_header(in, {"angle_index", "offset_index", "x1", "x2", "y1", "y2", "t", "p_obs", "p_ref"},
                        "dataset");
  std::map<std::pair<std::size_t, std::size_t>, ChordSamples> by_chord;
  std::set<double, std::greater<>> all_times;
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_row(line);
    const std::string where = "dataset row " + std::to_string(row);
    if (f.size() != 9) throw DataError(where + ": expected 9 columns");
    const auto k = detail::parse_uint(f[0], where.c_str());
    const auto j = detail::parse_uint(f[1], where.c_str());
    const std::string tag = where + ", " + chord_tag(k, j);
    if (k >= geo.n_angles || j >= geo.n_offsets) throw DataError(tag + ": index outside the beam geometry");
    const Vec2 x{detail::parse_double(f[2], tag.c_str()), detail::parse_double(f[3], tag.c_str())};
    const Vec2 y{detail::parse_double(f[4], tag.c_str()), detail::parse_double(f[5], tag.c_str())};
    const double t = detail::parse_double(f[6], tag.c_str());
    Density po, pr;
    try {
      po = Density::parse(f[7]);
      pr = Density::parse(f[8]);
    } catch (const DataError& e) {
      throw DataError(tag + ": " + e.what());
    }
    auto [it, fresh] = by_chord.try_emplace({k, j});
    ChordSamples& s = it->second;
    if (fresh) {
      s.angle_index = k;
      s.offset_index = j;
      try {
        s.chord = Chord::between(x, y, center);
      } catch (const Error& e) {
        throw DataError(tag + ": " + e.what());
      }
    } else if (norm(x - s.chord.x) > 1e-9 || norm(y - s.chord.y) > 1e-9) {
      throw DataError(tag + ": endpoints differ from the chord's earlier rows");
    }
    s.times.push_back(t);
    s.observed.push_back(po);
    s.reference.push_back(pr);
    all_times.insert(t);
  }

  BoundaryDataset ds;
  ds.geometry = geo;
  ds.times.assign(all_times.begin(), all_times.end());
  ds.provenance = "csv";
  for (auto& [key, s] : by_chord) {
    if (s.times.size() < 3) {
      ds.records.push_back({key.first, key.second, "fewer than 3 times survive, chord excluded"});
      continue;
    }
    ds.chords.push_back(std::move(s));
  }
  return ds;
}

std::vector<FitRow> fit_dataset(const BoundaryDataset& ds) {
  std::vector<FitRow> out(ds.chords.size());
  parallel_for(ds.chords.size(), [&](std::size_t c) {
    const ChordSamples& s = ds.chords[c];
    std::vector<double> r(s.times.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = log_ratio(s.observed[i], s.reference[i]);
    try {
      out[c] = {s.angle_index, s.offset_index, fit_small_time(s.times, r)};
    } catch (const Error& e) {
      throw DataError(chord_tag(s.angle_index, s.offset_index) + ": " + e.what());
    }
  });
  return out;
}

void write_fits_csv(std::ostream& out, const std::vector<FitRow>& fits) {
  using detail::format_double;
  out << "angle_index,offset_index,delta_psi,F,residual\n";
  for (const FitRow& f : fits)
    out << f.angle_index << ',' << f.offset_index << ',' << format_double(f.fit.delta_psi) << ','
        << format_double(f.fit.F) << ',' << format_double(f.fit.residual) << '\n';
}

std::vector<FitRow> read_fits_csv(std::istream& in) {
  detail::expect_header(in, {"angle_index", "offset_index", "delta_psi", "F", "residual"}, "fits");
  std::vector<FitRow> out;
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_row(line);
    const std::string where = "fits row " + std::to_string(row);
    if (f.size() != 5) throw DataError(where + ": expected 5 columns");
    FitRow r;
    r.angle_index = detail::parse_uint(f[0], where.c_str());
    r.offset_index = detail::parse_uint(f[1], where.c_str());
    r.fit.delta_psi = detail::parse_double(f[2], where.c_str());
    r.fit.F = detail::parse_double(f[3], where.c_str());
    r.fit.residual = detail::parse_double(f[4], where.c_str());
    if (!std::isfinite(r.fit.delta_psi) || !std::isfinite(r.fit.F) || !(r.fit.residual >= 0.0))
      throw DataError(where + ": non-finite fit or negative residual");
    out.push_back(r);
  }
  return out;
}

}  // namespace driftscope
