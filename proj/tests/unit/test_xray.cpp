#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "driftscope/error.hpp"
#include "driftscope/xray.hpp"

using namespace driftscope;

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

// Analytic sinogram of e^{-|x|^2} restricted to a centred disc of radius R.
Sinogram gaussian_sinogram(const BeamGeometry& geo, double R) {
  Sinogram s = Sinogram::zeros(geo, R, {0, 0});
  std::vector<double> v(geo.n_angles * geo.n_offsets);
  for (std::size_t k = 0; k < geo.n_angles; ++k)
    for (std::size_t j = 0; j < geo.n_offsets; ++j) {
      const double z = geo.offset(j, R);
      v[k * geo.n_offsets + j] = std::exp(-z * z) * kSqrtPi * std::erf(std::sqrt(R * R - z * z));
    }
  return Sinogram(geo, R, {0, 0}, v, std::vector<char>(v.size(), 1));
}

double rel_l2_in(const ScalarField& f, const std::function<double(Vec2)>& exact, const Shape& region) {
  double num = 0, den = 0;
  const Grid& g = f.grid();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!region.contains(g.node(k))) continue;
    const double e = exact(g.node(k));
    num += (f[k] - e) * (f[k] - e);
    den += e * e;
  }
  return std::sqrt(num / den);
}

double gaussian(Vec2 p) { return std::exp(-norm2(p)); }

}  // namespace

TEST(ForwardXray, ConstantGivesChordLength) {
  const Shape disc(Disc{{0, 0}, 1.0});
  const Grid g = Grid::covering({-1.2, -1.2}, {1.2, 1.2}, 49, 49);
  const auto one = sample_scalar([](Vec2) { return 1.0; }, g);
  const BeamGeometry geo{7, 9};
  for (std::size_t j = 0; j < geo.n_offsets; ++j) {
    const auto c = beam_chord(disc, geo, 3, j);
    const double z = geo.offset(j, 1.0);
    EXPECT_NEAR(forward_xray(one, *c), 2 * std::sqrt(1 - z * z), 1e-12);
    EXPECT_EQ(forward_xray(ScalarField::zeros(g), *c), 0.0);
  }
}

TEST(ForwardXray, RadialGaussianProfile) {
  const Shape disc(Disc{{0, 0}, 5.0});
  const BeamGeometry geo{5, 11};
  for (std::size_t k = 0; k < geo.n_angles; ++k)
    for (std::size_t j = 0; j < geo.n_offsets; ++j) {
      const auto c = beam_chord(disc, geo, k, j);
      const double z = geo.offset(j, 5.0);
      const double exact = kSqrtPi * std::exp(-z * z) * std::erf(std::sqrt(25 - z * z));
      EXPECT_NEAR(forward_xray(ScalarFn(gaussian), *c), exact, 1e-6);
    }
}

TEST(ForwardXray, SampledFieldConvergesQuadratically) {
  const Shape disc(Disc{{0, 0}, 3.0});
  const auto c = beam_chord(disc, BeamGeometry{6, 7}, 1, 2);
  const double exact = forward_xray(ScalarFn(gaussian), *c, 4096);
  double prev = 0;
  for (std::size_t n : {33, 65, 129}) {
    const Grid g = Grid::covering({-3.2, -3.2}, {3.2, 3.2}, n, n);
    const double err = std::abs(forward_xray(sample_scalar(gaussian, g), *c, 1024) - exact);
    if (prev > 0) EXPECT_GT(prev / err, 3.0);
    prev = err;
  }
}

TEST(ForwardXray, Errors) {
  const Grid g = Grid::covering({-1, -1}, {1, 1}, 11, 11);
  const auto c = Chord::between({-2, 0}, {2, 0}, {0, 0});
  EXPECT_THROW(forward_xray(ScalarField::zeros(g), c), OutOfBoundsError);
  const auto inside = Chord::between({-1, 0}, {1, 0}, {0, 0});
  EXPECT_THROW(forward_xray(ScalarField::zeros(g), inside, 8), ConfigError);
}

TEST(ForwardXray, Linearity) {
  const Grid g = Grid::covering({-1.5, -1.5}, {1.5, 1.5}, 61, 61);
  const auto v1 = sample_scalar([](Vec2 p) { return std::sin(p.x) * p.y; }, g);
  const auto v2 = sample_scalar([](Vec2 p) { return p.x * p.x + 1; }, g);
  std::vector<double> mix(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) mix[k] = 2.0 * v1[k] - 0.5 * v2[k];
  const auto c = Chord::between({-1, 0.2}, {0.7, -0.9}, {0, 0});
  EXPECT_NEAR(forward_xray(ScalarField(g, mix), c), 2.0 * forward_xray(v1, c) - 0.5 * forward_xray(v2, c), 1e-13);
}

TEST(ForwardXray, EvenUnderReversal) {
  const Grid g = Grid::covering({-1.5, -1.5}, {1.5, 1.5}, 61, 61);
  const auto v = sample_scalar([](Vec2 p) { return std::exp(p.x) * (1 + p.y); }, g);
  const auto c = Chord::between({-1, 0.2}, {0.7, -0.9}, {0, 0});
  EXPECT_NEAR(forward_xray(v, c), forward_xray(v, c.reversed({0, 0})), 1e-13);
}

TEST(ForwardSinogram, RadialRowsAgreeAndMassIsConserved) {
  const Shape disc(Disc{{0, 0}, 3.0});
  const Grid g = Grid::covering({-3.2, -3.2}, {3.2, 3.2}, 129, 129);
  const auto v = sample_scalar(gaussian, g);
  const BeamGeometry geo{12, 65};
  const Sinogram s = forward_sinogram(v, disc, geo);
  const double tau = s.spacing();
  for (std::size_t k = 0; k < geo.n_angles; ++k) {
    double mass = 0;
    for (std::size_t j = 0; j < geo.n_offsets; ++j) {
      EXPECT_NEAR(s.value(k, j), s.value(0, j), 2e-3);
      mass += s.value(k, j) * tau;
    }
    EXPECT_NEAR(mass, std::numbers::pi, 0.01 * std::numbers::pi);
  }
}

TEST(SinogramFromFits, ZeroAndUnitChordAverages) {
  const Shape disc(Disc{{0, 0}, 1.0});
  const BeamGeometry geo{4, 5};
  std::vector<FitRow> zero, unit;
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t j = 0; j < 5; ++j) {
      zero.push_back({k, j, ChordFit{0.3, 0.0, 0.0, {}}});
      unit.push_back({k, j, ChordFit{0.0, 1.0, 0.0, {}}});
    }
  const Sinogram s0 = sinogram_from_fits(zero, disc, geo);
  for (double v : s0.values()) EXPECT_EQ(v, 0.0);
  const Sinogram s1 = sinogram_from_fits(unit, disc, geo);
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t j = 0; j < 5; ++j) {
      const double z = geo.offset(j, 1.0);
      EXPECT_NEAR(s1.value(k, j), 2 * std::sqrt(1 - z * z), 1e-12);
    }
  EXPECT_EQ(s1.valid_count(), 20u);
}

TEST(SinogramFromFits, MissingBinsMaskedAndDuplicatesRejected) {
  const Shape disc(Disc{{0, 0}, 1.0});
  const BeamGeometry geo{2, 3};
  std::vector<FitRow> fits{{0, 0, {}}, {0, 1, {}}, {1, 2, {}}};
  const Sinogram s = sinogram_from_fits(fits, disc, geo);
  EXPECT_EQ(s.valid_count(), 3u);
  EXPECT_FALSE(s.valid(0, 2));
  fits.push_back({0, 1, {}});
  EXPECT_THROW(sinogram_from_fits(fits, disc, geo), DataError);
  EXPECT_THROW(sinogram_from_fits({{2, 0, {}}}, disc, geo), DataError);
}

TEST(SinogramFromFits, ReproducesForwardXrayFromChordAverages) {
  const Shape disc(Disc{{0, 0}, 1.0});
  const Grid g = Grid::covering({-1.2, -1.2}, {1.2, 1.2}, 49, 49);
  const auto v = sample_scalar([](Vec2 p) { return 1 + p.x * p.y; }, g);
  const BeamGeometry geo{6, 7};
  std::vector<FitRow> fits;
  for (std::size_t k = 0; k < 6; ++k)
    for (std::size_t j = 0; j < 7; ++j) {
      const auto c = beam_chord(disc, geo, k, j);
      fits.push_back({k, j, ChordFit{0.0, forward_xray(v, *c) / c->length, 0.0, {}}});
    }
  const Sinogram a = sinogram_from_fits(fits, disc, geo), b = forward_sinogram(v, disc, geo);
  for (std::size_t i = 0; i < a.values().size(); ++i) EXPECT_NEAR(a.values()[i], b.values()[i], 1e-13);
}

TEST(SinogramCsv, RoundTrip) {
  const BeamGeometry geo{3, 4};
  std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 1.0 / 3.0};
  std::vector<char> m(12, 1);
  m[5] = 0;
  const Sinogram s(geo, 1.5, {0, 0}, v, m);
  std::stringstream ss;
  write_sinogram_csv(ss, s);
  const Sinogram back = read_sinogram_csv(ss, {0, 0});
  EXPECT_EQ(back.geometry().n_angles, 3u);
  EXPECT_EQ(back.radius(), 1.5);
  EXPECT_EQ(back.value(2, 3), 1.0 / 3.0);
  EXPECT_FALSE(back.valid(1, 1));
  std::istringstream bad("n_angles,n_offsets,R\n1,1,1\nangle_index,offset_index,value,valid\n0,0,1,1\n");
  EXPECT_THROW(read_sinogram_csv(bad, {0, 0}), Error);
}

TEST(Fbp, ZeroSinogramGivesZeroField) {
  const Shape disc(Disc{{0, 0}, 1.0});
  const Grid g = Grid::covering({-1, -1}, {1, 1}, 33, 33);
  const auto r = fbp_invert(Sinogram::zeros(BeamGeometry{16, 17}, 1.0, {0, 0}), g, disc, FbpFilter::hann);
  for (double v : r.field.values()) EXPECT_EQ(v, 0.0);
}

TEST(Fbp, RadialGaussianRoundTripRefinesWithAngles) {
  const double R = 3.0;
  const Shape disc(Disc{{0, 0}, R});
  const Grid g = Grid::covering({-R, -R}, {R, R}, 256, 256);
  double prev = INFINITY;
  for (std::size_t n : {64, 128, 256}) {
    const auto r = fbp_invert(gaussian_sinogram(BeamGeometry{n, 256}, R), g, disc, FbpFilter::ram_lak);
    const double err = rel_l2_in(r.field, gaussian, disc);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LE(prev, 0.03);
}

TEST(Fbp, DiscPhantomPlateau) {
  const double R = 1.0, r0 = 0.6;
  const Shape disc(Disc{{0, 0}, R});
  const BeamGeometry geo{180, 181};
  std::vector<double> v(geo.n_angles * geo.n_offsets);
  for (std::size_t k = 0; k < geo.n_angles; ++k)
    for (std::size_t j = 0; j < geo.n_offsets; ++j) {
      const double z = geo.offset(j, R);
      v[k * geo.n_offsets + j] = std::abs(z) < r0 ? 2 * std::sqrt(r0 * r0 - z * z) : 0.0;
    }
  const Sinogram s(geo, R, {0, 0}, v, std::vector<char>(v.size(), 1));
  const Grid g = Grid::covering({-R, -R}, {R, R}, 129, 129);
  for (FbpFilter f : {FbpFilter::ram_lak, FbpFilter::hann}) {
    const auto rec = fbp_invert(s, g, disc, f);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double rad = norm(g.node(k));
      if (rad < r0 - 0.1) EXPECT_NEAR(rec.field[k], 1.0, 0.05);
      if (rad > r0 + 0.1 && rad < R) EXPECT_NEAR(rec.field[k], 0.0, 0.05);
      if (rad > R) EXPECT_EQ(rec.field[k], 0.0);
    }
  }
}

TEST(Fbp, MaskedBinsAreInfilled) {
  const double R = 3.0;
  const Shape disc(Disc{{0, 0}, R});
  const BeamGeometry geo{64, 65};
  const Sinogram full = gaussian_sinogram(geo, R);
  std::vector<double> v(full.values().begin(), full.values().end());
  std::vector<char> m(v.size(), 1);
  for (std::size_t k = 0; k < 64; k += 4) {
    m[k * 65 + 30] = 0;
    v[k * 65 + 30] = 1e6;  // ignored
  }
  const Grid g = Grid::covering({-R, -R}, {R, R}, 65, 65);
  const auto a = fbp_invert(full, g, disc, FbpFilter::ram_lak);
  const auto b = fbp_invert(Sinogram(geo, R, {0, 0}, v, m), g, disc, FbpFilter::ram_lak);
  EXPECT_EQ(b.infilled, 16u);
  EXPECT_LT(rel_l2_in(b.field, [&](Vec2 p) { return interp(a.field, p); }, disc.scaled(0.99)), 0.01);
}

TEST(Fbp, SparseOrEmptyAnglesFail) {
  const BeamGeometry geo{8, 9};
  const Shape disc(Disc{{0, 0}, 1.0});
  const Grid g = Grid::covering({-1, -1}, {1, 1}, 17, 17);
  std::vector<char> m(72, 1);
  for (std::size_t j = 0; j < 9; ++j) m[2 * 9 + j] = 0;  // one angle fully masked, 87.5% valid
  EXPECT_THROW(fbp_invert(Sinogram(geo, 1.0, {0, 0}, std::vector<double>(72, 0.0), m), g, disc, FbpFilter::hann),
               DataError);
  std::vector<char> m2(72, 1);
  for (std::size_t k = 0; k < 8; ++k) m2[k * 9 + 4] = 0;  // 88.9% valid, every angle populated
  EXPECT_THROW(fbp_invert(Sinogram(geo, 1.0, {0, 0}, std::vector<double>(72, 0.0), m2), g, disc, FbpFilter::hann),
               DataError);
}

TEST(Fbp, FilterNames) {
  EXPECT_EQ(parse_filter("ram-lak"), FbpFilter::ram_lak);
  EXPECT_EQ(parse_filter("hann"), FbpFilter::hann);
  EXPECT_EQ(to_string(FbpFilter::hann), "hann");
  EXPECT_THROW(parse_filter("shepp"), ConfigError);
}

TEST(FourierSlice, ConsistentPairAndScaledPair) {
  const double R = 3.0;
  const Shape disc(Disc{{0, 0}, R});
  const Grid g = Grid::covering({-R, -R}, {R, R}, 256, 256);
  const auto v = sample_scalar(gaussian, g);
  const Sinogram s = forward_sinogram(v, disc, BeamGeometry{32, 256});
  EXPECT_LE(fourier_slice_check(v, s, disc), 0.02);
  const auto v2 = sample_scalar([](Vec2 p) { return 2 * gaussian(p); }, g);
  EXPECT_NEAR(fourier_slice_check(v2, s, disc), 0.5, 0.02);
  EXPECT_EQ(fourier_slice_check(ScalarField::zeros(g), Sinogram::zeros(BeamGeometry{8, 9}, R, {0, 0}), disc), 0.0);
}
