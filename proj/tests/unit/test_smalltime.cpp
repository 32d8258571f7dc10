#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "driftscope/error.hpp"
#include "driftscope/smalltime.hpp"
#include "oracles.hpp"

using namespace driftscope;

namespace {

const Shape kUnitDisc(Disc{{0, 0}, 1.0});

double ou_potential(Vec2 p) { return 0.5 * (norm2(p) - 2.0); }

std::vector<double> ou_log_ratios(Vec2 x, Vec2 y, const std::vector<double>& times) {
  const KernelSpec ou(OuKernel{1.0}), bm(BrownianKernel{});
  std::vector<double> r;
  for (double t : times) r.push_back(log_ratio(*ou.density(x, t, y), *bm.density(x, t, y)));
  return r;
}

}  // namespace

TEST(LogRatio, TrivialValues) {
  EXPECT_EQ(log_ratio(0.3, 0.3), 0.0);
  EXPECT_NEAR(log_ratio(std::numbers::e * 0.2, 0.2), 1.0, 1e-15);
  EXPECT_THROW(log_ratio(0.0, 0.2), DataError);
  EXPECT_THROW(log_ratio(0.2, -1.0), DataError);
  EXPECT_THROW(log_ratio(1e-31, 0.2), DataError);
  EXPECT_NO_THROW(log_ratio(1e-31, 0.2, 1e-40));
}

TEST(LogRatio, OuAgainstBrownianIsSmallTimeExpansion) {
  const Vec2 x{1, 0}, y{0, 1};
  const double F = oracle::integrate01([&](double s) { return ou_potential(x + s * (y - x)); });
  for (double t : {0.01, 0.001}) {
    const double r = ou_log_ratios(x, y, {t})[0];
    // psi(y) - psi(x) = 0 for psi = -|x|^2/2 on the unit circle.
    EXPECT_NEAR(r, -t * F, 2 * t * t);
  }
}

TEST(FitSmallTime, ExactAffineData) {
  const std::vector<double> t{0.04, 0.02, 0.01, 0.005};
  std::vector<double> r;
  for (double ti : t) r.push_back(0.7 - 2.5 * ti);
  const ChordFit f = fit_small_time(t, r);
  EXPECT_NEAR(f.delta_psi, 0.7, 1e-13);
  EXPECT_NEAR(f.F, 2.5, 1e-11);
  EXPECT_NEAR(f.residual, 0.0, 1e-12);
}

TEST(FitSmallTime, TrivialDriftFitsZero) {
  const ChordFit f = fit_small_time({0.02, 0.01, 0.005}, {0.0, 0.0, 0.0});
  EXPECT_EQ(f.delta_psi, 0.0);
  EXPECT_EQ(f.F, 0.0);
  EXPECT_EQ(f.residual, 0.0);
}

TEST(FitSmallTime, RankDeficientIsAnError) {
  EXPECT_THROW(fit_small_time({0.01, 0.01, 0.01}, {0.1, 0.2, 0.3}), DataError);
  EXPECT_THROW(fit_small_time({0.02, 0.01}, {0.1, 0.2}), DataError);
  EXPECT_THROW(fit_small_time({0.02, 0.01, 0.005}, {0.1, NAN, 0.2}), DataError);
}

TEST(FitSmallTime, OuChordAverageWithinOnePercent) {
  const Vec2 x{1, 0}, y{0, 1};
  const auto t = default_ladder(1.0);
  const ChordFit f = fit_small_time(t, ou_log_ratios(x, y, t));
  const double F = oracle::integrate01([&](double s) { return ou_potential(x + s * (y - x)); });
  EXPECT_NEAR(f.F, F, 0.01 * std::abs(F));
  EXPECT_NEAR(f.delta_psi, 0.0, 1e-3);
  EXPECT_GE(f.residual, 0.0);
  EXPECT_GT(f.covariance[0], 0.0);
  EXPECT_GT(f.covariance[2], 0.0);
}

TEST(FitSmallTime, AntisymmetricUnderReversal) {
  const auto t = default_ladder(1.0);
  const Vec2 a{0.6, 0.8}, b{-1.0, 0.0};
  const ChordFit fwd = fit_small_time(t, ou_log_ratios(a, b, t));
  const ChordFit bwd = fit_small_time(t, ou_log_ratios(b, a, t));
  const double se = std::sqrt(fwd.covariance[0] + bwd.covariance[0]);
  EXPECT_LE(std::abs(fwd.delta_psi + bwd.delta_psi), std::max(2 * se, 1e-12));
  EXPECT_NEAR(fwd.F, bwd.F, 1e-9);
}

TEST(FitSmallTime, InvariantUnderCommonRescaling) {
  const auto t = default_ladder(1.0);
  const KernelSpec ou(OuKernel{1.0}), bm(BrownianKernel{});
  const Vec2 x{0.6, -0.8}, y{-0.28, 0.96};
  std::vector<double> r1, r2;
  for (double ti : t) {
    Density pc = *ou.density(x, ti, y), pb = *bm.density(x, ti, y);
    r1.push_back(log_ratio(pc, pb));
    const double shift = std::log(1e-40);
    r2.push_back(log_ratio(Density::from_log(pc.log() + shift), Density::from_log(pb.log() + shift)));
  }
  const ChordFit a = fit_small_time(t, r1), b = fit_small_time(t, r2);
  EXPECT_NEAR(a.delta_psi, b.delta_psi, 1e-12);
  EXPECT_NEAR(a.F, b.F, 1e-9);
}

TEST(Chord, BetweenFillsInvariants) {
  const Chord c = Chord::between({1, 0}, {0, 1}, {0, 0});
  EXPECT_NEAR(norm(c.omega), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(c.length, std::sqrt(2.0));
  // Line x + y = 1 sits at distance 1/sqrt(2) from the centre.
  EXPECT_NEAR(std::abs(c.z), 1 / std::sqrt(2.0), 1e-15);
  const Chord r = c.reversed({0, 0});
  EXPECT_EQ(r.x, c.y);
  EXPECT_NEAR(r.z, -c.z, 1e-15);
  EXPECT_THROW(Chord::between({1, 0}, {1, 0}, {0, 0}), GeometryError);
}

TEST(BeamGeometry, OffsetsAndChordLengths) {
  const BeamGeometry geo{4, 3};
  EXPECT_DOUBLE_EQ(geo.offset(0, 1.0), -0.5);
  EXPECT_DOUBLE_EQ(geo.offset(1, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(geo.offset(2, 1.0), 0.5);
  for (std::size_t k = 0; k < geo.n_angles; ++k) {
    for (std::size_t j = 0; j < 3; ++j) {
      const auto c = beam_chord(kUnitDisc, geo, k, j);
      ASSERT_TRUE(c);
      const double z = geo.offset(j, 1.0);
      EXPECT_NEAR(c->length, 2 * std::sqrt(1 - z * z), 1e-12);
      EXPECT_NEAR(c->z, z, 1e-12);
      EXPECT_NEAR(norm(c->x), 1.0, 1e-12);
      EXPECT_NEAR(norm(c->y), 1.0, 1e-12);
      EXPECT_NEAR(dot(c->omega, geo.direction(k)), 1.0, 1e-12);
    }
  }
  EXPECT_THROW((BeamGeometry{1, 3}.validate()), ConfigError);
  EXPECT_THROW((BeamGeometry{2, 0}.validate()), ConfigError);
}

TEST(BeamGeometry, RectangleCornerLinesMiss) {
  const Shape sq(Rectangle{{-1, -1}, {1, 1}});
  // Angle pi/4, outermost offsets pass outside the square's inscribed diamond region.
  const BeamGeometry geo{4, 21};
  std::size_t misses = 0;
  for (std::size_t j = 0; j < geo.n_offsets; ++j)
    if (!beam_chord(sq, geo, 1, j)) ++misses;
  EXPECT_EQ(misses, 0u);  // the circumradius at pi/4 is exactly the half-diagonal
  std::size_t axis_misses = 0;
  for (std::size_t j = 0; j < geo.n_offsets; ++j)
    if (!beam_chord(sq, geo, 0, j)) ++axis_misses;
  // |z| > 1 misses the square along the axes.
  std::size_t expected = 0;
  for (std::size_t j = 0; j < geo.n_offsets; ++j)
    if (std::abs(geo.offset(j, std::sqrt(2.0))) >= 1.0) ++expected;
  EXPECT_EQ(axis_misses, expected);
  EXPECT_GT(expected, 0u);
}

TEST(Ladder, DefaultAndValidation) {
  const auto t = default_ladder(2.0);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_DOUBLE_EQ(t[0], 0.08);
  EXPECT_DOUBLE_EQ(t[3], 0.01);
  EXPECT_NO_THROW(validate_ladder(t));
  EXPECT_THROW(validate_ladder({0.1, 0.05}), ConfigError);
  EXPECT_THROW(validate_ladder({0.1, 0.2, 0.05}), ConfigError);
  EXPECT_THROW(validate_ladder({0.1, 0.05, 0.0}), ConfigError);
}

TEST(Dataset, IdenticalKernelsGiveUnitRatios) {
  const KernelSpec ou(OuKernel{0.5});
  const auto ds = build_boundary_dataset(ou, ou, kUnitDisc, BeamGeometry{6, 5}, default_ladder(1.0));
  ASSERT_EQ(ds.chords.size(), 30u);
  for (const auto& c : ds.chords)
    for (std::size_t i = 0; i < c.times.size(); ++i) EXPECT_EQ(log_ratio(c.observed[i], c.reference[i]), 0.0);
  for (const FitRow& f : fit_dataset(ds)) {
    EXPECT_EQ(f.fit.delta_psi, 0.0);
    EXPECT_EQ(f.fit.F, 0.0);
  }
}

TEST(Dataset, OrderedByBin) {
  const KernelSpec bm(BrownianKernel{});
  const auto ds = build_boundary_dataset(bm, bm, kUnitDisc, BeamGeometry{5, 4}, default_ladder(1.0));
  for (std::size_t i = 0; i < ds.chords.size(); ++i) {
    EXPECT_EQ(ds.chords[i].angle_index, i / 4);
    EXPECT_EQ(ds.chords[i].offset_index, i % 4);
  }
}

TEST(Dataset, TabulatedEntriesAreInterpolatedSlices) {
  const Grid g = Grid::covering({-1.5, -1.5}, {1.5, 1.5}, 61, 61);
  const BeamGeometry geo{2, 1};
  const std::vector<double> times{0.2, 0.1, 0.05};
  std::vector<TabulatedSource> sources;
  for (std::size_t k = 0; k < 2; ++k) {
    const Vec2 x = beam_chord(kUnitDisc, geo, k, 0)->x;
    std::vector<ScalarField> slices;
    for (double t : times) slices.push_back(sample_scalar([&](Vec2 y) { return gaussian_kernel(x, t, y); }, g));
    sources.push_back({x, times, slices});
  }
  const KernelSpec tab(TabulatedKernel{sources});
  const auto ds = build_boundary_dataset(tab, KernelSpec(BrownianKernel{}), kUnitDisc, geo, times);
  ASSERT_EQ(ds.chords.size(), 2u);
  for (const auto& c : ds.chords) {
    const auto& src = sources[c.angle_index];
    for (std::size_t i = 0; i < times.size(); ++i)
      EXPECT_EQ(c.observed[i].linear(), interp(src.slices[i], c.chord.y));
  }
}

TEST(Dataset, SubFloorSamplesDroppedAndChordExcluded) {
  const Grid g = Grid::covering({-1.5, -1.5}, {1.5, 1.5}, 61, 61);
  const BeamGeometry geo{2, 1};
  const std::vector<double> times{0.2, 0.1, 0.05, 0.01};
  std::vector<TabulatedSource> sources;
  for (std::size_t k = 0; k < 2; ++k) {
    const Vec2 x = beam_chord(kUnitDisc, geo, k, 0)->x;
    std::vector<ScalarField> slices;
    for (double t : times) slices.push_back(sample_scalar([&](Vec2 y) { return gaussian_kernel(x, t, y); }, g));
    sources.push_back({x, times, slices});
  }
  const KernelSpec tab(TabulatedKernel{sources});
  // Across a diameter p = e^{-2/t} / (2 pi t): 3.6e-5, 3.3e-9, 1.3e-17, 2e-86.
  auto ds = build_boundary_dataset(tab, KernelSpec(BrownianKernel{}), kUnitDisc, geo, times);
  ASSERT_EQ(ds.chords.size(), 2u);
  EXPECT_EQ(ds.chords[0].times.size(), 3u);
  EXPECT_EQ(ds.records.size(), 2u);
  ds = build_boundary_dataset(tab, KernelSpec(BrownianKernel{}), kUnitDisc, geo, times, DatasetOptions{1e-6});
  EXPECT_TRUE(ds.chords.empty());
  EXPECT_EQ(ds.records.size(), 2u * 3 + 2);
}

TEST(Dataset, KernelFailureNamesChordAndTime) {
  const Grid g = Grid::covering({-1.5, -1.5}, {1.5, 1.5}, 21, 21);
  const KernelSpec tab(TabulatedKernel{{TabulatedSource{{5, 5}, {0.2}, {ScalarField::zeros(g)}}}});
  try {
    build_boundary_dataset(tab, KernelSpec(BrownianKernel{}), kUnitDisc, BeamGeometry{2, 1}, {0.2, 0.1, 0.05});
    FAIL();
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("chord (0, 0)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("t="), std::string::npos) << msg;
  }
}

TEST(DatasetCsv, RoundTripIsExact) {
  const KernelSpec ou(OuKernel{1.0}), bm(BrownianKernel{});
  const BeamGeometry geo{4, 5};
  const auto ds = build_boundary_dataset(ou, bm, kUnitDisc, geo, default_ladder(1.0));
  std::stringstream ss;
  write_dataset_csv(ss, ds);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "angle_index,offset_index,x1,x2,y1,y2,t,p_obs,p_ref");
  const auto back = read_dataset_csv(ss, geo, {0, 0});
  ASSERT_EQ(back.chords.size(), ds.chords.size());
  const auto f1 = fit_dataset(ds), f2 = fit_dataset(back);
  for (std::size_t i = 0; i < f1.size(); ++i) {
    EXPECT_EQ(f1[i].fit.delta_psi, f2[i].fit.delta_psi);
    EXPECT_EQ(f1[i].fit.F, f2[i].fit.F);
  }
}

TEST(DatasetCsv, MalformedRowsNameTheRow) {
  const BeamGeometry geo{4, 5};
  std::istringstream bad1("angle_index,offset_index,x1,x2,y1,y2,t,p_obs,p_ref\n0,0,1,0,0,1,0.01,abc,1\n");
  EXPECT_THROW(read_dataset_csv(bad1, geo, {0, 0}), DataError);
  std::istringstream bad2("angle_index,offset_index,x1,x2,y1,y2,t,p_obs,p_ref\n0,0,1,0,0,1,0.01,-1,1\n");
  try {
    read_dataset_csv(bad2, geo, {0, 0});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row"), std::string::npos) << e.what();
  }
  std::istringstream bad3("a,b\n");
  EXPECT_THROW(read_dataset_csv(bad3, geo, {0, 0}), DataError);
  std::istringstream bad4(
      "angle_index,offset_index,x1,x2,y1,y2,t,p_obs,p_ref\n0,0,1,0,0,1,0.01,1,1\n0,0,1,0,0,-1,0.005,1,1\n");
  EXPECT_THROW(read_dataset_csv(bad4, geo, {0, 0}), DataError);
}

TEST(FitsCsv, RoundTrip) {
  std::vector<FitRow> rows{{0, 1, ChordFit{0.1, 2.0, 1e-3, {}}}, {3, 4, ChordFit{-1.0 / 3.0, 1e-17, 0.0, {}}}};
  std::stringstream ss;
  write_fits_csv(ss, rows);
  const auto back = read_fits_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].angle_index, 3u);
  EXPECT_EQ(back[1].fit.delta_psi, -1.0 / 3.0);
  EXPECT_EQ(back[1].fit.F, 1e-17);
}

TEST(BoundaryPsi, RecoversLinearPsiUpToGauge) {
  const BeamGeometry geo{24, 25};
  const auto psi = [](Vec2 p) { return 0.7 * p.x - 0.2 * p.y; };
  std::vector<FitRow> fits;
  for (std::size_t k = 0; k < geo.n_angles; ++k)
    for (std::size_t j = 0; j < geo.n_offsets; ++j) {
      const auto c = beam_chord(kUnitDisc, geo, k, j);
      fits.push_back({k, j, ChordFit{psi(c->y) - psi(c->x), 0.0, 0.0, {}}});
    }
  const auto bp = boundary_psi_from_fits(fits, kUnitDisc, geo, 48, 0);
  EXPECT_EQ(bp.values()[0], 0.0);
  const Vec2 p0 = kUnitDisc.boundary_point(0.0);
  // Linear interpolation between nodes on a circle: O(h^2) error.
  for (double s = 0; s < 2 * std::numbers::pi; s += 0.1) {
    const Vec2 p = kUnitDisc.boundary_point(s);
    EXPECT_NEAR(bp.at(p), psi(p) - psi(p0), 5e-3);
  }
  for (std::size_t i = 0; i < 48; ++i) {
    const Vec2 p = kUnitDisc.boundary_point(i * 2 * std::numbers::pi / 48);
    EXPECT_NEAR(bp.values()[i], psi(p) - psi(p0), 0.02);
  }
  const auto moved = bp.regauged(5);
  EXPECT_EQ(moved.values()[5], 0.0);
  EXPECT_NEAR(moved.values()[7] - moved.values()[2], bp.values()[7] - bp.values()[2], 1e-14);
}

TEST(BoundaryPsi, PeriodicInterpolation) {
  const BoundaryPsi bp(kUnitDisc, {0.0, 1.0, 2.0, 3.0}, 0, 0);
  const double P = kUnitDisc.perimeter();
  EXPECT_DOUBLE_EQ(bp.at_param(P / 8), 0.5);
  EXPECT_DOUBLE_EQ(bp.at_param(7 * P / 8), 1.5);
  EXPECT_DOUBLE_EQ(bp.at_param(P + P / 4), 1.0);
  EXPECT_THROW(BoundaryPsi(kUnitDisc, {0.0, 1.0, 2.0}, 3, 0), ConfigError);
}

TEST(BoundaryPsi, TooManyUntouchedNodesIsAnError) {
  const BeamGeometry geo{2, 1};
  std::vector<FitRow> fits{{0, 0, ChordFit{}}, {1, 0, ChordFit{}}};
  EXPECT_THROW(boundary_psi_from_fits(fits, kUnitDisc, geo, 64, 0), DataError);
}
