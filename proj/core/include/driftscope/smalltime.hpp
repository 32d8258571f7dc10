#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftscope/density.hpp"
#include "driftscope/diffusion.hpp"
#include "driftscope/geometry.hpp"

namespace driftscope {

// A line segment through the domain with both endpoints on its boundary.
struct Chord {
  Vec2 x;
  Vec2 y;
  Vec2 omega;  // (y - x) / |y - x|
  double z = 0.0;  // signed offset of the line from the domain centre, along the normal
  double length = 0.0;

  static Chord between(Vec2 x, Vec2 y, Vec2 center);
  Chord reversed(Vec2 center) const { return between(y, x, center); }
};

// Equi-angle, equi-offset parallel-beam sampling. Angle k is theta_k = k pi / n_angles
// with line normal n = (cos theta, sin theta) and direction omega = (-sin theta, cos theta);
// offset j is z_j = -R + (j + 1) 2R / (n_offsets + 1), strictly inside (-R, R).
struct BeamGeometry {
  std::size_t n_angles = 180;
  std::size_t n_offsets = 181;

  void validate() const;
  double angle(std::size_t k) const;
  Vec2 normal(std::size_t k) const;
  Vec2 direction(std::size_t k) const;
  double offset(std::size_t j, double radius) const;
  double offset_spacing(double radius) const;
};

// Chord of bin (k, j); nullopt when the line misses the shape or only grazes it.
std::optional<Chord> beam_chord(const Shape& shape, const BeamGeometry& geo, std::size_t k, std::size_t j);

// Default ladder t_k = t1 2^{1-k}, t1 = 0.02 R^2, m = 4.
std::vector<double> default_ladder(double radius);
// Throws ConfigError unless the ladder has >= 3 entries, is positive and strictly decreasing.
void validate_ladder(const std::vector<double>& times);

// log(p_c) - log(p_b). Throws DataError when either value is not above floor.
double log_ratio(double p_c, double p_b, double floor = 1e-30);
double log_ratio(const Density& p_c, const Density& p_b);

struct ChordFit {
  double delta_psi = 0.0;
  double F = 0.0;
  double residual = 0.0;
  // Covariance of (delta_psi, F): {var delta_psi, cov, var F}.
  std::array<double, 3> covariance{};
};

// Weighted least squares of r(t) ~ delta_psi - F t with weights 1/t. residual is the
// weighted RMS misfit. The covariance adds the squared gap between the affine fit and an
// auxiliary quadratic fit, which estimates the O(t^2) model bias on this ladder.
ChordFit fit_small_time(const std::vector<double>& times, const std::vector<double>& log_ratios);

struct ChordSamples {
  std::size_t angle_index = 0;
  std::size_t offset_index = 0;
  Chord chord;
  std::vector<double> times;
  std::vector<Density> observed;
  std::vector<Density> reference;
};

// Skipped bins, dropped samples and excluded chords.
struct DatasetRecord {
  std::size_t angle_index = 0;
  std::size_t offset_index = 0;
  std::string reason;
};

struct BoundaryDataset {
  BeamGeometry geometry;
  std::vector<double> times;
  std::vector<ChordSamples> chords;  // ordered by (angle_index, offset_index)
  std::vector<DatasetRecord> records;
  std::string provenance;
};

struct DatasetOptions {
  // Applied to linear-scale densities (tabulated kernels); log-space values are exempt.
  double density_floor = 1e-30;
};

BoundaryDataset build_boundary_dataset(const KernelSpec& observed, const KernelSpec& reference, const Shape& domain,
                                       const BeamGeometry& geo, const std::vector<double>& times,
                                       const DatasetOptions& opts = {});

// CSV "angle_index,offset_index,x1,x2,y1,y2,t,p_obs,p_ref"; one row per surviving sample.
void write_dataset_csv(std::ostream& out, const BoundaryDataset& ds);
// Groups rows by (angle_index, offset_index); chords with fewer than 3 times are excluded
// with a record. Throws DataError on malformed rows or nonpositive densities.
BoundaryDataset read_dataset_csv(std::istream& in, const BeamGeometry& geo, Vec2 center);

struct FitRow {
  std::size_t angle_index = 0;
  std::size_t offset_index = 0;
  ChordFit fit;
};

// Parallel over chords; output in dataset order.
std::vector<FitRow> fit_dataset(const BoundaryDataset& ds);

// CSV "angle_index,offset_index,delta_psi,F,residual".
void write_fits_csv(std::ostream& out, const std::vector<FitRow>& fits);
std::vector<FitRow> read_fits_csv(std::istream& in);

// Boundary psi on n nodes equi-spaced in arclength (node i at s = i * perimeter / n),
// periodic linear interpolation in between. Gauge: psi = 0 at the reference node.
class BoundaryPsi {
 public:
  BoundaryPsi(Shape shape, std::vector<double> values, std::size_t reference_node, std::size_t interpolated_nodes);

  const Shape& shape() const { return shape_; }
  std::span<const double> values() const { return values_; }
  std::size_t reference_node() const { return reference_; }
  std::size_t interpolated_nodes() const { return interpolated_; }

  double at_param(double s) const;
  double at(Vec2 boundary_point) const { return at_param(shape_.boundary_param(boundary_point)); }
  // Same data with the gauge moved to another node.
  BoundaryPsi regauged(std::size_t reference_node) const;

 private:
  Shape shape_;
  std::vector<double> values_;
  std::size_t reference_;
  std::size_t interpolated_;
};

// Least squares for node values from chord differences psi(y) - psi(x) = delta_psi.
// Nodes touched by no chord are interpolated along the boundary; more than 5% of them is
// a DataError.
BoundaryPsi boundary_psi_from_fits(const std::vector<FitRow>& fits, const Shape& domain, const BeamGeometry& geo,
                                   std::size_t n_nodes, std::size_t reference_node = 0);

}  // namespace driftscope
