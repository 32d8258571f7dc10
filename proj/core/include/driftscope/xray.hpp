#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "driftscope/fields.hpp"
#include "driftscope/geometry.hpp"
#include "driftscope/smalltime.hpp"

namespace driftscope {

// Line integrals P_omega V(z) on a parallel-beam geometry; bin (k, j) is stored at
// k * n_offsets + j. Invalid bins are excluded from inversion.
class Sinogram {
 public:
  Sinogram(BeamGeometry geo, double radius, Vec2 center, std::vector<double> values, std::vector<char> valid);
  static Sinogram zeros(const BeamGeometry& geo, double radius, Vec2 center);

  const BeamGeometry& geometry() const { return geo_; }
  double radius() const { return radius_; }
  Vec2 center() const { return center_; }
  double spacing() const { return geo_.offset_spacing(radius_); }

  std::size_t bin(std::size_t k, std::size_t j) const { return k * geo_.n_offsets + j; }
  double value(std::size_t k, std::size_t j) const { return values_[bin(k, j)]; }
  bool valid(std::size_t k, std::size_t j) const { return valid_[bin(k, j)] != 0; }
  std::span<const double> values() const { return values_; }
  std::span<const char> mask() const { return valid_; }
  std::size_t valid_count() const;

 private:
  BeamGeometry geo_;
  double radius_;
  Vec2 center_;
  std::vector<double> values_;
  std::vector<char> valid_;
};

// Header "n_angles,n_offsets,R", one line of values, then "angle_index,offset_index,value,valid"
// rows. The centre is not stored; the reader takes it from the domain.
void write_sinogram_csv(std::ostream& out, const Sinogram& s);
Sinogram read_sinogram_csv(std::istream& in, Vec2 center);

// Composite trapezoid rule with n_quad intervals for the arclength integral of V along
// the chord. Throws OutOfBoundsError if the chord leaves the grid.
double forward_xray(const ScalarField& v, const Chord& chord, std::size_t n_quad = 256);
double forward_xray(const ScalarFn& v, const Chord& chord, std::size_t n_quad = 256);

// Sinogram of V restricted to the domain; lines missing the domain are valid zeros.
Sinogram forward_sinogram(const ScalarField& v, const Shape& domain, const BeamGeometry& geo,
                          std::size_t n_quad = 256);

// Bins get F * length; lines that miss the domain are valid zeros; bins without a fit are
// masked. Duplicate or out-of-range fit indices are a DataError.
Sinogram sinogram_from_fits(const std::vector<FitRow>& fits, const Shape& domain, const BeamGeometry& geo);

enum class FbpFilter { ram_lak, hann };
FbpFilter parse_filter(const std::string& name);
std::string to_string(FbpFilter f);

struct FbpResult {
  ScalarField field;
  // Masked bins filled by linear interpolation along their angle.
  std::size_t infilled = 0;
};

// Filtered back-projection onto out_grid; zero outside the domain. Needs at least 90%
// valid bins and no fully masked angle.
FbpResult fbp_invert(const Sinogram& sino, const Grid& out_grid, const Shape& domain, FbpFilter filter);

// Largest discrepancy between the 1-D transform of each sinogram row and the matching
// central slice of the 2-D transform of V restricted to the domain, relative to the
// largest slice magnitude, over |p| <= pi / (2 tau).
double fourier_slice_check(const ScalarField& v, const Sinogram& sino, const Shape& domain);

}  // namespace driftscope
