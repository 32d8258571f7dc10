#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace driftscope {

// A positive probability density carried as mantissa * 10^exponent, with mantissa in
// [1, 10). Closed-form kernels at small times produce values far below the double
// range; this keeps them exact through CSV round trips.
class Density {
 public:
  Density() = default;

  static Density from_log(double log_value);
  // Requires value > 0 and finite.
  static Density from_linear(double value);
  // Decimal scientific notation ("3.1415926535897931e-348") or any strtod-parsable
  // positive number. Throws DataError on nonpositive or malformed input.
  static Density parse(std::string_view text);

  double log() const;
  // Underflows to 0 for tiny values.
  double linear() const;
  std::string to_string() const;

  double mantissa() const { return mantissa_; }
  std::int64_t exponent() const { return exponent_; }

  // True when produced from a linear-scale number (tabulated or numerical data).
  bool linear_scale() const { return linear_scale_; }

 private:
  double mantissa_ = 1.0;
  std::int64_t exponent_ = 0;
  bool linear_scale_ = false;
};

}  // namespace driftscope
