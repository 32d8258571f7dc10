#include "driftscope/density.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

#include "driftscope/error.hpp"

namespace driftscope {

Density Density::from_log(double log_value) {
  if (!std::isfinite(log_value)) throw DataError("Density: non-finite log density");
  const double l10 = log_value / std::numbers::ln10;
  const double e = std::floor(l10);
  Density d;
  d.exponent_ = static_cast<std::int64_t>(e);
  d.mantissa_ = std::pow(10.0, l10 - e);
  if (d.mantissa_ >= 10.0) {
    d.mantissa_ /= 10.0;
    ++d.exponent_;
  }
  if (d.mantissa_ < 1.0) {
    d.mantissa_ *= 10.0;
    --d.exponent_;
  }
  return d;
}

Density Density::from_linear(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) throw DataError("Density: value must be positive and finite");
  Density d;
  d.exponent_ = static_cast<std::int64_t>(std::floor(std::log10(value)));
  d.mantissa_ = value / std::pow(10.0, static_cast<double>(d.exponent_));
  if (d.mantissa_ >= 10.0) {
    d.mantissa_ /= 10.0;
    ++d.exponent_;
  }
  if (d.mantissa_ < 1.0) {
    d.mantissa_ *= 10.0;
    --d.exponent_;
  }
  d.linear_scale_ = true;
  return d;
}

Density Density::parse(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  if (text.empty()) throw DataError("Density: empty field");
  const auto epos = text.find_first_of("eE");
  double mant = 0.0;
  std::int64_t exp10 = 0;
  const std::string_view mtext = text.substr(0, epos);
  auto [mp, mec] = std::from_chars(mtext.data(), mtext.data() + mtext.size(), mant);
  if (mec != std::errc() || mp != mtext.data() + mtext.size())
    throw DataError("Density: malformed value '" + std::string(text) + "'");
  if (epos != std::string_view::npos) {
    std::string_view etext = text.substr(epos + 1);
    if (!etext.empty() && etext.front() == '+') etext.remove_prefix(1);
    auto [ep, eec] = std::from_chars(etext.data(), etext.data() + etext.size(), exp10);
    if (eec != std::errc() || ep != etext.data() + etext.size())
      throw DataError("Density: malformed exponent in '" + std::string(text) + "'");
  }
  if (!(mant > 0.0) || !std::isfinite(mant)) throw DataError("Density: nonpositive value '" + std::string(text) + "'");
  Density d;
  d.mantissa_ = mant;
  d.exponent_ = exp10;
  // Renormalize inputs such as "0.5e-3" or "12"; normalized inputs are kept bit-for-bit.
  while (d.mantissa_ >= 10.0) {
    d.mantissa_ /= 10.0;
    ++d.exponent_;
  }
  while (d.mantissa_ < 1.0) {
    d.mantissa_ *= 10.0;
    --d.exponent_;
  }
  return d;
}

double Density::log() const {
  return std::log(mantissa_) + static_cast<double>(exponent_) * std::numbers::ln10;
}

double Density::linear() const { return mantissa_ * std::pow(10.0, static_cast<double>(exponent_)); }

std::string Density::to_string() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17ge%lld", mantissa_, static_cast<long long>(exponent_));
  return buf;
}

}  // namespace driftscope
