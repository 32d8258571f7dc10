#pragma once

// Independent reference computations used by the tests. Nothing here calls into the
// library's numerics.

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

// Gauss-Legendre nodes and weights on [0, 1], by Newton iteration on P_n.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = 0.5 * (1.0 - z);
    w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

inline double integrate01(const std::function<double(double)>& f, int n = 40) {
  const auto [x, w] = gauss_legendre(n);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += w[i] * f(x[i]);
  return s;
}

// int_0^1 V(x + (y - x) s) ds for V(p) = (|p|^2 - 2) / 2, in closed form.
inline double ou_chord_average(double x1, double x2, double y1, double y2) {
  // |x + s d|^2 integrated: |x|^2 + <x,d> + |d|^2 / 3.
  const double d1 = y1 - x1, d2 = y2 - x2;
  const double mean_sq = x1 * x1 + x2 * x2 + (x1 * d1 + x2 * d2) + (d1 * d1 + d2 * d2) / 3.0;
  return 0.5 * (mean_sq - 2.0);
}

inline double brownian_density(double x1, double x2, double t, double y1, double y2) {
  const double r2 = (y1 - x1) * (y1 - x1) + (y2 - x2) * (y2 - x2);
  return std::exp(-r2 / (2.0 * t)) / (2.0 * std::numbers::pi * t);
}

inline double ou_density(double x1, double x2, double t, double y1, double y2, double theta) {
  const double s2 = (1.0 - std::exp(-2.0 * theta * t)) / (2.0 * theta);
  const double m = std::exp(-theta * t);
  const double r2 = (y1 - m * x1) * (y1 - m * x1) + (y2 - m * x2) * (y2 - m * x2);
  return std::exp(-r2 / (2.0 * s2)) / (2.0 * std::numbers::pi * s2);
}

// 1/I0(sqrt(2 kappa)): solution of 1/2 Lap u = kappa u on the unit disc, u = 1 on the
// circle, evaluated at the centre. I0 by its power series.
inline double disc_center_schrodinger(double kappa) {
  const double z = std::sqrt(2.0 * kappa);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    term *= (z * z / 4.0) / (static_cast<double>(k) * k);
    sum += term;
  }
  return 1.0 / sum;
}

}  // namespace oracle
