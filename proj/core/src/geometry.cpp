#include "driftscope/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

#include "driftscope/error.hpp"

namespace driftscope {

double SymMat2::min_eigenvalue() const {
  const double mean = 0.5 * (a11 + a22);
  const double half_gap = std::hypot(0.5 * (a11 - a22), a12);
  return mean - half_gap;
}

SymMat2 SymMat2::inverse() const {
  const double d = det();
  if (d == 0.0) throw DomainError("SymMat2::inverse: singular matrix");
  return {a22 / d, -a12 / d, a11 / d};
}

SymMat2 SymMat2::sqrt() const {
  // For 2x2 SPD: sqrt(A) = (A + s I) / t with s = sqrt(det A), t = sqrt(tr A + 2 s).
  const double d = det();
  if (a11 < 0.0 || a22 < 0.0 || d < 0.0) throw DomainError("SymMat2::sqrt: matrix is not positive semi-definite");
  const double s = std::sqrt(d);
  const double t = std::sqrt(a11 + a22 + 2.0 * s);
  if (t == 0.0) return {0.0, 0.0, 0.0};
  return {(a11 + s) / t, a12 / t, (a22 + s) / t};
}

Shape::Shape(Disc d) : kind_(d) {
  if (!(d.radius > 0.0)) throw GeometryError("disc radius must be positive");
}

Shape::Shape(Rectangle r) : kind_(r) {
  if (!(r.upper.x > r.lower.x && r.upper.y > r.lower.y))
    throw GeometryError("rectangle corners must satisfy lower < upper componentwise");
}

double Shape::signed_distance(Vec2 p) const {
  if (const auto* d = disc()) return norm(p - d->center) - d->radius;
  const auto& r = *rectangle();
  const Vec2 c = 0.5 * (r.lower + r.upper);
  const Vec2 half = 0.5 * (r.upper - r.lower);
  const Vec2 q{std::abs(p.x - c.x) - half.x, std::abs(p.y - c.y) - half.y};
  const Vec2 outside{std::max(q.x, 0.0), std::max(q.y, 0.0)};
  return norm(outside) + std::min(std::max(q.x, q.y), 0.0);
}

std::optional<LineHit> Shape::intersect_line(Vec2 origin, Vec2 dir) const {
  if (const auto* d = disc()) {
    const Vec2 oc = origin - d->center;
    const double a = norm2(dir);
    const double b = dot(oc, dir);
    const double c = norm2(oc) - d->radius * d->radius;
    const double disc = b * b - a * c;
    if (a == 0.0 || disc < 0.0) return std::nullopt;
    const double root = std::sqrt(disc);
    // Stable quadratic roots.
    const double q = -(b + std::copysign(root, b));
    double s0 = q / a;
    double s1 = (q != 0.0) ? c / q : -s0;
    if (s0 > s1) std::swap(s0, s1);
    return LineHit{s0, s1};
  }
  const auto& r = *rectangle();
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  const double o[2] = {origin.x, origin.y};
  const double v[2] = {dir.x, dir.y};
  const double mn[2] = {r.lower.x, r.lower.y};
  const double mx[2] = {r.upper.x, r.upper.y};
  for (int k = 0; k < 2; ++k) {
    if (v[k] == 0.0) {
      if (o[k] < mn[k] || o[k] > mx[k]) return std::nullopt;
      continue;
    }
    double t0 = (mn[k] - o[k]) / v[k];
    double t1 = (mx[k] - o[k]) / v[k];
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
  }
  if (lo > hi) return std::nullopt;
  return LineHit{lo, hi};
}

Vec2 Shape::center() const {
  if (const auto* d = disc()) return d->center;
  const auto& r = *rectangle();
  return 0.5 * (r.lower + r.upper);
}

double Shape::circumradius() const {
  if (const auto* d = disc()) return d->radius;
  const auto& r = *rectangle();
  return 0.5 * norm(r.upper - r.lower);
}

double Shape::perimeter() const {
  if (const auto* d = disc()) return 2.0 * std::numbers::pi * d->radius;
  const auto& r = *rectangle();
  return 2.0 * ((r.upper.x - r.lower.x) + (r.upper.y - r.lower.y));
}

Vec2 Shape::box_lower() const {
  if (const auto* d = disc()) return d->center - Vec2{d->radius, d->radius};
  return rectangle()->lower;
}

Vec2 Shape::box_upper() const {
  if (const auto* d = disc()) return d->center + Vec2{d->radius, d->radius};
  return rectangle()->upper;
}

Vec2 Shape::project_to_boundary(Vec2 p) const {
  if (const auto* d = disc()) {
    const Vec2 v = p - d->center;
    const double len = norm(v);
    if (len == 0.0) return d->center + Vec2{d->radius, 0.0};
    return d->center + (d->radius / len) * v;
  }
  const auto& r = *rectangle();
  if (!contains(p)) {
    return {std::clamp(p.x, r.lower.x, r.upper.x), std::clamp(p.y, r.lower.y, r.upper.y)};
  }
  const double dl = p.x - r.lower.x;
  const double dr = r.upper.x - p.x;
  const double db = p.y - r.lower.y;
  const double dt = r.upper.y - p.y;
  const double m = std::min({dl, dr, db, dt});
  if (m == dl) return {r.lower.x, p.y};
  if (m == dr) return {r.upper.x, p.y};
  if (m == db) return {p.x, r.lower.y};
  return {p.x, r.upper.y};
}

double Shape::boundary_param(Vec2 p) const {
  const Vec2 b = project_to_boundary(p);
  if (const auto* d = disc()) {
    double ang = std::atan2(b.y - d->center.y, b.x - d->center.x);
    if (ang < 0.0) ang += 2.0 * std::numbers::pi;
    double s = ang * d->radius;
    return s >= perimeter() ? 0.0 : s;
  }
  const auto& r = *rectangle();
  const double w = r.upper.x - r.lower.x;
  const double h = r.upper.y - r.lower.y;
  // Pick the edge the projected point lies on; ties resolve in traversal order.
  const double eps = 1e-12 * (w + h);
  if (std::abs(b.y - r.lower.y) <= eps && b.x < r.upper.x - eps) return b.x - r.lower.x;
  if (std::abs(b.x - r.upper.x) <= eps && b.y < r.upper.y - eps) return w + (b.y - r.lower.y);
  if (std::abs(b.y - r.upper.y) <= eps && b.x > r.lower.x + eps) return w + h + (r.upper.x - b.x);
  double s = 2.0 * w + h + (r.upper.y - b.y);
  return s >= perimeter() ? 0.0 : s;
}

Vec2 Shape::boundary_point(double s) const {
  const double per = perimeter();
  s = std::fmod(s, per);
  if (s < 0.0) s += per;
  if (const auto* d = disc()) {
    const double ang = s / d->radius;
    return d->center + d->radius * Vec2{std::cos(ang), std::sin(ang)};
  }
  const auto& r = *rectangle();
  const double w = r.upper.x - r.lower.x;
  const double h = r.upper.y - r.lower.y;
  if (s < w) return {r.lower.x + s, r.lower.y};
  s -= w;
  if (s < h) return {r.upper.x, r.lower.y + s};
  s -= h;
  if (s < w) return {r.upper.x - s, r.upper.y};
  s -= w;
  return {r.lower.x, r.upper.y - s};
}

Shape Shape::scaled(double factor) const {
  if (!(factor > 0.0)) throw GeometryError("scale factor must be positive");
  if (const auto* d = disc()) return Disc{d->center, factor * d->radius};
  const auto& r = *rectangle();
  const Vec2 c = center();
  return Rectangle{c + factor * (r.lower - c), c + factor * (r.upper - c)};
}

}  // namespace driftscope
