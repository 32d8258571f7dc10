#pragma once

#include <cmath>
#include <optional>
#include <variant>

namespace driftscope {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
constexpr double norm2(Vec2 a) { return dot(a, a); }
// Counter-clockwise rotation by 90 degrees.
constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

// Symmetric 2x2 matrix [[a11, a12], [a12, a22]].
struct SymMat2 {
  double a11 = 1.0;
  double a12 = 0.0;
  double a22 = 1.0;

  static constexpr SymMat2 identity() { return {1.0, 0.0, 1.0}; }
  static constexpr SymMat2 scalar(double s) { return {s, 0.0, s}; }

  constexpr double det() const { return a11 * a22 - a12 * a12; }
  constexpr double trace() const { return a11 + a22; }
  constexpr Vec2 apply(Vec2 v) const { return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y}; }
  constexpr bool positive_definite() const { return a11 > 0.0 && det() > 0.0; }

  double min_eigenvalue() const;
  SymMat2 inverse() const;
  // Principal square root; requires positive semi-definiteness.
  SymMat2 sqrt() const;

  friend constexpr bool operator==(const SymMat2&, const SymMat2&) = default;
};

// Parameter interval [enter, exit] of a line origin + s*dir inside a shape.
struct LineHit {
  double enter = 0.0;
  double exit = 0.0;
};

struct Disc {
  Vec2 center{};
  double radius = 1.0;
};

struct Rectangle {
  Vec2 lower{};
  Vec2 upper{};
};

// A bounded convex domain: disc or axis-aligned rectangle.
class Shape {
 public:
  Shape(Disc d);
  Shape(Rectangle r);

  bool is_disc() const { return std::holds_alternative<Disc>(kind_); }
  const Disc* disc() const { return std::get_if<Disc>(&kind_); }
  const Rectangle* rectangle() const { return std::get_if<Rectangle>(&kind_); }

  // Negative inside, zero on the boundary, positive outside.
  double signed_distance(Vec2 p) const;
  bool contains(Vec2 p) const { return signed_distance(p) < 0.0; }

  // Intersection of the full line origin + s*dir (dir need not be unit) with the closed shape.
  std::optional<LineHit> intersect_line(Vec2 origin, Vec2 dir) const;

  Vec2 center() const;
  // Radius of the smallest disc about center() that contains the shape.
  double circumradius() const;
  double perimeter() const;
  // Lower-left and upper-right corners of the bounding box.
  Vec2 box_lower() const;
  Vec2 box_upper() const;

  // Nearest point on the boundary.
  Vec2 project_to_boundary(Vec2 p) const;
  // Boundary arclength parameter in [0, perimeter) of the boundary point nearest to p.
  // Disc: counter-clockwise from angle 0. Rectangle: counter-clockwise from the lower-left corner.
  double boundary_param(Vec2 p) const;
  Vec2 boundary_point(double s) const;

  // Homothety about the center.
  Shape scaled(double factor) const;

 private:
  std::variant<Disc, Rectangle> kind_;
};

}  // namespace driftscope
