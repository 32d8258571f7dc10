#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "driftscope/geometry.hpp"

namespace driftscope {

// Uniform rectangular grid. Node (i, j) sits at (x0 + i*dx, y0 + j*dy) and has the
// row-major index j*nx + i.
class Grid {
 public:
  Grid(double x0, double y0, double dx, double dy, std::size_t nx, std::size_t ny);

  // Square-cell grid with n x n nodes covering [lower, upper].
  static Grid covering(Vec2 lower, Vec2 upper, std::size_t nx, std::size_t ny);

  double x0() const { return x0_; }
  double y0() const { return y0_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return nx_ * ny_; }

  std::size_t index(std::size_t i, std::size_t j) const { return j * nx_ + i; }
  Vec2 node(std::size_t i, std::size_t j) const {
    return {x0_ + static_cast<double>(i) * dx_, y0_ + static_cast<double>(j) * dy_};
  }
  Vec2 node(std::size_t k) const { return node(k % nx_, k / nx_); }

  double x_max() const { return x0_ + static_cast<double>(nx_ - 1) * dx_; }
  double y_max() const { return y0_ + static_cast<double>(ny_ - 1) * dy_; }
  bool contains(Vec2 p) const;
  double cell_area() const { return dx_ * dy_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double x0_, y0_, dx_, dy_;
  std::size_t nx_, ny_;
};

// Immutable grid-sampled real function.
class ScalarField {
 public:
  ScalarField(Grid grid, std::vector<double> values);
  static ScalarField zeros(const Grid& grid);

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  double at(std::size_t i, std::size_t j) const { return values_[grid_.index(i, j)]; }

 private:
  Grid grid_;
  std::vector<double> values_;
};

class VectorField {
 public:
  VectorField(Grid grid, std::vector<Vec2> values);
  static VectorField zeros(const Grid& grid);

  const Grid& grid() const { return grid_; }
  std::span<const Vec2> values() const { return values_; }
  Vec2 operator[](std::size_t k) const { return values_[k]; }
  Vec2 at(std::size_t i, std::size_t j) const { return values_[grid_.index(i, j)]; }

  ScalarField component(int axis) const;

 private:
  Grid grid_;
  std::vector<Vec2> values_;
};

// Symmetric positive-definite matrix field; the ellipticity constant delta is the
// smallest eigenvalue over all nodes and is computed at construction.
class DiffusionField {
 public:
  DiffusionField(Grid grid, std::vector<SymMat2> values);
  static DiffusionField constant(const Grid& grid, SymMat2 a);

  const Grid& grid() const { return grid_; }
  std::span<const SymMat2> values() const { return values_; }
  SymMat2 operator[](std::size_t k) const { return values_[k]; }
  double delta() const { return delta_; }
  bool is_constant() const { return constant_; }

 private:
  Grid grid_;
  std::vector<SymMat2> values_;
  double delta_ = 0.0;
  bool constant_ = false;
};

enum class NodeClass : std::uint8_t { interior, boundary_adjacent, exterior };

// A domain together with the grid that discretizes it.
class DomainSpec {
 public:
  DomainSpec(Shape shape, Grid grid);

  const Shape& shape() const { return shape_; }
  const Grid& grid() const { return grid_; }

  // interior: strictly inside with all four axis neighbours strictly inside;
  // boundary_adjacent: strictly inside with at least one neighbour not strictly inside;
  // exterior: everything else (including nodes on the boundary).
  NodeClass classify(std::size_t i, std::size_t j) const;
  std::vector<NodeClass> classify_all() const;
  // True for interior and boundary_adjacent nodes.
  bool inside(std::size_t k) const;

  // Tolerance below which a node counts as lying on the boundary.
  double boundary_tolerance() const;

 private:
  Shape shape_;
  Grid grid_;
};

using ScalarFn = std::function<double(Vec2)>;

ScalarField sample_scalar(const ScalarFn& f, const Grid& grid);

// Bilinear interpolation; exact on nodes and for affine fields. Throws OutOfBoundsError
// outside the grid extent.
double interp(const ScalarField& field, Vec2 p);

// Central differences inside, second-order one-sided stencils on the edges. Needs nx, ny >= 3.
VectorField gradient(const ScalarField& field);

// Five-point stencil; the outermost ring has no stencil and is set to 0.
ScalarField laplacian(const ScalarField& field);

// V = 1/2 tr(a D^2 psi) + <b, grad psi> + 1/2 <a grad psi, grad psi>.
// Uses the same stencils as gradient() and laplacian(); outermost ring is set to 0.
ScalarField potential_from_psi(const ScalarField& psi, const DiffusionField& a, const VectorField& b);

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);

}  // namespace driftscope
