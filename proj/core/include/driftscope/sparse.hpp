#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace driftscope {

// Compressed sparse row matrix, built row by row.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  explicit CsrMatrix(std::size_t n_cols);

  // Appends a row; duplicate column indices are summed.
  void push_row(std::span<const std::size_t> cols, std::span<const double> vals);

  std::size_t rows() const { return row_ptr_.size() - 1; }
  std::size_t cols() const { return n_cols_; }
  std::size_t nonzeros() const { return values_.size(); }

  std::span<const std::size_t> row_cols(std::size_t r) const;
  std::span<const double> row_values(std::size_t r) const;

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> diagonal() const;
  // Exact (bitwise) symmetry of values.
  bool is_symmetric() const;
  double at(std::size_t r, std::size_t c) const;

 private:
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

struct KrylovResult {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  bool breakdown = false;
};

// Jacobi-preconditioned conjugate gradients for symmetric positive-definite operators.
// x holds the initial guess on entry and the iterate on exit.
KrylovResult conjugate_gradient(const LinearOperator& a, std::span<const double> diag, std::span<const double> b,
                                std::span<double> x, double tol, std::size_t max_iter);

// Jacobi-preconditioned BiCGStab (right preconditioning).
KrylovResult bicgstab(const LinearOperator& a, std::span<const double> diag, std::span<const double> b,
                      std::span<double> x, double tol, std::size_t max_iter);

// Smallest real part among the Ritz values of a k-step Arnoldi process started from a
// fixed deterministic vector. A cheap nondegeneracy diagnostic, not an eigen-solver.
double smallest_ritz_value(const LinearOperator& a, std::size_t n, std::size_t k = 30);

}  // namespace driftscope
