#include "driftscope/sparse.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "driftscope/error.hpp"

namespace driftscope {

namespace {

double dotp(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dotp(a, a)); }

}  // namespace

CsrMatrix::CsrMatrix(std::size_t n_cols) : n_cols_(n_cols) {}

void CsrMatrix::push_row(std::span<const std::size_t> cols, std::span<const double> vals) {
  std::vector<std::size_t> order(cols.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cols[a] < cols[b]; });
  const std::size_t start = col_idx_.size();
  for (std::size_t o : order) {
    if (cols[o] >= n_cols_) throw DomainError("CsrMatrix: column index out of range");
    if (col_idx_.size() > start && col_idx_.back() == cols[o]) {
      values_.back() += vals[o];
    } else {
      col_idx_.push_back(cols[o]);
      values_.push_back(vals[o]);
    }
  }
  row_ptr_.push_back(col_idx_.size());
}

std::span<const std::size_t> CsrMatrix::row_cols(std::size_t r) const {
  return std::span(col_idx_).subspan(row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]);
}

std::span<const double> CsrMatrix::row_values(std::size_t r) const {
  return std::span(values_).subspan(row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]);
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t r = 0; r < rows(); ++r) {
    double s = 0.0;
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) s += values_[p] * x[col_idx_[p]];
    y[r] = s;
  }
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(rows(), 0.0);
  for (std::size_t r = 0; r < rows(); ++r) d[r] = at(r, r);
  return d;
}

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  const auto cs = row_cols(r);
  const auto it = std::lower_bound(cs.begin(), cs.end(), c);
  if (it == cs.end() || *it != c) return 0.0;
  return row_values(r)[static_cast<std::size_t>(it - cs.begin())];
}

bool CsrMatrix::is_symmetric() const {
  if (rows() != n_cols_) return false;
  for (std::size_t r = 0; r < rows(); ++r) {
    const auto cs = row_cols(r);
    const auto vs = row_values(r);
    for (std::size_t p = 0; p < cs.size(); ++p) {
      if (at(cs[p], r) != vs[p]) return false;
    }
  }
  return true;
}

KrylovResult conjugate_gradient(const LinearOperator& a, std::span<const double> diag, std::span<const double> b,
                                std::span<double> x, double tol, std::size_t max_iter) {
  const std::size_t n = b.size();
  std::vector<double> r(n), z(n), p(n), q(n);
  a(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  const double bnorm = std::max(norm2(b), std::numeric_limits<double>::min());
  KrylovResult res;
  res.relative_residual = norm2(r) / bnorm;
  if (res.relative_residual <= tol) {
    res.converged = true;
    return res;
  }
  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  p = z;
  double rz = dotp(r, z);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    a(p, q);
    const double pq = dotp(p, q);
    if (pq == 0.0 || !std::isfinite(pq)) {
      res.breakdown = true;
      res.iterations = it;
      return res;
    }
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    res.iterations = it;
    res.relative_residual = norm2(r) / bnorm;
    if (res.relative_residual <= tol) {
      res.converged = true;
      return res;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    const double rz_new = dotp(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return res;
}

KrylovResult bicgstab(const LinearOperator& a, std::span<const double> diag, std::span<const double> b,
                      std::span<double> x, double tol, std::size_t max_iter) {
  const std::size_t n = b.size();
  std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), s(n), t(n), ph(n), sh(n);
  a(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  const double bnorm = std::max(norm2(b), std::numeric_limits<double>::min());
  KrylovResult res;
  res.relative_residual = norm2(r) / bnorm;
  if (res.relative_residual <= tol) {
    res.converged = true;
    return res;
  }
  r0 = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const double rho_new = dotp(r0, r);
    if (rho_new == 0.0 || omega == 0.0) {
      res.breakdown = true;
      res.iterations = it;
      return res;
    }
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    for (std::size_t i = 0; i < n; ++i) ph[i] = p[i] / diag[i];
    a(ph, v);
    const double r0v = dotp(r0, v);
    if (r0v == 0.0 || !std::isfinite(r0v)) {
      res.breakdown = true;
      res.iterations = it;
      return res;
    }
    alpha = rho / r0v;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    res.iterations = it;
    const double snorm = norm2(s) / bnorm;
    if (snorm <= tol) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * ph[i];
      res.relative_residual = snorm;
      res.converged = true;
      return res;
    }
    for (std::size_t i = 0; i < n; ++i) sh[i] = s[i] / diag[i];
    a(sh, t);
    const double tt = dotp(t, t);
    if (tt == 0.0) {
      res.breakdown = true;
      return res;
    }
    omega = dotp(t, s) / tt;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * ph[i] + omega * sh[i];
      r[i] = s[i] - omega * t[i];
    }
    res.relative_residual = norm2(r) / bnorm;
    if (!std::isfinite(res.relative_residual)) {
      res.breakdown = true;
      return res;
    }
    if (res.relative_residual <= tol) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

double smallest_ritz_value(const LinearOperator& a, std::size_t n, std::size_t k) {
  k = std::min(k, n);
  if (k == 0) return 0.0;
  std::vector<std::vector<double>> basis;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(k));
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = 1.0 + 0.5 * std::sin(static_cast<double>(i));
  const double qn = norm2(q);
  for (auto& v : q) v /= qn;
  basis.push_back(q);
  std::size_t m = k;
  std::vector<double> w(n);
  for (std::size_t j = 0; j < k; ++j) {
    a(basis[j], w);
    for (std::size_t i = 0; i <= j; ++i) {
      const double hij = dotp(basis[i], w);
      h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = hij;
      for (std::size_t l = 0; l < n; ++l) w[l] -= hij * basis[i][l];
    }
    const double wn = norm2(w);
    h(static_cast<Eigen::Index>(j + 1), static_cast<Eigen::Index>(j)) = wn;
    if (wn < 1e-14) {
      m = j + 1;
      break;
    }
    for (auto& v : w) v /= wn;
    basis.push_back(w);
  }
  const Eigen::MatrixXd hm = h.topLeftCorner(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  Eigen::EigenSolver<Eigen::MatrixXd> es(hm, false);
  return es.eigenvalues().real().minCoeff();
}

}  // namespace driftscope
