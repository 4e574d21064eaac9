#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bopnn::linalg {

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) fail(ErrorCode::kInvalidArgument, "matmul shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = ai[k];
      if (aik == 0.0) continue;
      const double* bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
  if (a.cols() != x.size()) fail(ErrorCode::kInvalidArgument, "matvec shape mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) acc += ai[j] * x[j];
    y[i] = acc;
  }
  return y;
}

SymMatrix SymMatrix::from_dense(const Matrix& a) {
  if (a.rows() != a.cols()) fail(ErrorCode::kInvalidArgument, "from_dense needs a square matrix");
  SymMatrix s(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j) s.set(i, j, 0.5 * (a(i, j) + a(j, i)));
  return s;
}

double SymMatrix::frobenius_norm() const {
  double sum = 0.0;
  for (double v : data_) sum += v * v;
  return std::sqrt(sum);
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += data_[i * dim_ + i];
  return t;
}

Matrix cholesky(const SymMatrix& s) {
  const std::size_t n = s.dim();
  if (n == 0) fail(ErrorCode::kInvalidArgument, "cholesky of empty matrix");
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = s(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= 0.0) fail(ErrorCode::kNotPositiveDefinite, "nonpositive pivot in cholesky");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }
  return l;
}

namespace {

double off_diagonal_norm(const std::vector<double>& a, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) sum += 2.0 * a[i * n + j] * a[i * n + j];
  return std::sqrt(sum);
}

// Flip columns so the entry of largest magnitude is positive; ties go to
// the lowest index.
void canonicalize_signs(Matrix& v) {
  for (std::size_t j = 0; j < v.cols(); ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < v.rows(); ++i) {
      const double mag = std::abs(v(i, j));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (v(arg, j) < 0.0)
      for (std::size_t i = 0; i < v.rows(); ++i) v(i, j) = -v(i, j);
  }
}

// Solves L * X = B for X with L lower-triangular; B is consumed in place.
void forward_solve_in_place(const Matrix& l, Matrix& b) {
  const std::size_t n = l.rows();
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = b(i, j);
      const double* li = l.row(i);
      for (std::size_t k = 0; k < i; ++k) v -= li[k] * b(k, j);
      b(i, j) = v / li[i];
    }
  }
}

// Solves L^T * x = w in place.
void back_solve_transposed(const Matrix& l, std::vector<double>& w) {
  const std::size_t n = l.rows();
  for (std::size_t ii = n; ii > 0; --ii) {
    const std::size_t i = ii - 1;
    double v = w[i];
    for (std::size_t k = i + 1; k < n; ++k) v -= l(k, i) * w[k];
    w[i] = v / l(i, i);
  }
}

}  // namespace

EigenBasis sym_eigen(const SymMatrix& s) {
  const std::size_t n = s.dim();
  if (n == 0) fail(ErrorCode::kInvalidArgument, "sym_eigen of empty matrix");
  std::vector<double> a = s.data();
  Matrix v = Matrix::identity(n);
  const double norm = s.frobenius_norm();
  const double threshold = 1e-12 * norm;

  if (norm > 0.0 && n > 1) {
    constexpr int kMaxSweeps = 100;
    bool converged = off_diagonal_norm(a, n) <= threshold;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
      for (std::size_t p = 0; p < n - 1; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
          const double apq = a[p * n + q];
          if (apq == 0.0) continue;
          const double tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
          double t;
          if (std::abs(tau) > 1e150) {
            t = 1.0 / (2.0 * tau);  // avoids overflow in tau*tau
          } else {
            t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(tau * tau + 1.0));
          }
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double sn = t * c;

          const double app = a[p * n + p];
          const double aqq = a[q * n + q];
          a[p * n + p] = app - t * apq;
          a[q * n + q] = aqq + t * apq;
          a[p * n + q] = 0.0;
          a[q * n + p] = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            if (i == p || i == q) continue;
            const double aip = a[i * n + p];
            const double aiq = a[i * n + q];
            a[i * n + p] = c * aip - sn * aiq;
            a[p * n + i] = a[i * n + p];
            a[i * n + q] = sn * aip + c * aiq;
            a[q * n + i] = a[i * n + q];
          }
          for (std::size_t i = 0; i < n; ++i) {
            const double vip = v(i, p);
            const double viq = v(i, q);
            v(i, p) = c * vip - sn * viq;
            v(i, q) = sn * vip + c * viq;
          }
        }
      }
      converged = off_diagonal_norm(a, n) <= threshold;
    }
    if (!converged)
      fail(ErrorCode::kConvergenceFailure, "jacobi sweeps exhausted without convergence");
  }

  // Non-increasing eigenvalue order; stable sort keeps the original index
  // order on ties.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x * n + x] > a[y * n + y]; });

  EigenBasis basis;
  basis.values.resize(n);
  basis.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    basis.values[j] = a[order[j] * n + order[j]];
    for (std::size_t i = 0; i < n; ++i) basis.vectors(i, j) = v(i, order[j]);
  }
  canonicalize_signs(basis.vectors);
  return basis;
}

EigenBasis generalized_eigen(const SymMatrix& a, const SymMatrix& b, double ridge) {
  if (a.dim() != b.dim()) fail(ErrorCode::kInvalidArgument, "generalized_eigen dim mismatch");
  const std::size_t n = a.dim();

  SymMatrix br = b;
  if (ridge != 0.0)
    for (std::size_t i = 0; i < n; ++i) br.set(i, i, b(i, i) + ridge);
  const Matrix l = cholesky(br);

  // C = L^-1 A L^-T, computed as two triangular solves.
  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) w(i, j) = a(i, j);
  forward_solve_in_place(l, w);      // W = L^-1 A
  Matrix wt = transpose(w);
  forward_solve_in_place(l, wt);     // L^-1 A^T L^-T = C^T
  const SymMatrix c = SymMatrix::from_dense(wt);

  EigenBasis reduced = sym_eigen(c);

  EigenBasis out;
  out.values = std::move(reduced.values);
  out.vectors = Matrix(n, n);
  std::vector<double> u(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) u[i] = reduced.vectors(i, j);
    back_solve_transposed(l, u);
    double nrm = 0.0;
    for (double x : u) nrm += x * x;
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = u[i] / nrm;
  }
  canonicalize_signs(out.vectors);
  for (double& val : out.values)
    if (val < 0.0) val = 0.0;
  return out;
}

EigenBasis pca_basis(const Matrix& x, std::size_t m_out) {
  const std::size_t n = x.rows();
  const std::size_t m = x.cols();
  if (n < 2) fail(ErrorCode::kDegenerateInput, "pca_basis needs at least two points");
  if (m_out > m) fail(ErrorCode::kInvalidArgument, "pca_basis output dim exceeds input dim");

  std::vector<double> mean(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x.row(i);
    for (std::size_t j = 0; j < m; ++j) mean[j] += xi[j];
  }
  for (double& v : mean) v /= static_cast<double>(n);

  SymMatrix cov(m);
  std::vector<double> centered(m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x.row(i);
    for (std::size_t j = 0; j < m; ++j) centered[j] = xi[j] - mean[j];
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = j; k < m; ++k) cov.add(j, k, centered[j] * centered[k]);
  }
  cov.scale(1.0 / static_cast<double>(n - 1));

  EigenBasis full = sym_eigen(cov);
  if (m_out == m) return full;

  EigenBasis top;
  top.values.assign(full.values.begin(), full.values.begin() + static_cast<long>(m_out));
  top.vectors = Matrix(m, m_out);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m_out; ++j) top.vectors(i, j) = full.vectors(i, j);
  return top;
}

}  // namespace bopnn::linalg
