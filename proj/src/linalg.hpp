#pragma once

#include <cstddef>
#include <vector>

#include "errors.hpp"

// Dense symmetric linear algebra used by the discriminant machinery.
// Everything is plain row-major double storage; dimensions stay small
// (the covariate subsets are O(sqrt(d))), so simple cubic algorithms
// beat the constant factors of a heavyweight dependency.

namespace bopnn::linalg {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  // Contiguous row access for hot loops.
  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix transpose(const Matrix& a);
Matrix matmul(const Matrix& a, const Matrix& b);
std::vector<double> matvec(const Matrix& a, const std::vector<double>& x);

// Symmetric matrix with exact entry symmetry, enforced on construction.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

  // Symmetrizes by averaging mirrored entries.
  static SymMatrix from_dense(const Matrix& a);

  std::size_t dim() const { return dim_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }

  // Writes both (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double v) {
    data_[i * dim_ + j] = v;
    data_[j * dim_ + i] = v;
  }
  void add(std::size_t i, std::size_t j, double v) {
    data_[i * dim_ + j] += v;
    if (i != j) data_[j * dim_ + i] += v;
  }
  void scale(double s) {
    for (double& v : data_) v *= s;
  }

  double frobenius_norm() const;
  double trace() const;

  const std::vector<double>& data() const { return data_; }

  bool operator==(const SymMatrix& other) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

// Eigenvalues sorted non-increasing (ties keep their pre-sort order) with
// unit-norm vector columns. The entry of largest magnitude in each column
// is made positive, ties broken toward the lowest index, so decompositions
// serialize deterministically.
struct EigenBasis {
  std::vector<double> values;
  Matrix vectors;  // dim x m, column i pairs with values[i]
};

// Lower-triangular L with L*L^T = s. Throws kNotPositiveDefinite on any
// nonpositive pivot; callers that expect near-singular inputs retry with a
// ridge (see subspace::discriminant_basis).
Matrix cholesky(const SymMatrix& s);

// Cyclic Jacobi sweeps. Converged when the off-diagonal Frobenius norm
// drops below 1e-12 times the input norm; capped at 100 sweeps.
EigenBasis sym_eigen(const SymMatrix& s);

// Eigenpairs of (b + ridge*I)^-1 * a through the Cholesky reduction
// L^-1 a L^-T, mapped back as u = L^-T w and renormalized to unit length.
// Negative eigenvalues are clamped to zero.
EigenBasis generalized_eigen(const SymMatrix& a, const SymMatrix& b, double ridge);

// Top m_out principal directions of the column-mean-centered covariance
// of x (divisor n-1). Throws kDegenerateInput when fewer than two rows.
EigenBasis pca_basis(const Matrix& x, std::size_t m_out);

}  // namespace bopnn::linalg
