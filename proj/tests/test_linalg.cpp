#include <doctest.h>

#include <cmath>

#include "linalg.hpp"
#include "testutil.hpp"

using bopnn::Error;
using bopnn::ErrorCode;
using namespace bopnn::linalg;

namespace {

SymMatrix sym2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m(0, 0) = a;
  m(0, 1) = b;
  m(1, 0) = c;
  m(1, 1) = d;
  return SymMatrix::from_dense(m);
}

SymMatrix diag(std::vector<double> vals) {
  SymMatrix s(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) s.set(i, i, vals[i]);
  return s;
}

Matrix to_dense(const SymMatrix& s) {
  Matrix m(s.dim(), s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i)
    for (std::size_t j = 0; j < s.dim(); ++j) m(i, j) = s(i, j);
  return m;
}

double reconstruction_error(const SymMatrix& s, const Matrix& l) {
  const std::size_t n = s.dim();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += l(i, k) * l(j, k);
      worst = std::max(worst, std::abs(acc - s(i, j)));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("cholesky of the identity is the identity") {
  const SymMatrix s = diag({1, 1, 1});
  const Matrix l = cholesky(s);
  CHECK(l == Matrix::identity(3));
}

TEST_CASE("cholesky hand case [[4,2],[2,5]]") {
  const Matrix l = cholesky(sym2(4, 2, 2, 5));
  CHECK(l(0, 0) == doctest::Approx(2.0));
  CHECK(l(0, 1) == 0.0);
  CHECK(l(1, 0) == doctest::Approx(1.0));
  CHECK(l(1, 1) == doctest::Approx(2.0));
}

TEST_CASE("cholesky rejects an indefinite matrix") {
  CHECK_THROWS_WITH_AS(cholesky(sym2(1, 2, 2, 1)), doctest::Contains("pivot"), Error);
  try {
    cholesky(sym2(1, 2, 2, 1));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotPositiveDefinite);
  }
}

TEST_CASE("cholesky round-trips 100 random PD matrices") {
  testutil::Rand rnd(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = static_cast<std::size_t>(rnd.uniform_int(1, 30));
    const SymMatrix s = testutil::random_psd(rnd, dim, 0.2);
    const Matrix l = cholesky(s);
    CHECK(reconstruction_error(s, l) <= 1e-10 * s.frobenius_norm());
  }
}

TEST_CASE("sym_eigen on a diagonal matrix") {
  const EigenBasis e = sym_eigen(diag({4, 1}));
  CHECK(e.values[0] == doctest::Approx(4.0));
  CHECK(e.values[1] == doctest::Approx(1.0));
  CHECK(e.vectors(0, 0) == doctest::Approx(1.0));
  CHECK(e.vectors(1, 0) == doctest::Approx(0.0));
  CHECK(e.vectors(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("sym_eigen hand case [[2,1],[1,2]]") {
  const EigenBasis e = sym_eigen(sym2(2, 1, 1, 2));
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(e.values[0] == doctest::Approx(3.0));
  CHECK(e.values[1] == doctest::Approx(1.0));
  CHECK(e.vectors(0, 0) == doctest::Approx(s));
  CHECK(e.vectors(1, 0) == doctest::Approx(s));
  CHECK(e.vectors(0, 1) == doctest::Approx(s));
  CHECK(e.vectors(1, 1) == doctest::Approx(-s));
}

TEST_CASE("sym_eigen of the zero matrix") {
  const EigenBasis e = sym_eigen(SymMatrix(3));
  for (double v : e.values) CHECK(v == 0.0);
  CHECK(e.vectors == Matrix::identity(3));
}

TEST_CASE("sym_eigen residuals and orthonormality on random matrices") {
  testutil::Rand rnd(12);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t dim = static_cast<std::size_t>(rnd.uniform_int(2, 25));
    const SymMatrix s = testutil::random_psd(rnd, dim, -0.05);  // indefinite allowed
    const EigenBasis e = sym_eigen(s);
    const double norm = s.frobenius_norm();
    for (std::size_t j = 0; j < dim; ++j) {
      if (j + 1 < dim) CHECK(e.values[j] >= e.values[j + 1]);
      double residual = 0.0;
      double unit = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        double av = 0.0;
        for (std::size_t k = 0; k < dim; ++k) av += s(i, k) * e.vectors(k, j);
        residual = std::max(residual, std::abs(av - e.values[j] * e.vectors(i, j)));
        unit += e.vectors(i, j) * e.vectors(i, j);
      }
      CHECK(residual <= 1e-10 * norm);
      CHECK(std::abs(std::sqrt(unit) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("generalized_eigen with identity B matches sym_eigen") {
  testutil::Rand rnd(13);
  const SymMatrix a = testutil::random_psd(rnd, 8, 0.0);
  const SymMatrix b = diag(std::vector<double>(8, 1.0));
  const EigenBasis plain = sym_eigen(a);
  const EigenBasis gen = generalized_eigen(a, b, 0.0);
  for (std::size_t i = 0; i < 8; ++i)
    CHECK(std::abs(gen.values[i] - plain.values[i]) <= 1e-10 * (1.0 + std::abs(plain.values[i])));
}

TEST_CASE("generalized_eigen diagonal ratio case") {
  const EigenBasis e = generalized_eigen(diag({8, 1}), diag({4, 1}), 0.0);
  CHECK(e.values[0] == doctest::Approx(2.0));
  CHECK(e.values[1] == doctest::Approx(1.0));
  CHECK(std::abs(e.vectors(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(e.vectors(1, 1)) == doctest::Approx(1.0));
}

TEST_CASE("generalized_eigen rank-1 spectrum") {
  const EigenBasis e = generalized_eigen(sym2(1, 1, 1, 1), diag({1, 1}), 0.0);
  CHECK(e.values[0] == doctest::Approx(2.0));
  CHECK(e.values[1] == doctest::Approx(0.0));
}

TEST_CASE("generalized_eigen values invariant under congruence") {
  testutil::Rand rnd(14);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dim = static_cast<std::size_t>(rnd.uniform_int(2, 10));
    const SymMatrix a = testutil::random_psd(rnd, dim, 0.0);
    const SymMatrix b = testutil::random_psd(rnd, dim, 0.5);

    // Well-conditioned random congruence M = I + 0.3 G.
    Matrix m = Matrix::identity(dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) m(i, j) += 0.3 * rnd.gaussian();

    const Matrix mt = transpose(m);
    const SymMatrix a2 = SymMatrix::from_dense(matmul(mt, matmul(to_dense(a), m)));
    const SymMatrix b2 = SymMatrix::from_dense(matmul(mt, matmul(to_dense(b), m)));

    const EigenBasis e1 = generalized_eigen(a, b, 0.0);
    const EigenBasis e2 = generalized_eigen(a2, b2, 0.0);
    for (std::size_t i = 0; i < dim; ++i)
      CHECK(std::abs(e1.values[i] - e2.values[i]) <= 1e-8 * (1.0 + std::abs(e1.values[i])));
  }
}

TEST_CASE("generalized_eigen clamps negative values to zero") {
  testutil::Rand rnd(15);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dim = static_cast<std::size_t>(rnd.uniform_int(2, 12));
    const SymMatrix a = testutil::random_psd(rnd, dim, 0.0);
    const SymMatrix b = testutil::random_psd(rnd, dim, 0.3);
    const EigenBasis e = generalized_eigen(a, b, 0.0);
    for (double v : e.values) CHECK(v >= 0.0);
  }
}

TEST_CASE("pca_basis on collinear points") {
  Matrix x(4, 2);
  for (int i = 0; i < 4; ++i) {
    x(static_cast<std::size_t>(i), 0) = i * 2.0;
    x(static_cast<std::size_t>(i), 1) = i * 1.0;
  }
  const EigenBasis e = pca_basis(x, 2);
  CHECK(e.values[1] == doctest::Approx(0.0));
  // leading direction parallel to (2, 1)
  const double ratio = e.vectors(0, 0) / e.vectors(1, 0);
  CHECK(ratio == doctest::Approx(2.0));
}

TEST_CASE("pca_basis isotropic cloud has unit spectrum") {
  testutil::Rand rnd(16);
  const Matrix x = testutil::random_matrix(rnd, 100000, 2);
  const EigenBasis e = pca_basis(x, 2);
  CHECK(e.values[0] == doctest::Approx(1.0).epsilon(0.05));
  CHECK(e.values[1] == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("pca_basis full basis is orthonormal") {
  testutil::Rand rnd(17);
  const Matrix x = testutil::random_matrix(rnd, 40, 5);
  const EigenBasis e = pca_basis(x, 5);
  for (std::size_t a = 0; a < 5; ++a) {
    for (std::size_t b = 0; b < 5; ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < 5; ++i) dot += e.vectors(i, a) * e.vectors(i, b);
      CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) <= 1e-9);
    }
  }
}

TEST_CASE("pca_basis rejects a single point") {
  CHECK_THROWS_AS(pca_basis(Matrix(1, 3), 1), Error);
}
