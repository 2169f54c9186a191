#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "kaslib/error.hpp"
#include "kaslib/numerics.hpp"

using namespace kas;
using testutil::gaussian_matrix;

TEST_SUITE("numerics") {

TEST_CASE("sym_eig_desc diagonal") {
  Matrix a(2, 2);
  a << 1, 0, 0, 4;
  const auto e = sym_eig_desc(a);
  CHECK(e.values[0] == doctest::Approx(4.0));
  CHECK(e.values[1] == doctest::Approx(1.0));
  CHECK(e.vectors(1, 0) == doctest::Approx(1.0));
  CHECK(std::abs(e.vectors(0, 0)) < 1e-14);
  CHECK(e.vectors(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("sym_eig_desc identity gives an orthonormal pair obeying the sign rule") {
  const auto e = sym_eig_desc(Matrix::Identity(2, 2));
  CHECK(e.values[0] == doctest::Approx(1.0));
  CHECK(e.values[1] == doctest::Approx(1.0));
  CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(2, 2)).norm() < 1e-12);
  for (Index j = 0; j < 2; ++j) {
    Index imax = 0;
    e.vectors.col(j).cwiseAbs().maxCoeff(&imax);
    CHECK(e.vectors(imax, j) > 0.0);
  }
}

TEST_CASE("sym_eig_desc rank one 2x2") {
  Matrix a(2, 2);
  a << 9, 12, 12, 16;
  const auto e = sym_eig_desc(a);
  CHECK(e.values[0] == doctest::Approx(25.0));
  CHECK(std::abs(e.values[1]) < 1e-12);
  CHECK(e.vectors(0, 0) == doctest::Approx(0.6));
  CHECK(e.vectors(1, 0) == doctest::Approx(0.8));
}

TEST_CASE("sym_eig_desc errors") {
  CHECK_THROWS_AS(sym_eig_desc(Matrix::Zero(2, 3)), DimensionError);
  Matrix a = Matrix::Identity(2, 2);
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  a(1, 0) = a(0, 1);
  CHECK_THROWS_AS(sym_eig_desc(a), DomainError);
  Matrix b = Matrix::Identity(2, 2);
  b(0, 1) = 1e-3;
  CHECK_THROWS_AS(sym_eig_desc(b), DomainError);
}

TEST_CASE("sym_eig_desc symmetrizes tiny asymmetry") {
  Matrix a(2, 2);
  a << 2, 1, 1 + 1e-12, 2;
  const auto e = sym_eig_desc(a);
  CHECK(e.values[0] == doctest::Approx(3.0));
  CHECK(e.values[1] == doctest::Approx(1.0));
}

TEST_CASE("sym_eig_desc reconstruction, orthogonality and eigen-equation up to 200x200") {
  for (Index n : {1, 5, 50, 200}) {
    const Matrix g = gaussian_matrix(n, n, 100 + static_cast<std::uint64_t>(n));
    const Matrix a = 0.5 * (g + g.transpose());
    const auto e = sym_eig_desc(a);
    CHECK((a - e.vectors * e.values.asDiagonal() * e.vectors.transpose()).norm() <= 1e-8 * a.norm());
    CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10);
    for (Index i = 0; i + 1 < n; ++i) CHECK(e.values[i] >= e.values[i + 1]);
    for (Index i = 0; i < n; ++i) {
      CHECK((a * e.vectors.col(i) - e.values[i] * e.vectors.col(i)).norm() <= 1e-8 * a.norm());
      Index imax = 0;
      e.vectors.col(i).cwiseAbs().maxCoeff(&imax);
      CHECK(e.vectors(imax, i) > 0.0);
    }
  }
}

TEST_CASE("svd examples") {
  Matrix d(2, 2);
  d << 3, 0, 0, 2;
  auto s = svd(d);
  CHECK(s.sigma[0] == doctest::Approx(3.0));
  CHECK(s.sigma[1] == doctest::Approx(2.0));

  s = svd(Matrix::Zero(3, 2));
  CHECK(s.sigma.cwiseAbs().maxCoeff() == 0.0);

  Matrix p(3, 2);
  p << 0, 1, 1, 0, 0, 0;
  s = svd(p);
  CHECK(s.sigma[0] == doctest::Approx(1.0));
  CHECK(s.sigma[1] == doctest::Approx(1.0));

  Matrix bad = Matrix::Ones(2, 2);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(svd(bad), DomainError);
}

TEST_CASE("svd reconstruction and ordering") {
  for (auto [r, c] : {std::pair<Index, Index>{7, 3}, {3, 7}, {5, 5}}) {
    const Matrix a = gaussian_matrix(r, c, 7 + static_cast<std::uint64_t>(r * 10 + c));
    const auto s = svd(a);
    CHECK((a - s.u * s.sigma.asDiagonal() * s.v.transpose()).norm() <= 1e-10 * a.norm());
    for (Index i = 0; i < s.sigma.size(); ++i) {
      CHECK(s.sigma[i] >= 0.0);
      if (i > 0) CHECK(s.sigma[i - 1] >= s.sigma[i]);
    }
  }
}

TEST_CASE("svd agrees with eigenvalues on symmetric PSD matrices") {
  const Matrix g = gaussian_matrix(6, 6, 31);
  const Matrix a = g * g.transpose();
  const auto s = svd(a);
  const auto e = sym_eig_desc(a);
  for (Index i = 0; i < 6; ++i) CHECK(std::abs(s.sigma[i] - e.values[i]) <= 1e-9 * e.values[0]);
}

TEST_CASE("pinv examples") {
  Matrix a(3, 2);
  a << 1, 0, 0, 1, 0, 0;
  Matrix expect(2, 3);
  expect << 1, 0, 0, 0, 1, 0;
  CHECK((pinv(a) - expect).norm() < 1e-14);

  CHECK(pinv(Matrix::Constant(1, 1, 2.0))(0, 0) == doctest::Approx(0.5));

  const Matrix ones = Matrix::Ones(2, 1);
  const Matrix p = pinv(ones);
  CHECK(p.rows() == 1);
  CHECK(p(0, 0) == doctest::Approx(0.5));
  CHECK(p(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("pinv Moore-Penrose axioms for tall, wide and square matrices") {
  for (auto [r, c] : {std::pair<Index, Index>{20, 4}, {4, 20}, {6, 6}}) {
    const Matrix a = gaussian_matrix(r, c, 50 + static_cast<std::uint64_t>(r));
    const Matrix ap = pinv(a);
    CHECK((a * ap * a - a).norm() <= 1e-8 * a.norm());
    CHECK((ap * a * ap - ap).norm() <= 1e-8 * ap.norm());
  }
  const Matrix tall = gaussian_matrix(30, 5, 9);
  CHECK((pinv(tall) * tall - Matrix::Identity(5, 5)).norm() <= 1e-8);
}

TEST_CASE("pinv drops singular values below the relative tolerance") {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 1e-14;
  const Matrix p = pinv(a);
  CHECK(p(0, 0) == doctest::Approx(1.0));
  CHECK(p(1, 1) == 0.0);
  CHECK(pinv(a, 1e-16)(1, 1) == doctest::Approx(1e14));
}

TEST_CASE("chol_solve examples") {
  Matrix b(2, 1);
  b << 3, 4;
  CHECK((chol_solve(Matrix::Identity(2, 2), b, 0.0) - b).norm() < 1e-14);

  Matrix d(2, 2);
  d << 2, 0, 0, 4;
  Matrix inv(2, 2);
  inv << 0.5, 0, 0, 0.25;
  CHECK((chol_solve(d, Matrix::Identity(2, 2)) - inv).norm() < 1e-14);

  Matrix a(2, 2);
  a << 2, 1, 1, 2;
  const Matrix x = chol_solve(a, Matrix::Ones(2, 1));
  CHECK(x(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(x(1, 0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("chol_solve residual with explicit jitter") {
  const Matrix g = gaussian_matrix(8, 8, 4);
  const Matrix a = g * g.transpose() + Matrix::Identity(8, 8);
  const Matrix b = gaussian_matrix(8, 3, 5);
  const double jitter = 0.5;
  const Matrix x = chol_solve(a, b, jitter);
  CHECK(((a + jitter * Matrix::Identity(8, 8)) * x - b).norm() <= 1e-8 * b.norm());
}

TEST_CASE("Cholesky escalates jitter on semidefinite input") {
  Matrix a(2, 2);
  a << 1, 1, 1, 1;
  const Cholesky c(a);
  CHECK(c.jitter() > 0.0);
  CHECK(c.jitter() <= 1e-4 * a.trace() / 2.0);
  CHECK(std::isfinite(c.log_det()));
}

TEST_CASE("Cholesky gives up on indefinite input and reports the last jitter") {
  Matrix a(2, 2);
  a << 3, 0, 0, -1;
  try {
    const Cholesky c(a);
    FAIL("expected a factorization error");
  } catch (const FactorizationError& e) {
    // trace / n = 1, so the last level tried is 1e-4.
    CHECK(e.last_jitter() == doctest::Approx(1e-4).epsilon(1e-9));
  }
}

TEST_CASE("Cholesky log-determinant and lower solve") {
  Matrix a(2, 2);
  a << 4, 2, 2, 3;
  const Cholesky c(a);
  CHECK(c.log_det() == doctest::Approx(std::log(8.0)));
  const Matrix l = c.solve_lower(Matrix::Identity(2, 2));
  CHECK((l.transpose() * l - a.inverse()).norm() < 1e-12);
}

}  // TEST_SUITE
