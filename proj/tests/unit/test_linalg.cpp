#include <doctest.h>

#include "bwretrieve/error.hpp"
#include "bwretrieve/linalg.hpp"
#include "oracles.hpp"

using namespace bwretrieve;
using namespace bwretrieve::linalg;

TEST_SUITE("linalg") {
  TEST_CASE("cholesky reproduces the matrix") {
    const Matrix A = oracle::gaussian(6, 30, 1);
    const Matrix C = A * A.transpose() / 30.0;
    const Matrix L = cholesky_lower(C);
    CHECK((L * L.transpose() - C).cwiseAbs().maxCoeff() < 1e-12);
    for (Index i = 0; i < 6; ++i) {
      CHECK(L(i, i) > 0);
      for (Index j = i + 1; j < 6; ++j) CHECK(L(i, j) == 0.0);
    }
  }

  TEST_CASE("cholesky reports the failing pivot") {
    Matrix C(3, 3);
    C << 1, 1, 0, 1, 1, 0, 0, 0, 1;
    try {
      cholesky_lower(C);
      FAIL("expected DegenerateEnsembleError");
    } catch (const DegenerateEnsembleError& e) {
      CHECK(e.pivot() == 1);
      CHECK(e.kind() == ErrorKind::DegenerateEnsemble);
    }
  }

  TEST_CASE("triangular solves") {
    const Matrix A = oracle::gaussian(5, 40, 2);
    const Matrix L = cholesky_lower(A * A.transpose() / 40.0);
    const Vector b = oracle::gaussian(5, 1, 3).col(0);
    CHECK((L * forward_substitute(L, b) - b).norm() < 1e-12);
    CHECK((L.transpose() * back_substitute_transpose(L, b) - b).norm() < 1e-12);
    const Matrix B = oracle::gaussian(5, 7, 4);
    CHECK((L * forward_substitute(L, B) - B).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("zero diagonal is a singular factor") {
    Matrix L = Matrix::Identity(3, 3);
    L(2, 2) = 0;
    CHECK_THROWS_AS(back_substitute_transpose(L, Vector::Ones(3)), Error);
  }

  TEST_CASE("symmetric square roots") {
    const Matrix A = oracle::gaussian(4, 20, 5);
    const Matrix C = A * A.transpose() / 20.0;
    const Matrix R = symmetric_sqrt(C);
    CHECK((R * R - C).cwiseAbs().maxCoeff() < 1e-12);
    const Matrix Ri = symmetric_inverse_sqrt(C);
    CHECK((Ri * C * Ri - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("top eigenpair: dense and power iteration agree") {
    const Matrix A = oracle::gaussian(8, 8, 6);
    const Matrix S = (A + A.transpose()) / 2;
    TopEigenOptions dense;
    dense.method = EigenMethod::Dense;
    TopEigenOptions power;
    power.method = EigenMethod::PowerIteration;
    power.max_iterations = 200000;
    const auto a = top_eigenpair(S, dense);
    const auto b = top_eigenpair(S, power);
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-8));
    CHECK(std::abs(std::abs(a.vector.dot(b.vector)) - 1.0) < 1e-6);
    const auto ext = extreme_eigenvalues(S);
    CHECK(ext.max == doctest::Approx(a.value).epsilon(1e-12));
  }

  TEST_CASE("largest algebraic eigenvalue, not largest magnitude") {
    Vector diag(3);
    diag << -5, 1, 2;
    TopEigenOptions power;
    power.method = EigenMethod::PowerIteration;
    const auto top = top_eigenpair(diag.asDiagonal().toDenseMatrix(), power);
    CHECK(top.value == doctest::Approx(2.0));
  }

  TEST_CASE("power iteration gives up with the residual") {
    Vector diag(2);
    diag << 1, 1 - 1e-13;
    TopEigenOptions power;
    power.method = EigenMethod::PowerIteration;
    power.max_iterations = 3;
    power.tolerance = 1e-300;
    CHECK_THROWS_AS(top_eigenpair(diag.asDiagonal().toDenseMatrix(), power), InitializationError);
  }
}
