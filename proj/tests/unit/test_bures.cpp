#include <doctest.h>

#include "bwretrieve/bures.hpp"
#include "bwretrieve/error.hpp"
#include "bwretrieve/objective.hpp"
#include "oracles.hpp"

using namespace bwretrieve;

TEST_SUITE("bures") {
  TEST_CASE("distance to itself is zero") {
    const Matrix A = oracle::gaussian(5, 5, 1);
    const PsdMatrix s(A * A.transpose());
    CHECK(bw_distance_sq(s, s) == doctest::Approx(0.0).epsilon(1e-10));
  }

  TEST_CASE("scalar case") {
    CHECK(bw_distance_sq(PsdMatrix(Matrix::Constant(1, 1, 1.0)), PsdMatrix(Matrix::Constant(1, 1, 4.0))) ==
          doctest::Approx(1.0));
  }

  TEST_CASE("rank-one pairs match the closed form") {
    for (unsigned s = 0; s < 20; ++s) {
      const Vector x = oracle::gaussian(5, 1, 100 + s).col(0);
      const Vector y = oracle::gaussian(5, 1, 200 + s).col(0);
      const double closed = x.squaredNorm() + y.squaredNorm() - 2 * std::abs(x.dot(y));
      CHECK(std::abs(bw_distance_sq(PsdMatrix::outer(x), PsdMatrix::outer(y)) - closed) <= 1e-10);
      CHECK(std::abs(rank_one_bw_sq(x, y) - closed) <= 1e-12);
    }
  }

  TEST_CASE("rank_one_bw_sq examples") {
    const Vector x = oracle::gaussian(4, 1, 3).col(0);
    CHECK(rank_one_bw_sq(x, x) == doctest::Approx(0.0));
    CHECK(rank_one_bw_sq(x, -x) == doctest::Approx(0.0));
    Vector a(2), b(2);
    a << 1, 0;
    b << 0, 2;
    CHECK(rank_one_bw_sq(a, b) == 5.0);
  }

  TEST_CASE("PsdMatrix validation") {
    Matrix asym(2, 2);
    asym << 1, 0.5, 0, 1;
    CHECK_THROWS_AS(PsdMatrix{asym}, Error);
    Matrix neg(1, 1);
    neg << -1;
    CHECK_THROWS_AS(PsdMatrix{neg}, Error);
    CHECK_THROWS_AS(bw_distance_sq(PsdMatrix(Matrix::Identity(2, 2)), PsdMatrix(Matrix::Identity(3, 3))),
                    Error);
  }

  TEST_CASE("barycenter objective examples") {
    const auto e = whiten(generate_ensemble(3, 10, 4));
    Measurements zero{Vector::Zero(10), std::nullopt};
    CHECK(barycenter_objective(Vector::Zero(3), e, zero) == 0.0);

    Matrix one(1, 1);
    one << 1;
    const auto s = whiten(SensingEnsemble::from_vectors(one));
    Measurements y{Vector::Constant(1, 4.0), std::nullopt};
    CHECK(barycenter_objective(Vector::Constant(1, 1.0), s, y) == doctest::Approx(0.5));
  }

  TEST_CASE("barycenter objective and sqrt loss differ by a constant") {
    const auto e = whiten(generate_ensemble(8, 60, 5));
    const auto y = synthesize_measurements(e, oracle::unit(8, 6));
    const Vector u1 = oracle::gaussian(8, 1, 7).col(0);
    const Vector u2 = oracle::gaussian(8, 1, 8).col(0);
    const double off1 = barycenter_objective(u1, e, y) - sqrt_loss(u1, e, y);
    const double off2 = barycenter_objective(u2, e, y) - sqrt_loss(u2, e, y);
    CHECK(std::abs(off1 - off2) <= 1e-9);
  }

  TEST_CASE("sqrt loss on intensities equals the whitened amplitude loss") {
    const auto e = whiten(generate_ensemble(6, 40, 9));
    const auto amp = synthesize_measurements(e, oracle::unit(6, 10));
    const Measurements intensity{amp.values.cwiseAbs2(), std::nullopt};
    const Vector u = oracle::gaussian(6, 1, 11).col(0);
    CHECK(sqrt_loss(u, e, intensity) ==
          doctest::Approx(oracle::amplitude_loss(e.whitened(), amp.values, u)).epsilon(1e-12));
  }
}
