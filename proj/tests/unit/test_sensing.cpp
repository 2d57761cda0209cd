#include <doctest.h>

#include <filesystem>

#include "bwretrieve/error.hpp"
#include "bwretrieve/sensing.hpp"
#include "oracles.hpp"

using namespace bwretrieve;

TEST_SUITE("sensing") {
  TEST_CASE("generate_ensemble shapes and determinism") {
    const auto e = generate_ensemble(200, 650, 7);
    CHECK(e.d() == 200);
    CHECK(e.n() == 650);
    const auto a = generate_ensemble(1, 2, 11);
    const auto b = generate_ensemble(1, 2, 11);
    CHECK(a.raw() == b.raw());
    CHECK(generate_ensemble(1, 2, 12).raw() != a.raw());
  }

  TEST_CASE("squared norms concentrate around d") {
    const auto e = generate_ensemble(20, 400, 3);
    const double mean = e.raw().colwise().squaredNorm().mean() / 20.0;
    CHECK(mean > 0.9);
    CHECK(mean < 1.1);
  }

  TEST_CASE("n must exceed d") {
    CHECK_THROWS_AS(generate_ensemble(5, 5, 1), Error);
    CHECK_THROWS_AS(generate_ensemble(0, 5, 1), Error);
  }

  TEST_CASE("empirical covariance") {
    Matrix one(1, 1);
    one << 2;
    CHECK(empirical_covariance(SensingEnsemble::from_vectors(one))(0, 0) == 4.0);

    const Matrix basis = std::sqrt(4.0) * Matrix::Identity(4, 4);
    CHECK(empirical_covariance(SensingEnsemble::from_vectors(basis)).isApprox(Matrix::Identity(4, 4)));
  }

  TEST_CASE("covariance deviation over 100 seeds") {
    std::vector<double> devs;
    for (std::uint64_t s = 0; s < 100; ++s) {
      const Matrix C = empirical_covariance(generate_ensemble(20, 2000, s));
      Eigen::SelfAdjointEigenSolver<Matrix> es(C - Matrix::Identity(20, 20));
      devs.push_back(es.eigenvalues().cwiseAbs().maxCoeff());
    }
    std::sort(devs.begin(), devs.end());
    const double p99 = devs[98];
    MESSAGE("99th percentile of ||C - I||_2: " << p99);
    CHECK(p99 <= 0.35);
  }

  TEST_CASE("whiten scalar case") {
    Matrix one(1, 1);
    one << 2;
    const auto w = whiten(SensingEnsemble::from_vectors(one));
    CHECK(w.cholesky_factor()(0, 0) == doctest::Approx(2.0));
    CHECK(w.whitened()(0, 0) == doctest::Approx(1.0));
  }

  TEST_CASE("whiten leaves an isotropic ensemble unchanged") {
    const Matrix basis = 2.0 * Matrix::Identity(4, 4);
    const auto w = whiten(SensingEnsemble::from_vectors(basis));
    CHECK(w.cholesky_factor().isApprox(Matrix::Identity(4, 4)));
    CHECK(w.whitened().isApprox(basis));
  }

  TEST_CASE("whitening invariants") {
    const auto w = whiten(generate_ensemble(20, 400, 5));
    const Matrix& L = w.cholesky_factor();
    const Matrix Cw = w.whitened() * w.whitened().transpose() / 400.0;
    CHECK((Cw - Matrix::Identity(20, 20)).cwiseAbs().maxCoeff() <= 1e-10);
    const Matrix back = L * w.whitened();
    CHECK((back - w.raw()).norm() <= 1e-12 * w.raw().norm());
    for (Index i = 0; i < 20; ++i) CHECK(L(i, i) > 0);
  }

  TEST_CASE("degenerate ensemble is rejected") {
    Matrix raw = oracle::gaussian(3, 10, 9);
    raw.row(2) = raw.row(1);
    CHECK_THROWS_AS(whiten(SensingEnsemble::from_vectors(raw)), DegenerateEnsembleError);
  }

  TEST_CASE("synthesize_measurements") {
    Matrix a(2, 1);
    a << 3, 4;
    Vector u(2);
    u << -1, 0;
    const auto m = synthesize_measurements(SensingEnsemble::from_vectors(a), u);
    CHECK(m.values(0) == 3.0);
    REQUIRE(m.ground_truth);
    CHECK(*m.ground_truth == u);

    const auto e = generate_ensemble(200, 650, 1);
    CHECK(synthesize_measurements(e, Vector::Zero(200)).values.isZero());
    const Vector star = constant_unit_signal(200);
    CHECK(star.norm() == doctest::Approx(1.0));
    const auto y = synthesize_measurements(e, star).values;
    CHECK(y.minCoeff() >= 0.0);
    CHECK_THROWS_AS(synthesize_measurements(e, Vector::Zero(3)), Error);
  }

  TEST_CASE("unwhiten") {
    CHECK(unwhiten(Matrix::Identity(3, 3), Vector::Ones(3)) == Vector::Ones(3));
    Matrix L(1, 1);
    L << 2;
    Vector u(1);
    u << 6;
    CHECK(unwhiten(L, u)(0) == doctest::Approx(3.0));

    const auto w = whiten(generate_ensemble(20, 100, 8));
    const Vector star = oracle::unit(20, 8);
    const Vector back = unwhiten(w.cholesky_factor(), to_whitened(w.cholesky_factor(), star));
    CHECK((back - star).norm() <= 1e-12);
  }

  TEST_CASE("round trip: a_i . unwhiten(v) = whitened_i . v") {
    const auto w = whiten(generate_ensemble(15, 80, 21));
    const Vector v = oracle::gaussian(15, 1, 22).col(0);
    const Vector lhs = w.raw().transpose() * unwhiten(w.cholesky_factor(), v);
    const Vector rhs = w.whitened().transpose() * v;
    CHECK((lhs - rhs).norm() <= 1e-10 * rhs.norm());
  }

  TEST_CASE("literal unwhiten differs for a non-symmetric factor") {
    const auto w = whiten(generate_ensemble(10, 40, 30));
    const Vector v = oracle::unit(10, 31);
    const Vector a = unwhiten(w.cholesky_factor(), v);
    const Vector b = unwhiten_literal(w.cholesky_factor(), v);
    CHECK((a - b).norm() > 1e-3);
    CHECK((w.cholesky_factor() * b - v).norm() < 1e-12);
  }

  TEST_CASE("binary round trip") {
    const auto e = generate_ensemble(4, 9, 99);
    const auto path = std::filesystem::temp_directory_path() / "bwretrieve_ensemble_test.bin";
    write_ensemble(e, path);
    const auto r = read_ensemble(path);
    CHECK(r.raw() == e.raw());
    CHECK(r.seed() == 99);
    CHECK(std::filesystem::file_size(path) == 3 * 8 + 4 * 9 * 8);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_ensemble(path), Error);
  }
}
