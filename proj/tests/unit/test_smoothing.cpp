#include <doctest.h>

#include <random>
#include <vector>

#include "bwretrieve/error.hpp"
#include "bwretrieve/smoothing.hpp"
#include "oracles.hpp"

using namespace bwretrieve;

TEST_SUITE("smoothing") {
  TEST_CASE("quantile examples") {
    const std::vector<double> v{1, 2, 3, 4};
    CHECK(quantile(v, 0.5) == 2.0);
    CHECK(quantile(std::vector<double>{7}, 0.9) == 7.0);
    CHECK(quantile(std::vector<double>(5, 3.5), 0.3) == 3.5);
    CHECK(quantile(std::vector<double>{5, 1, 4, 2, 3}, 0.1) == 1.0);
    CHECK_THROWS_AS(quantile(std::vector<double>{}, 0.5), Error);
  }

  TEST_CASE("quantile matches brute force on random lists") {
    std::mt19937_64 g(17);
    std::uniform_int_distribution<int> len(1, 50);
    std::uniform_real_distribution<double> gam(0.01, 0.99);
    std::exponential_distribution<double> val(1.0);
    for (int t = 0; t < 1000; ++t) {
      std::vector<double> v(len(g));
      for (double& x : v) x = val(g);
      const double gamma = gam(g);
      const double q = quantile(v, gamma);
      REQUIRE(q == oracle::brute_quantile(v, gamma));
      const auto count = std::count_if(v.begin(), v.end(), [q](double b) { return b <= q; });
      CHECK(static_cast<double>(count) >= std::max(1.0, std::floor(gamma * v.size())));
    }
  }

  TEST_CASE("next_epsilon examples") {
    SmoothingSchedule oracle_s{OracleSmoothing{}, 1.0, 0.0};
    SmoothingInputs at_truth;
    at_truth.dist_to_truth = 0.0;
    at_truth.signal_norm = 1.0;
    CHECK(next_epsilon(oracle_s, 1.0, at_truth) == 0.0);
    oracle_s.epsilon_min = 1e-16;
    CHECK(next_epsilon(oracle_s, 1.0, at_truth) == 1e-16);

    SmoothingSchedule loss_s{LossHeuristic{2.0}, 1.0, 0.0};
    SmoothingInputs loss_in;
    loss_in.loss = 1.0 / 16.0;
    CHECK(next_epsilon(loss_s, 1.0, loss_in) == doctest::Approx(1.0));

    SmoothingSchedule q{QuantileHeuristic{0.5}, 1.0, 0.0};
    const std::vector<double> r{1, 2, 3, 4};
    SmoothingInputs q_in;
    q_in.residuals_sq = r;
    CHECK(next_epsilon(q, 10.0, q_in) == 2.0);

    SmoothingSchedule fixed{FixedSmoothing{0.3}, 1.0, 0.0};
    CHECK(next_epsilon(fixed, 0.3, SmoothingInputs{}) == 0.3);
    CHECK(fixed.initial() == 0.3);
    CHECK(q.initial() == 1.0);
  }

  TEST_CASE("oracle needs the truth") {
    SmoothingSchedule s{OracleSmoothing{}, 1.0, 0.0};
    try {
      next_epsilon(s, 1.0, SmoothingInputs{});
      FAIL("expected MissingOracle");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::MissingOracle);
    }
  }

  TEST_CASE("schedules never increase") {
    std::mt19937_64 g(3);
    std::exponential_distribution<double> ex(0.5);
    const std::vector<SmoothingSchedule> all{{FixedSmoothing{0.2}, 1.0, 0.0},
                                             {OracleSmoothing{}, 1.0, 0.0},
                                             {LossHeuristic{2.0}, 1.0, 0.0},
                                             {QuantileHeuristic{0.25}, 1.0, 1e-3}};
    for (const auto& s : all) {
      double prev = s.initial();
      for (int t = 0; t < 200; ++t) {
        std::vector<double> r(20);
        for (double& x : r) x = ex(g);
        SmoothingInputs in;
        in.loss = ex(g);
        in.residuals_sq = r;
        in.dist_to_truth = ex(g);
        in.signal_norm = 1.0;
        const double next = next_epsilon(s, prev, in);
        CHECK(next <= prev);
        CHECK(next >= s.epsilon_min);
        prev = next;
      }
    }
  }

  TEST_CASE("adaptive schedules vanish at the solution") {
    const std::vector<double> zeros(10, 0.0);
    SmoothingInputs in;
    in.loss = 0.0;
    in.residuals_sq = zeros;
    in.dist_to_truth = 0.0;
    in.signal_norm = 1.0;
    for (const ScheduleKind& k :
         {ScheduleKind{OracleSmoothing{}}, ScheduleKind{LossHeuristic{}}, ScheduleKind{QuantileHeuristic{}}}) {
      CHECK(next_epsilon(SmoothingSchedule{k, 1.0, 0.0}, 1.0, in) == 0.0);
    }
  }

  TEST_CASE("validation") {
    CHECK_THROWS_AS((SmoothingSchedule{QuantileHeuristic{0.0}, 1.0, 0.0}.validate()), Error);
    CHECK_THROWS_AS((SmoothingSchedule{QuantileHeuristic{1.0}, 1.0, 0.0}.validate()), Error);
    CHECK_THROWS_AS((SmoothingSchedule{LossHeuristic{-1.0}, 1.0, 0.0}.validate()), Error);
    CHECK_THROWS_AS((SmoothingSchedule{FixedSmoothing{-0.1}, 1.0, 0.0}.validate()), Error);
    CHECK_THROWS_AS((SmoothingSchedule{OracleSmoothing{}, 1.0, 2.0}.validate()), Error);
    CHECK_NOTHROW((SmoothingSchedule{QuantileHeuristic{0.25}, 1.0, 0.0}.validate()));
  }
}
