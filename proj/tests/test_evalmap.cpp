#include <catch2/catch_amalgamated.hpp>
#include <algorithm>
#include <cmath>

#include "evalue/evalmap.hpp"
#include "evalue/rng.hpp"

using namespace evalue;

TEST_CASE("standardize basics") {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd sd = Eigen::VectorXd::Constant(2, 2.0);
  Eigen::VectorXd x(2);
  x << 2.0, -2.0;
  const Eigen::VectorXd z = standardize(x, mean, sd);
  REQUIRE(z[0] == Catch::Approx(1.0));
  REQUIRE(z[1] == Catch::Approx(-1.0));
  REQUIRE(standardize(mean, mean, sd).isZero());
}

TEST_CASE("standardize affine identity") {
  RngStream rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd x(3), mean(3), sd(3);
    for (int i = 0; i < 3; ++i) {
      x[i] = rng.normal();
      mean[i] = rng.normal();
      sd[i] = 0.5 + rng.uniform();
    }
    const double a = rng.normal() > 0 ? 1.7 : -1.7;
    const double b = rng.normal();
    const Eigen::VectorXd lhs = standardize(
        (a * x).array() + b, (a * mean).array() + b, std::abs(a) * sd);
    const Eigen::VectorXd rhs =
        (a > 0 ? 1.0 : -1.0) * standardize(x, mean, sd);
    REQUIRE((lhs - rhs).norm() < 1e-12);
  }
}

TEST_CASE("standardize rejects degenerate sd") {
  Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd sd(2);
  sd << 1.0, 0.0;
  REQUIRE_THROWS_AS(standardize(zero2, zero2, sd), NumericalError);
}

TEST_CASE("evaluate pinned values") {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd sd = Eigen::VectorXd::Ones(3);
  REQUIRE(evaluate(mean, mean, sd, EvaluationKind::E1) == 1.0);
  REQUIRE(evaluate(mean, mean, sd, EvaluationKind::E2) == 1.0);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(3);  // ||z||^2 = 3
  REQUIRE(evaluate(x, mean, sd, EvaluationKind::E1) == Catch::Approx(0.25));
  Eigen::VectorXd e1(3);
  e1 << 1.0, 0.0, 0.0;  // ||z|| = 1
  REQUIRE(evaluate(e1, mean, sd, EvaluationKind::E2) ==
          Catch::Approx(std::exp(-1.0)));
}

TEST_CASE("evaluate bounds and monotonicity in ||z||") {
  RngStream rng(11);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd sd = Eigen::VectorXd::Ones(4);
  for (int rep = 0; rep < 200; ++rep) {
    Eigen::VectorXd x(4);
    for (int i = 0; i < 4; ++i) x[i] = 5.0 * rng.normal();
    Eigen::VectorXd further = x * (1.0 + rng.uniform());
    for (EvaluationKind k : {EvaluationKind::E1, EvaluationKind::E2}) {
      const double e = evaluate(x, mean, sd, k);
      REQUIRE(e > 0.0);
      REQUIRE(e <= 1.0);
      if (x.norm() > 1e-12)
        REQUIRE(evaluate(further, mean, sd, k) < e);
    }
  }
}

TEST_CASE("evaluate location-scale invariance is exact") {
  RngStream rng(13);
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::VectorXd x(3), mean(3), sd(3);
    for (int i = 0; i < 3; ++i) {
      x[i] = rng.normal();
      mean[i] = rng.normal();
      sd[i] = 0.5 + rng.uniform();
    }
    const double a = (rng.bernoulli(0.5) ? 1.0 : -1.0) * (0.5 + rng.uniform());
    const double b = rng.normal();
    for (EvaluationKind k : {EvaluationKind::E1, EvaluationKind::E2}) {
      const double base = evaluate(x, mean, sd, k);
      const double moved = evaluate((a * x).array() + b,
                                    Eigen::VectorXd((a * mean).array() + b),
                                    std::abs(a) * sd, k);
      REQUIRE(std::abs(base - moved) < 1e-12);
    }
  }
}

TEST_CASE("evaluate Lipschitz smoke test on bounded domain") {
  RngStream rng(17);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd sd = Eigen::VectorXd::Ones(3);
  // within ||z|| <= 10 both maps have derivative magnitude <= 1
  for (int rep = 0; rep < 500; ++rep) {
    Eigen::VectorXd x(3), y(3);
    for (int i = 0; i < 3; ++i) {
      x[i] = 5.0 * (2.0 * rng.uniform() - 1.0);
      y[i] = 5.0 * (2.0 * rng.uniform() - 1.0);
    }
    for (EvaluationKind k : {EvaluationKind::E1, EvaluationKind::E2}) {
      const double diff =
          std::abs(evaluate(x, mean, sd, k) - evaluate(y, mean, sd, k));
      REQUIRE(diff <= 1.0 * (x - y).norm() + 1e-12);
    }
  }
}

TEST_CASE("empirical quantile pinned examples") {
  std::vector<double> one_to_ten{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  REQUIRE(empirical_quantile(one_to_ten, 0.5) == 5.0);
  REQUIRE(empirical_quantile({7.0}, 0.3) == 7.0);
  REQUIRE(empirical_quantile({3.0, 1.0, 2.0}, 0.9) == 3.0);
  REQUIRE_THROWS_AS(empirical_quantile({}, 0.5), ValidationError);
  REQUIRE_THROWS_AS(empirical_quantile({1.0}, 0.0), ValidationError);
}

TEST_CASE("empirical quantile agrees with full-sort oracle") {
  RngStream rng(23);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 1 + rng.uniform_int(1000);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    const double q = 0.01 + 0.98 * rng.uniform();
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const auto k = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(n)));
    REQUIRE(empirical_quantile(v, q) == sorted[std::max<std::size_t>(k, 1) - 1]);
  }
}
