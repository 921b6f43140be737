#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "evalue/common.hpp"

namespace evalue {

enum class EvaluationKind { E1, E2 };

inline const char* to_string(EvaluationKind k) {
  return k == EvaluationKind::E1 ? "E1" : "E2";
}

// Scores of one model's bootstrap draws under an evaluation map.
struct EvalDistribution {
  std::vector<double> values;  // each in (0,1]
  EvaluationKind kind = EvaluationKind::E2;
  std::string label;           // dropped predictor id, or "full"
};

inline Eigen::VectorXd standardize(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& mean,
                                   const Eigen::VectorXd& sd) {
  if (x.size() != mean.size() || x.size() != sd.size())
    throw ValidationError("standardize: dimension mismatch");
  if ((sd.array() <= 0.0).any())
    throw NumericalError("standardize: nonpositive reference sd");
  return (x - mean).cwiseQuotient(sd);
}

inline double score_from_znorm2(double znorm2, EvaluationKind kind) {
  return kind == EvaluationKind::E1 ? 1.0 / (1.0 + znorm2)
                                    : std::exp(-std::sqrt(znorm2));
}

// E1(x) = 1/(1+||z||^2), E2(x) = exp(-||z||), z the standardized point.
inline double evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                       const Eigen::VectorXd& sd, EvaluationKind kind) {
  return score_from_znorm2(standardize(x, mean, sd).squaredNorm(), kind);
}

// The ceil(q*n)-th order statistic (left-continuous inverse CDF).
inline double empirical_quantile(const std::vector<double>& values, double q) {
  if (values.empty()) throw ValidationError("empirical_quantile: empty input");
  if (!(q > 0.0 && q < 1.0))
    throw ValidationError("empirical_quantile: q must be in (0,1)");
  const auto n = values.size();
  auto k = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(n)));
  if (k < 1) k = 1;
  if (k > n) k = n;
  std::vector<double> work(values);
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   work.end());
  return work[k - 1];
}

inline double mean_of(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("mean_of: empty input");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

}  // namespace evalue
