#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <vector>

#include "evalue/common.hpp"
#include "evalue/lmm.hpp"
#include "evalue/pedigree.hpp"

namespace evalue {

struct PValueVector {
  std::vector<double> p_values;   // two-sided, per SNP
  std::vector<double> t_statistics;
  double degrees_of_freedom = 0.0;
};

namespace detail {

// Stacked [1 | C | G] design and response over all individuals.
struct StackedOls {
  Eigen::MatrixXd gram;      // full X^T X
  Eigen::VectorXd xty;
  double yty = 0.0;
  Eigen::Index n = 0;
  Eigen::Index fixed = 0;    // always-kept columns: intercept + covariates
  Eigen::Index pg = 0;
};

inline StackedOls stack_ols(const Dataset& data) {
  StackedOls s;
  s.pg = data.snp_count();
  s.fixed = 1 + data.covariate_count();
  const Eigen::Index k = s.fixed + s.pg;
  s.gram = Eigen::MatrixXd::Zero(k, k);
  s.xty = Eigen::VectorXd::Zero(k);
  for (const auto& f : data.families) {
    const Eigen::Index n = f.phenotype.size();
    Eigen::MatrixXd x(n, k);
    x.col(0).setOnes();
    if (data.covariate_count() > 0)
      x.middleCols(1, data.covariate_count()) = f.covariates;
    x.rightCols(s.pg) = f.genotypes;
    s.gram.noalias() += x.transpose() * x;
    s.xty.noalias() += x.transpose() * f.phenotype;
    s.yty += f.phenotype.squaredNorm();
    s.n += n;
  }
  return s;
}

// RSS of the OLS fit using the fixed columns plus the given SNP subset,
// from the precomputed Gram pieces.
inline double subset_rss(const StackedOls& s, const std::vector<int>& snps) {
  const Eigen::Index k = s.fixed + static_cast<Eigen::Index>(snps.size());
  std::vector<Eigen::Index> cols;
  cols.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < s.fixed; ++j) cols.push_back(j);
  for (int j : snps) cols.push_back(s.fixed + j);
  Eigen::MatrixXd a(k, k);
  Eigen::VectorXd b(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    b[r] = s.xty[cols[static_cast<std::size_t>(r)]];
    for (Eigen::Index c = 0; c < k; ++c)
      a(r, c) = s.gram(cols[static_cast<std::size_t>(r)],
                       cols[static_cast<std::size_t>(c)]);
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("mbic2_backward: rank-deficient OLS design");
  const Eigen::VectorXd beta = ldlt.solve(b);
  return s.yty - b.dot(beta);
}

// n log(RSS/n) + k log n + 2k log(p_g/c) - 2 log(k!)
inline double mbic2_criterion(double rss, Eigen::Index n, int k, Eigen::Index pg,
                              double penalty_constant) {
  const double nd = static_cast<double>(n);
  return nd * std::log(rss / nd) + k * std::log(nd) +
         2.0 * k * std::log(static_cast<double>(pg) / penalty_constant) -
         2.0 * std::lgamma(static_cast<double>(k) + 1.0);
}

}  // namespace detail

// Backward deletion on the independence-assuming linear model under the
// mBIC2 criterion. Intercept and covariates are always kept and do not
// count toward k. Ties in the deletion step go to the lowest SNP index.
// The default penalty constant 0.1 is stricter than the conventional 4:
// ignoring the family covariance inflates OLS t-statistics (residual
// correlation within families), and the larger effective penalty restores
// the intended false-discovery behavior on pedigree data.
inline std::vector<int> mbic2_backward(const Dataset& data,
                                       double penalty_constant = 0.1) {
  data.validate();
  const detail::StackedOls s = detail::stack_ols(data);
  std::vector<int> active(static_cast<std::size_t>(s.pg));
  std::iota(active.begin(), active.end(), 0);

  double current = detail::mbic2_criterion(detail::subset_rss(s, active), s.n,
                                           static_cast<int>(active.size()), s.pg,
                                           penalty_constant);
  while (!active.empty()) {
    double best = current;
    std::ptrdiff_t best_pos = -1;
    for (std::size_t pos = 0; pos < active.size(); ++pos) {
      std::vector<int> trial = active;
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(pos));
      const double crit = detail::mbic2_criterion(
          detail::subset_rss(s, trial), s.n, static_cast<int>(trial.size()),
          s.pg, penalty_constant);
      if (crit < best) {
        best = crit;
        best_pos = static_cast<std::ptrdiff_t>(pos);
      }
    }
    if (best_pos < 0) break;
    active.erase(active.begin() + best_pos);
    current = best;
  }
  return active;
}

// Single-SNP mixed-model t-tests: variance components estimated once from
// the covariates-only null model, then per-SNP GLS with frozen V_hat.
inline PValueVector single_snp_gls_pvalues(
    const Dataset& data, const FitOptions& fit_opt = {},
    const std::vector<Eigen::MatrixXd>* frozen_v_inverse = nullptr) {
  data.validate();
  std::vector<Eigen::MatrixXd> vinv;
  if (frozen_v_inverse) {
    vinv = *frozen_v_inverse;
  } else {
    Dataset null_data = data;
    null_data.snp_ids.clear();
    for (auto& f : null_data.families)
      f.genotypes = Eigen::MatrixXd(f.phenotype.size(), 0);
    vinv = fit_ace(null_data, fit_opt).per_family_V_inverse;
  }

  const Eigen::Index pg = data.snp_count();
  const Eigen::Index pc = data.covariate_count();
  const Eigen::Index n = data.individual_count();
  PValueVector out;
  out.degrees_of_freedom = static_cast<double>(n - (pc + 2));
  if (out.degrees_of_freedom <= 0)
    throw NumericalError("single_snp_gls_pvalues: nonpositive degrees of freedom");
  const boost::math::students_t tdist(out.degrees_of_freedom);

  std::vector<Eigen::VectorXd> y;
  for (const auto& f : data.families) y.push_back(f.phenotype);

  for (Eigen::Index j = 0; j < pg; ++j) {
    std::vector<Eigen::MatrixXd> X;
    X.reserve(data.families.size());
    for (const auto& f : data.families) {
      const Eigen::Index ni = f.phenotype.size();
      Eigen::MatrixXd x(ni, 2 + pc);
      x.col(0).setOnes();
      x.col(1) = f.genotypes.col(j);
      if (pc > 0) x.rightCols(pc) = f.covariates;
      X.push_back(std::move(x));
    }
    const GlsSolution sol =
        gls_solve(X, y, vinv,
                  {"intercept", data.snp_ids[static_cast<std::size_t>(j)]});
    // residual scale in the V-hat metric; ~1 at the ML variance components,
    // and reduces to the classic OLS s^2 when V is forced to the identity
    double quad = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      const Eigen::VectorXd r = y[i] - X[i] * sol.coefficients;
      quad += r.dot(vinv[i] * r);
    }
    const double s2 = quad / out.degrees_of_freedom;
    const double se = std::sqrt(s2 * sol.coefficient_covariance(1, 1));
    const double t = sol.coefficients[1] / se;
    out.t_statistics.push_back(t);
    out.p_values.push_back(2.0 * boost::math::cdf(tdist, -std::abs(t)));
  }
  return out;
}

// Benjamini-Hochberg step-up at the given FDR level; indices of the k
// smallest p-values where k is the largest rank with p_(k) <= k*level/p.
inline std::vector<int> benjamini_hochberg(const std::vector<double>& p_values,
                                           double level) {
  if (!(level > 0.0 && level < 1.0))
    throw ValidationError("benjamini_hochberg: level must be in (0,1)");
  const auto pg = p_values.size();
  std::vector<std::size_t> order(pg);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return p_values[a] < p_values[b];
  });
  std::size_t k = 0;
  for (std::size_t r = 1; r <= pg; ++r)
    if (p_values[order[r - 1]] <=
        static_cast<double>(r) * level / static_cast<double>(pg))
      k = r;
  std::vector<int> out;
  for (std::size_t r = 0; r < k; ++r) out.push_back(static_cast<int>(order[r]));
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<int> benjamini_hochberg(const PValueVector& pv, double level) {
  return benjamini_hochberg(pv.p_values, level);
}

}  // namespace evalue
