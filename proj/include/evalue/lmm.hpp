#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "evalue/common.hpp"
#include "evalue/pedigree.hpp"

namespace evalue {

// Per-family design matrices X_i = [1 | G_i | C_i] with shared column labels.
struct FixedEffectsDesign {
  std::vector<Eigen::MatrixXd> X;
  std::vector<std::string> labels;

  Eigen::Index cols() const { return X.empty() ? 0 : X.front().cols(); }
};

inline FixedEffectsDesign build_design(const Dataset& data) {
  FixedEffectsDesign d;
  d.labels.push_back("intercept");
  for (const auto& s : data.snp_ids) d.labels.push_back(s);
  for (const auto& c : data.covariate_ids) d.labels.push_back(c);
  const Eigen::Index pg = data.snp_count();
  const Eigen::Index pc = data.covariate_count();
  d.X.reserve(data.families.size());
  for (const auto& f : data.families) {
    const Eigen::Index n = f.phenotype.size();
    Eigen::MatrixXd x(n, 1 + pg + pc);
    x.col(0).setOnes();
    if (pg > 0) x.middleCols(1, pg) = f.genotypes;
    if (pc > 0) x.middleCols(1 + pg, pc) = f.covariates;
    d.X.push_back(std::move(x));
  }
  return d;
}

inline std::vector<RelationshipMatrix> build_kinships(const Dataset& data) {
  std::vector<RelationshipMatrix> phis;
  phis.reserve(data.families.size());
  for (const auto& f : data.families) phis.push_back(build_kinship(f.pedigree));
  return phis;
}

struct GlsSolution {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd coefficient_covariance;  // (sum X^T Vinv X)^{-1}
};

// Weighted normal-equations solve over block-diagonal V^{-1}.
inline GlsSolution gls_solve(const std::vector<Eigen::MatrixXd>& X,
                             const std::vector<Eigen::VectorXd>& y,
                             const std::vector<Eigen::MatrixXd>& v_inverses,
                             const std::vector<std::string>& labels = {}) {
  if (X.empty() || X.size() != y.size() || X.size() != v_inverses.size())
    throw ValidationError("gls_solve: per-family input sizes disagree");
  const Eigen::Index k = X.front().cols();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (X[i].rows() != y[i].size() || v_inverses[i].rows() != X[i].rows())
      throw ValidationError("gls_solve: family " + std::to_string(i) +
                            " dimension mismatch");
    const Eigen::MatrixXd xtv = X[i].transpose() * v_inverses[i];
    a.noalias() += xtv * X[i];
    b.noalias() += xtv * y[i];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-10);
  if (lu.rank() < k) {
    std::string msg = "gls_solve: rank-deficient design; dependent columns:";
    const auto& perm = lu.permutationQ().indices();
    for (Eigen::Index j = lu.rank(); j < k; ++j) {
      const Eigen::Index col = perm(j);
      msg += " ";
      msg += (col < static_cast<Eigen::Index>(labels.size()))
                 ? labels[static_cast<std::size_t>(col)]
                 : ("#" + std::to_string(col));
    }
    throw NumericalError(msg);
  }
  GlsSolution sol;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  sol.coefficients = ldlt.solve(b);
  sol.coefficient_covariance = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
  // symmetrize against roundoff
  sol.coefficient_covariance =
      0.5 * (sol.coefficient_covariance + sol.coefficient_covariance.transpose());
  return sol;
}

struct FitOptions {
  double tolerance = 1e-6;
  int max_iters = 1000;
  std::optional<AceVarianceComponents> init;
  bool multi_start = true;
};

struct FittedAceModel {
  Eigen::VectorXd coefficients;  // [intercept, SNPs, covariates]
  AceVarianceComponents vc;
  Eigen::MatrixXd coefficient_covariance;
  std::vector<Eigen::MatrixXd> per_family_V_inverse;
  double log_likelihood = 0.0;
  bool converged = false;
  std::vector<std::string> column_labels;
  Eigen::Index snp_count = 0;
  Eigen::Index covariate_count = 0;

  Eigen::VectorXd snp_coefficients() const {
    return coefficients.segment(1, snp_count);
  }
};

namespace detail {

constexpr double kVarianceFloor = 1e-8;

struct ProfileEval {
  double neg2ll = std::numeric_limits<double>::infinity();
  std::vector<Eigen::MatrixXd> v_inverses;
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd coefficient_covariance;
};

// -2 log L at vc with fixed effects profiled out. Returns +inf when any V_i
// fails Cholesky.
inline ProfileEval profile_eval(const FixedEffectsDesign& design,
                                const std::vector<Eigen::VectorXd>& y,
                                const std::vector<RelationshipMatrix>& phis,
                                const AceVarianceComponents& vc,
                                bool keep_byproducts) {
  ProfileEval out;
  const std::size_t m = y.size();
  std::vector<Eigen::MatrixXd> vinv(m);
  double logdet = 0.0;
  Eigen::Index total_n = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const Eigen::MatrixXd v = ace_covariance(phis[i], vc);
    Eigen::LLT<Eigen::MatrixXd> llt(v);
    if (llt.info() != Eigen::Success) return out;
    const Eigen::Index n = v.rows();
    total_n += n;
    for (Eigen::Index j = 0; j < n; ++j)
      logdet += 2.0 * std::log(llt.matrixL()(j, j));
    vinv[i] = llt.solve(Eigen::MatrixXd::Identity(n, n));
  }
  GlsSolution gls = gls_solve(design.X, y, vinv, design.labels);
  double quad = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const Eigen::VectorXd r = y[i] - design.X[i] * gls.coefficients;
    quad += r.dot(vinv[i] * r);
  }
  out.neg2ll =
      static_cast<double>(total_n) * std::log(2.0 * M_PI) + logdet + quad;
  if (keep_byproducts) {
    out.v_inverses = std::move(vinv);
    out.coefficients = std::move(gls.coefficients);
    out.coefficient_covariance = std::move(gls.coefficient_covariance);
  }
  return out;
}

inline AceVarianceComponents vc_from_log(const Eigen::Vector3d& u) {
  AceVarianceComponents vc;
  vc.sigma_a2 = std::max(std::exp(u[0]), kVarianceFloor);
  vc.sigma_c2 = std::max(std::exp(u[1]), kVarianceFloor);
  vc.sigma_e2 = std::max(std::exp(u[2]), kVarianceFloor);
  return vc;
}

// Nelder-Mead on a 3-d objective; returns best point found.
template <typename F>
inline std::pair<Eigen::Vector3d, double> nelder_mead(F&& f, Eigen::Vector3d x0,
                                                      double tol, int max_iters,
                                                      bool* converged) {
  constexpr int n = 3;
  std::array<Eigen::Vector3d, n + 1> pts;
  std::array<double, n + 1> fv;
  pts[0] = x0;
  fv[0] = f(x0);
  for (int i = 0; i < n; ++i) {
    pts[i + 1] = x0;
    pts[i + 1][i] += 0.5;
    fv[i + 1] = f(pts[i + 1]);
  }
  auto order = [&] {
    for (int i = 0; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j)
        if (fv[j] < fv[i]) {
          std::swap(fv[i], fv[j]);
          std::swap(pts[i], pts[j]);
        }
  };
  *converged = false;
  for (int it = 0; it < max_iters; ++it) {
    order();
    double spread = std::abs(fv[n] - fv[0]);
    double size = 0.0;
    for (int i = 1; i <= n; ++i) size = std::max(size, (pts[i] - pts[0]).norm());
    if (spread < tol && size < tol) {
      *converged = true;
      break;
    }
    const Eigen::Vector3d centroid = (pts[0] + pts[1] + pts[2]) / 3.0;
    const Eigen::Vector3d xr = centroid + (centroid - pts[n]);
    const double fr = f(xr);
    if (fr < fv[0]) {
      const Eigen::Vector3d xe = centroid + 2.0 * (centroid - pts[n]);
      const double fe = f(xe);
      if (fe < fr) {
        pts[n] = xe;
        fv[n] = fe;
      } else {
        pts[n] = xr;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      pts[n] = xr;
      fv[n] = fr;
    } else {
      const Eigen::Vector3d xc =
          centroid + 0.5 * ((fr < fv[n] ? xr : pts[n]) - centroid);
      const double fc = f(xc);
      if (fc < std::min(fr, fv[n])) {
        pts[n] = xc;
        fv[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
          fv[i] = f(pts[i]);
        }
      }
    }
  }
  order();
  return {pts[0], fv[0]};
}

}  // namespace detail

inline double profile_neg_loglik(const Dataset& data,
                                 const AceVarianceComponents& vc) {
  vc.validate();
  FixedEffectsDesign design = build_design(data);
  std::vector<Eigen::VectorXd> y;
  for (const auto& f : data.families) y.push_back(f.phenotype);
  return detail::profile_eval(design, y, build_kinships(data), vc, false).neg2ll;
}

// ML fit of the ACE mixed model: simplex search over log variance
// components, fixed effects profiled out at every step, multi-start by
// default.
inline FittedAceModel fit_ace(const Dataset& data, const FitOptions& opt = {}) {
  data.validate();
  FixedEffectsDesign design = build_design(data);
  std::vector<Eigen::VectorXd> y;
  y.reserve(data.families.size());
  for (const auto& f : data.families) y.push_back(f.phenotype);
  const std::vector<RelationshipMatrix> phis = build_kinships(data);

  auto objective = [&](const Eigen::Vector3d& u) {
    return detail::profile_eval(design, y, phis, detail::vc_from_log(u), false)
        .neg2ll;
  };

  // pooled phenotypic variance for initialization
  double mean = 0.0, ssq = 0.0;
  Eigen::Index total_n = 0;
  for (const auto& yi : y) {
    mean += yi.sum();
    total_n += yi.size();
  }
  mean /= static_cast<double>(total_n);
  for (const auto& yi : y) ssq += (yi.array() - mean).square().sum();
  const double var_y =
      std::max(ssq / std::max<double>(1.0, static_cast<double>(total_n - 1)),
               1e-6);

  std::vector<AceVarianceComponents> starts;
  if (opt.init) {
    starts.push_back(*opt.init);
  } else {
    starts.push_back({0.5 * var_y, 0.25 * var_y, 0.25 * var_y});
    if (opt.multi_start) {
      starts.push_back({0.1 * var_y, 0.1 * var_y, 0.8 * var_y});
      starts.push_back({0.8 * var_y, 0.1 * var_y, 0.1 * var_y});
    }
  }

  Eigen::Vector3d best_u = Eigen::Vector3d::Zero();
  double best_f = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  for (const auto& s0 : starts) {
    Eigen::Vector3d u0(std::log(std::max(s0.sigma_a2, detail::kVarianceFloor)),
                       std::log(std::max(s0.sigma_c2, detail::kVarianceFloor)),
                       std::log(std::max(s0.sigma_e2, detail::kVarianceFloor)));
    bool conv = false;
    auto [u, fval] =
        detail::nelder_mead(objective, u0, opt.tolerance, opt.max_iters, &conv);
    if (fval < best_f) {
      best_f = fval;
      best_u = u;
    }
    any_converged = any_converged || conv;
  }
  if (!std::isfinite(best_f))
    throw NumericalError("fit_ace: likelihood not finite at any start point");

  FittedAceModel fit;
  fit.vc = detail::vc_from_log(best_u);
  detail::ProfileEval final_eval =
      detail::profile_eval(design, y, phis, fit.vc, true);
  fit.coefficients = std::move(final_eval.coefficients);
  fit.coefficient_covariance = std::move(final_eval.coefficient_covariance);
  fit.per_family_V_inverse = std::move(final_eval.v_inverses);
  fit.log_likelihood = -0.5 * final_eval.neg2ll;
  fit.converged = any_converged;
  fit.column_labels = design.labels;
  fit.snp_count = data.snp_count();
  fit.covariate_count = data.covariate_count();
  return fit;
}

}  // namespace evalue
