#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "evalue/common.hpp"
#include "evalue/lmm.hpp"
#include "evalue/rng.hpp"

namespace evalue {

struct ResamplingConfig {
  int R = 500;            // primary ensemble size
  int R1 = 500;           // reference ensemble size
  double s = 0.5;         // bootstrap standard-deviation parameter tau_n/sqrt(n)
  std::uint64_t seed = 0;

  void validate() const {
    if (R < 100 || R1 < 100)
      throw ValidationError("ResamplingConfig: R and R1 must be >= 100");
    if (!(s > 0.0)) throw ValidationError("ResamplingConfig: s must be > 0");
  }
};

struct BootstrapEnsemble {
  std::vector<Eigen::VectorXd> primary;    // R vectors, SNP block only
  std::vector<Eigen::VectorXd> reference;  // R1 vectors
  Eigen::VectorXd reference_mean;
  Eigen::VectorXd reference_sd;            // sample sd, denominator R1-1
  Eigen::VectorXd full_estimate;           // beta_hat_g
  ResamplingConfig source_config;
};

// Centered Gamma(1,1)-1 weights, one per family.
inline Eigen::VectorXd draw_family_weights(std::size_t m, RngStream& rng) {
  if (m < 1) throw ValidationError("draw_family_weights: m must be >= 1");
  Eigen::VectorXd w(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.exponential() - 1.0;
  return w;
}

namespace detail {

// Precomputed pieces of the closed-form bootstrap draw: each draw is
// theta_hat + s * M w with M = (X^T Vinv X)^{-1} [u_1 ... u_m] and
// u_i = X_i^T Vinv_i (y_i - X_i theta_hat).
struct PerturbKernel {
  Eigen::VectorXd theta_hat;
  Eigen::MatrixXd score_map;  // (1+pg+p) x m
  Eigen::Index snp_offset = 1;
  Eigen::Index snp_count = 0;

  Eigen::VectorXd draw(const Eigen::VectorXd& weights, double s) const {
    if (weights.size() != score_map.cols())
      throw ValidationError("perturb: weight vector has wrong length");
    Eigen::VectorXd theta = theta_hat + s * (score_map * weights);
    return theta.segment(snp_offset, snp_count);
  }
};

inline PerturbKernel make_perturb_kernel(const FittedAceModel& fit,
                                         const Dataset& data) {
  const std::size_t m = data.families.size();
  if (fit.per_family_V_inverse.size() != m)
    throw ValidationError("perturb: fit does not match dataset family count");
  FixedEffectsDesign design = build_design(data);
  const Eigen::Index k = design.cols();
  if (fit.coefficients.size() != k)
    throw ValidationError("perturb: coefficient length does not match design");
  Eigen::MatrixXd scores(k, static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const Eigen::VectorXd r =
        data.families[i].phenotype - design.X[i] * fit.coefficients;
    scores.col(static_cast<Eigen::Index>(i)) =
        design.X[i].transpose() * (fit.per_family_V_inverse[i] * r);
  }
  PerturbKernel kern;
  kern.theta_hat = fit.coefficients;
  kern.score_map = fit.coefficient_covariance * scores;
  kern.snp_offset = 1;
  kern.snp_count = fit.snp_count;
  return kern;
}

}  // namespace detail

// One bootstrap draw of the SNP coefficient block:
// beta_hat_g + s * [ (X^T Vinv X)^{-1} sum_i w_i X_i^T Vinv_i (y - X theta_hat) ]_g
inline Eigen::VectorXd perturb_coefficients(const FittedAceModel& fit,
                                            const Dataset& data,
                                            const Eigen::VectorXd& weights,
                                            double s) {
  return detail::make_perturb_kernel(fit, data).draw(weights, s);
}

// Generates the R primary and R1 reference draws from independent
// substreams of config.seed; the kernel is formed once and each draw is a
// single matrix-vector product. Per-draw substreams keyed by draw index
// keep the output schedule-independent.
inline BootstrapEnsemble build_ensemble(const FittedAceModel& fit,
                                        const Dataset& data,
                                        const ResamplingConfig& config) {
  config.validate();
  const detail::PerturbKernel kern = detail::make_perturb_kernel(fit, data);
  const std::size_t m = data.families.size();
  const RngStream root(config.seed);

  auto generate = [&](std::uint64_t stream_id, int count) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int r = 0; r < count; ++r) {
      RngStream draw_rng =
          root.derive({stream_id, static_cast<std::uint64_t>(r)});
      const Eigen::VectorXd w = draw_family_weights(m, draw_rng);
      out.push_back(kern.draw(w, config.s));
    }
    return out;
  };

  BootstrapEnsemble ens;
  ens.primary = generate(1, config.R);
  ens.reference = generate(2, config.R1);
  ens.full_estimate = fit.snp_coefficients();
  ens.source_config = config;

  const Eigen::Index pg = fit.snp_count;
  ens.reference_mean = Eigen::VectorXd::Zero(pg);
  for (const auto& v : ens.reference) ens.reference_mean += v;
  ens.reference_mean /= static_cast<double>(config.R1);
  Eigen::VectorXd ssq = Eigen::VectorXd::Zero(pg);
  for (const auto& v : ens.reference)
    ssq += (v - ens.reference_mean).cwiseAbs2();
  ens.reference_sd = (ssq / static_cast<double>(config.R1 - 1)).cwiseSqrt();
  if ((ens.reference_sd.array() < 1e-12).any())
    throw NumericalError(
        "build_ensemble: degenerate reference (a predictor has no sampling "
        "variability)");
  return ens;
}

}  // namespace evalue
