#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <cstring>
#include <map>
#include <set>
#include <vector>

#include "evalue/common.hpp"
#include "evalue/evalmap.hpp"
#include "evalue/gboot.hpp"
#include "evalue/lmm.hpp"
#include "evalue/pedigree.hpp"

namespace evalue {

struct SelectionConfig {
  std::vector<double> q_list{0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> t_grid{0.8};
  std::vector<double> s_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6,
                             0.7, 0.8, 0.9, 1.0, 2.0};
  EvaluationKind kind = EvaluationKind::E2;
  int R = 500;
  int R1 = 500;

  void validate() const {
    if (q_list.empty()) throw ValidationError("SelectionConfig: empty q_list");
    if (t_grid.empty()) throw ValidationError("SelectionConfig: empty t_grid");
    if (s_grid.empty()) throw ValidationError("SelectionConfig: empty s_grid");
    for (double t : t_grid)
      if (!(t > 0.0 && t < 1.0))
        throw ValidationError("SelectionConfig: t must be in (0,1)");
    for (double q : q_list)
      for (double t : t_grid)
        if (!(q * t > 0.0 && q * t < 1.0 && q > 0.0 && q < 1.0))
          throw ValidationError("SelectionConfig: q and q*t must be in (0,1)");
    for (double s : s_grid)
      if (!(s > 0.0)) throw ValidationError("SelectionConfig: s must be > 0");
  }
};

struct EvalueReport {
  std::vector<double> q_list;
  std::vector<double> full_quantiles;            // c_q(E_*) per q
  Eigen::MatrixXd dropone_quantiles;             // p_g x |q_list|
  std::vector<double> full_scores;               // raw E_* scores (for c_{qt})
  EvaluationKind kind = EvaluationKind::E2;
  double s = 0.0;
};

struct SelectionResult {
  std::vector<int> selected;  // 0-based SNP indices
  double winning_s = 0.0;
  double winning_t = 0.0;
  std::map<std::pair<double, double>, double> pe_trace;  // (s,t) -> PE
  EvalueReport per_predictor_evalues;
};

// Full-model and drop-one evaluation distributions against the reference
// ensemble summary. Dropping coordinate j only shifts one term of ||z||^2,
// so the p_g drop-one scores per draw are computed by adjustment.
inline std::pair<EvalDistribution, std::vector<EvalDistribution>>
evalue_distributions(const BootstrapEnsemble& ensemble, EvaluationKind kind) {
  const Eigen::Index pg = ensemble.reference_mean.size();
  const auto R = ensemble.primary.size();

  EvalDistribution full;
  full.kind = kind;
  full.label = "full";
  full.values.reserve(R);
  std::vector<EvalDistribution> dropone(static_cast<std::size_t>(pg));
  for (Eigen::Index j = 0; j < pg; ++j) {
    dropone[static_cast<std::size_t>(j)].kind = kind;
    dropone[static_cast<std::size_t>(j)].label =
        "drop" + std::to_string(j + 1);
    dropone[static_cast<std::size_t>(j)].values.reserve(R);
  }

  // standardized value of a zeroed coordinate
  const Eigen::VectorXd z_at_zero =
      (-ensemble.reference_mean).cwiseQuotient(ensemble.reference_sd);
  for (const auto& draw : ensemble.primary) {
    const Eigen::VectorXd z =
        standardize(draw, ensemble.reference_mean, ensemble.reference_sd);
    const double base = z.squaredNorm();
    full.values.push_back(score_from_znorm2(base, kind));
    for (Eigen::Index j = 0; j < pg; ++j) {
      const double adj = base - z[j] * z[j] + z_at_zero[j] * z_at_zero[j];
      dropone[static_cast<std::size_t>(j)].values.push_back(
          score_from_znorm2(std::max(adj, 0.0), kind));
    }
  }
  return {std::move(full), std::move(dropone)};
}

inline EvalueReport make_report(const BootstrapEnsemble& ensemble,
                                EvaluationKind kind,
                                const std::vector<double>& q_list) {
  auto [full, dropone] = evalue_distributions(ensemble, kind);
  EvalueReport rep;
  rep.q_list = q_list;
  rep.kind = kind;
  rep.s = ensemble.source_config.s;
  rep.full_scores = full.values;
  rep.full_quantiles.reserve(q_list.size());
  for (double q : q_list)
    rep.full_quantiles.push_back(empirical_quantile(full.values, q));
  rep.dropone_quantiles.resize(static_cast<Eigen::Index>(dropone.size()),
                               static_cast<Eigen::Index>(q_list.size()));
  for (std::size_t j = 0; j < dropone.size(); ++j)
    for (std::size_t qi = 0; qi < q_list.size(); ++qi)
      rep.dropone_quantiles(static_cast<Eigen::Index>(j),
                            static_cast<Eigen::Index>(qi)) =
          empirical_quantile(dropone[j].values, q_list[qi]);
  return rep;
}

// S_hat = { j : c_q(E_{-j}) < c_{q t}(E_*) }
inline std::vector<int> select_single(const EvalueReport& report, double q,
                                      double t) {
  auto it = std::find(report.q_list.begin(), report.q_list.end(), q);
  if (it == report.q_list.end())
    throw ValidationError("select_single: q not present in report");
  const auto qi = static_cast<Eigen::Index>(it - report.q_list.begin());
  const double cutoff = empirical_quantile(report.full_scores, q * t);
  std::vector<int> out;
  for (Eigen::Index j = 0; j < report.dropone_quantiles.rows(); ++j)
    if (report.dropone_quantiles(j, qi) < cutoff)
      out.push_back(static_cast<int>(j));
  return out;
}

inline std::vector<int> select_q_intersection(const EvalueReport& report,
                                              const std::vector<double>& q_list,
                                              double t) {
  std::vector<int> acc;
  bool first = true;
  for (double q : q_list) {
    std::vector<int> cur = select_single(report, q, t);
    if (first) {
      acc = std::move(cur);
      first = false;
    } else {
      std::vector<int> inter;
      std::set_intersection(acc.begin(), acc.end(), cur.begin(), cur.end(),
                            std::back_inserter(inter));
      acc = std::move(inter);
    }
    if (acc.empty()) break;
  }
  return acc;
}

// { j : mean(E_{-j}) < mean(E_*) }
inline std::vector<int> mean_evalue_select(const BootstrapEnsemble& ensemble,
                                           EvaluationKind kind) {
  auto [full, dropone] = evalue_distributions(ensemble, kind);
  const double full_mean = mean_of(full.values);
  std::vector<int> out;
  for (std::size_t j = 0; j < dropone.size(); ++j)
    if (mean_of(dropone[j].values) < full_mean)
      out.push_back(static_cast<int>(j));
  return out;
}

// Sum of squared fixed-effect prediction residuals on the test set, after
// refitting intercept + covariates + selected SNPs by GLS on the training
// data with variance components frozen at the training fit.
inline double restricted_prediction_error(const FittedAceModel& train_fit,
                                          const Dataset& train,
                                          const std::vector<int>& selected,
                                          const Dataset& test) {
  if (test.snp_count() != train.snp_count() ||
      test.covariate_count() != train.covariate_count())
    throw ValidationError("restricted_prediction_error: train/test layout mismatch");
  const Eigen::Index pg = train.snp_count();
  const Eigen::Index pc = train.covariate_count();
  for (int j : selected)
    if (j < 0 || j >= pg)
      throw ValidationError("restricted_prediction_error: index out of range");

  auto restricted_design = [&](const Dataset& d) {
    std::vector<Eigen::MatrixXd> X;
    X.reserve(d.families.size());
    for (const auto& f : d.families) {
      const Eigen::Index n = f.phenotype.size();
      Eigen::MatrixXd x(n, 1 + pc + static_cast<Eigen::Index>(selected.size()));
      x.col(0).setOnes();
      if (pc > 0) x.middleCols(1, pc) = f.covariates;
      for (std::size_t k = 0; k < selected.size(); ++k)
        x.col(1 + pc + static_cast<Eigen::Index>(k)) =
            f.genotypes.col(selected[k]);
      X.push_back(std::move(x));
    }
    return X;
  };
  std::vector<std::string> labels{"intercept"};
  for (const auto& c : train.covariate_ids) labels.push_back(c);
  for (int j : selected) labels.push_back(train.snp_ids[static_cast<std::size_t>(j)]);

  std::vector<Eigen::VectorXd> y_train;
  for (const auto& f : train.families) y_train.push_back(f.phenotype);
  const GlsSolution sol = gls_solve(restricted_design(train), y_train,
                                    train_fit.per_family_V_inverse, labels);

  double pe = 0.0;
  const std::vector<Eigen::MatrixXd> X_test = restricted_design(test);
  for (std::size_t i = 0; i < test.families.size(); ++i)
    pe += (test.families[i].phenotype - X_test[i] * sol.coefficients)
              .squaredNorm();
  return pe;
}

namespace detail {

// Substream key derived from the bit pattern of s, so results do not
// depend on the position of s inside the grid.
inline std::uint64_t s_key(double s) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(s));
  std::memcpy(&bits, &s, sizeof(bits));
  return bits;
}

}  // namespace detail

// Full (s,t) grid search: one full-model fit, one ensemble per s, PE on
// the test set per candidate set; argmin PE with ties broken toward the
// smaller set, then smaller s, then smaller t.
inline SelectionResult select_over_grid(const Dataset& train, const Dataset& test,
                                        const SelectionConfig& config,
                                        std::uint64_t seed,
                                        const FitOptions& fit_opt = {},
                                        FittedAceModel* fit_out = nullptr) {
  config.validate();
  const FittedAceModel fit = fit_ace(train, fit_opt);
  if (fit_out) *fit_out = fit;

  std::vector<double> s_sorted = config.s_grid;
  std::sort(s_sorted.begin(), s_sorted.end());
  std::vector<double> t_sorted = config.t_grid;
  std::sort(t_sorted.begin(), t_sorted.end());

  SelectionResult result;
  bool have_best = false;
  double best_pe = 0.0;
  std::size_t best_size = 0;
  std::map<std::vector<int>, double> pe_cache;

  for (double s : s_sorted) {
    ResamplingConfig rc;
    rc.R = config.R;
    rc.R1 = config.R1;
    rc.s = s;
    rc.seed = RngStream(seed).derive({0x5eedu, detail::s_key(s)}).next_u64();
    const BootstrapEnsemble ens = build_ensemble(fit, train, rc);
    const EvalueReport rep = make_report(ens, config.kind, config.q_list);
    for (double t : t_sorted) {
      std::vector<int> sel = select_q_intersection(rep, config.q_list, t);
      auto cached = pe_cache.find(sel);
      double pe;
      if (cached != pe_cache.end()) {
        pe = cached->second;
      } else {
        pe = restricted_prediction_error(fit, train, sel, test);
        pe_cache.emplace(sel, pe);
      }
      result.pe_trace[{s, t}] = pe;
      const bool better =
          !have_best || pe < best_pe ||
          (pe == best_pe && sel.size() < best_size);
      if (better) {
        have_best = true;
        best_pe = pe;
        best_size = sel.size();
        result.selected = std::move(sel);
        result.winning_s = s;
        result.winning_t = t;
        result.per_predictor_evalues = rep;
      }
    }
  }
  return result;
}

}  // namespace evalue
