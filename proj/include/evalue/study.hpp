#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "evalue/baselines.hpp"
#include "evalue/config.hpp"
#include "evalue/io.hpp"
#include "evalue/parallel.hpp"
#include "evalue/selector.hpp"
#include "evalue/simgen.hpp"

namespace evalue {

struct MethodOutcome {
  std::string method;      // "mBIC2", "RFGLS+BH", "evalue_E1", "evalue_E2"
  double t = -1.0;         // threshold fraction, -1 for baselines
  double winning_s = -1.0;
  std::vector<int> selected;
  Metrics metrics;
};

struct ReplicationRecord {
  double h = 0.0;
  int replication = 0;
  std::vector<MethodOutcome> outcomes;
  std::string error;  // nonempty when the replication failed
};

// One e-value pass shared across evaluation kinds and thresholds: single
// full-model fit, one ensemble per s, then per-(kind, t) PE minimization
// over s.
inline std::vector<MethodOutcome> evalue_select_all(
    const Dataset& train, const Dataset& test, const SelectionConfig& base,
    const std::vector<EvaluationKind>& kinds, std::uint64_t seed,
    const FitOptions& fit_opt = {}) {
  const FittedAceModel fit = fit_ace(train, fit_opt);
  std::vector<double> s_sorted = base.s_grid;
  std::sort(s_sorted.begin(), s_sorted.end());
  std::vector<double> t_sorted = base.t_grid;
  std::sort(t_sorted.begin(), t_sorted.end());

  struct Candidate {
    double pe;
    std::size_t size;
    double s;
    std::vector<int> selected;
    bool set = false;
  };
  std::map<std::pair<int, double>, Candidate> best;  // (kind idx, t) -> best
  std::map<std::vector<int>, double> pe_cache;

  for (double s : s_sorted) {
    ResamplingConfig rc;
    rc.R = base.R;
    rc.R1 = base.R1;
    rc.s = s;
    rc.seed = RngStream(seed).derive({0x5eedu, detail::s_key(s)}).next_u64();
    const BootstrapEnsemble ens = build_ensemble(fit, train, rc);
    for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
      const EvalueReport rep = make_report(ens, kinds[ki], base.q_list);
      for (double t : t_sorted) {
        std::vector<int> sel = select_q_intersection(rep, base.q_list, t);
        auto cached = pe_cache.find(sel);
        double pe;
        if (cached != pe_cache.end()) {
          pe = cached->second;
        } else {
          pe = restricted_prediction_error(fit, train, sel, test);
          pe_cache.emplace(sel, pe);
        }
        Candidate& c = best[{static_cast<int>(ki), t}];
        if (!c.set || pe < c.pe || (pe == c.pe && sel.size() < c.size)) {
          c.set = true;
          c.pe = pe;
          c.size = sel.size();
          c.s = s;
          c.selected = std::move(sel);
        }
      }
    }
  }

  std::vector<MethodOutcome> out;
  for (std::size_t ki = 0; ki < kinds.size(); ++ki)
    for (double t : t_sorted) {
      const Candidate& c = best.at({static_cast<int>(ki), t});
      MethodOutcome mo;
      mo.method = std::string("evalue_") + to_string(kinds[ki]);
      mo.t = t;
      mo.winning_s = c.s;
      mo.selected = c.selected;
      out.push_back(std::move(mo));
    }
  return out;
}

// One simulation replication: train + test data from disjoint substreams,
// e-value selection for every (kind, t), both baselines when enabled.
inline ReplicationRecord run_replication(const RunConfig& rc, double h,
                                         std::uint64_t h_index, int rep) {
  ReplicationRecord rec;
  rec.h = h;
  rec.replication = rep;
  try {
    const RngStream root =
        RngStream(rc.seed).derive({h_index, static_cast<std::uint64_t>(rep)});
    SimConfig sim = rc.sim;
    sim.h = h;
    RngStream train_rng = root.derive(1);
    RngStream test_rng = root.derive(2);
    auto [train, truth] = simulate_dataset(sim, train_rng);
    auto [test, test_truth] = simulate_dataset(sim, test_rng);
    (void)test_truth;

    rec.outcomes = evalue_select_all(train, test, rc.selection, rc.kinds,
                                     root.derive(3).next_u64());
    if (rc.run_mbic2) {
      MethodOutcome mo;
      mo.method = "mBIC2";
      mo.selected = mbic2_backward(train, rc.mbic2_penalty_constant);
      rec.outcomes.push_back(std::move(mo));
    }
    if (rc.run_rfgls_bh) {
      MethodOutcome mo;
      mo.method = "RFGLS+BH";
      mo.selected =
          benjamini_hochberg(single_snp_gls_pvalues(train), rc.bh_level);
      rec.outcomes.push_back(std::move(mo));
    }
    for (auto& mo : rec.outcomes)
      mo.metrics = score_selection(mo.selected, truth, sim.blocks);
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

namespace detail {

inline std::string metric_cell(double v, bool defined) {
  return defined ? io::format_double(v) : "-";
}

}  // namespace detail

// Full simulation study: replications x h values, long-format CSV plus an
// aggregate table (method x t x h -> TP/TN, RTP/RTN).
inline void run_study(const RunConfig& rc, const std::string& out_dir) {
  rc.validate();
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  struct Job {
    double h;
    std::uint64_t h_index;
    int rep;
  };
  std::vector<Job> jobs;
  for (std::size_t hi = 0; hi < rc.h_list.size(); ++hi)
    for (int rep = 0; rep < rc.replications; ++rep)
      jobs.push_back({rc.h_list[hi], static_cast<std::uint64_t>(hi), rep});

  std::vector<ReplicationRecord> records(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    records[i] = run_replication(rc, jobs[i].h, jobs[i].h_index, jobs[i].rep);
  });

  std::ofstream longf(fs::path(out_dir) / "replications.csv");
  longf << "h,replication,method,t,winning_s,selected_count,tp,tn,rtp,rtn,error\n";
  for (const auto& rec : records) {
    if (!rec.error.empty()) {
      std::string msg = rec.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      longf << io::format_double(rec.h) << "," << rec.replication
            << ",error,,,,,,,," << msg << "\n";
      continue;
    }
    for (const auto& mo : rec.outcomes) {
      longf << io::format_double(rec.h) << "," << rec.replication << ","
            << mo.method << ",";
      if (mo.t >= 0.0) longf << io::format_double(mo.t);
      longf << ",";
      if (mo.winning_s >= 0.0) longf << io::format_double(mo.winning_s);
      longf << "," << mo.selected.size() << ","
            << detail::metric_cell(mo.metrics.tp, mo.metrics.tp_defined) << ","
            << io::format_double(mo.metrics.tn) << ","
            << detail::metric_cell(mo.metrics.rtp, mo.metrics.tp_defined) << ","
            << io::format_double(mo.metrics.rtn) << ",\n";
    }
  }

  // aggregate by (method, t, h)
  struct Agg {
    double tp = 0, tn = 0, rtp = 0, rtn = 0;
    int n = 0, n_tp = 0;
  };
  std::map<std::tuple<std::string, double, double>, Agg> aggs;
  std::map<double, int> failures;
  for (const auto& rec : records) {
    if (!rec.error.empty()) {
      ++failures[rec.h];
      continue;
    }
    for (const auto& mo : rec.outcomes) {
      Agg& a = aggs[{mo.method, mo.t, rec.h}];
      ++a.n;
      a.tn += mo.metrics.tn;
      a.rtn += mo.metrics.rtn;
      if (mo.metrics.tp_defined) {
        ++a.n_tp;
        a.tp += mo.metrics.tp;
        a.rtp += mo.metrics.rtp;
      }
    }
  }
  std::ofstream aggf(fs::path(out_dir) / "aggregate.csv");
  aggf << "method,t,h,replications,failures,avg_tp,avg_tn,avg_rtp,avg_rtn\n";
  for (const auto& [key, a] : aggs) {
    const auto& [method, t, h] = key;
    aggf << method << ",";
    if (t >= 0.0) aggf << io::format_double(t);
    aggf << "," << io::format_double(h) << "," << a.n << ","
         << (failures.count(h) ? failures.at(h) : 0) << ","
         << (a.n_tp ? io::format_double(a.tp / a.n_tp) : std::string("-")) << ","
         << io::format_double(a.tn / a.n) << ","
         << (a.n_tp ? io::format_double(a.rtp / a.n_tp) : std::string("-")) << ","
         << io::format_double(a.rtn / a.n) << "\n";
  }
}

// Seeded 75/25-style family split.
inline std::pair<Dataset, Dataset> split_dataset(const Dataset& data,
                                                 double train_fraction,
                                                 std::uint64_t seed) {
  const std::size_t m = data.families.size();
  if (m < 2) throw ValidationError("split_dataset: need at least 2 families");
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  RngStream rng = RngStream(seed).derive(0x5817u);
  for (std::size_t i = m - 1; i > 0; --i)
    std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
  auto n_train = static_cast<std::size_t>(
      std::ceil(train_fraction * static_cast<double>(m)));
  if (n_train >= m) n_train = m - 1;
  if (n_train < 1) n_train = 1;
  Dataset train, test;
  train.snp_ids = test.snp_ids = data.snp_ids;
  train.covariate_ids = test.covariate_ids = data.covariate_ids;
  for (std::size_t i = 0; i < m; ++i)
    (i < n_train ? train : test).families.push_back(data.families[perm[i]]);
  return {std::move(train), std::move(test)};
}

// The gene-level selection workflow on ingested data: split, grid search,
// per-SNP report emission.
inline SelectionResult run_select(const Dataset& data, const RunConfig& rc,
                                  const std::string& out_dir,
                                  bool dump_distributions = false) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto [train, test] = split_dataset(data, rc.train_fraction, rc.seed);

  FittedAceModel fit;
  const SelectionResult result =
      select_over_grid(train, test, rc.selection, rc.seed, {}, &fit);
  const EvalueReport& rep = result.per_predictor_evalues;

  std::vector<bool> selected(data.snp_ids.size(), false);
  for (int j : result.selected) selected[static_cast<std::size_t>(j)] = true;
  const Eigen::VectorXd beta = fit.snp_coefficients();

  std::ofstream snpf(fs::path(out_dir) / "snp_report.csv");
  snpf << "snp_id,position";
  for (double q : rep.q_list) snpf << ",evalue_q" << io::format_double(q);
  snpf << ",selected,association\n";
  for (std::size_t j = 0; j < data.snp_ids.size(); ++j) {
    snpf << data.snp_ids[j] << "," << (j + 1);
    for (std::size_t qi = 0; qi < rep.q_list.size(); ++qi)
      snpf << ","
           << io::format_double(rep.dropone_quantiles(
                  static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(qi)));
    snpf << "," << (selected[j] ? 1 : 0) << ","
         << (beta[static_cast<Eigen::Index>(j)] >= 0.0 ? "+" : "-") << "\n";
  }

  std::ofstream sumf(fs::path(out_dir) / "selection_summary.csv");
  sumf << "key,value\n";
  sumf << "kind," << to_string(rep.kind) << "\n";
  sumf << "winning_s," << io::format_double(result.winning_s) << "\n";
  sumf << "winning_t," << io::format_double(result.winning_t) << "\n";
  sumf << "selected_count," << result.selected.size() << "\n";
  sumf << "train_families," << train.families.size() << "\n";
  sumf << "test_families," << test.families.size() << "\n";
  for (std::size_t qi = 0; qi < rep.q_list.size(); ++qi)
    sumf << "full_quantile_q" << io::format_double(rep.q_list[qi]) << ","
         << io::format_double(rep.full_quantiles[qi]) << "\n";
  for (double q : rep.q_list)
    sumf << "cutoff_q" << io::format_double(q) << ","
         << io::format_double(
                empirical_quantile(rep.full_scores, q * result.winning_t))
         << "\n";

  std::ofstream pef(fs::path(out_dir) / "pe_trace.csv");
  pef << "s,t,prediction_error\n";
  for (const auto& [st, pe] : result.pe_trace)
    pef << io::format_double(st.first) << "," << io::format_double(st.second)
        << "," << io::format_double(pe) << "\n";

  if (dump_distributions) {
    ResamplingConfig rcfg;
    rcfg.R = rc.selection.R;
    rcfg.R1 = rc.selection.R1;
    rcfg.s = result.winning_s;
    rcfg.seed = RngStream(rc.seed)
                    .derive({0x5eedu, detail::s_key(result.winning_s)})
                    .next_u64();
    const BootstrapEnsemble ens = build_ensemble(fit, train, rcfg);
    auto [full, dropone] = evalue_distributions(ens, rc.selection.kind);
    std::ofstream distf(fs::path(out_dir) / "distributions.csv");
    distf << "label,draw,score\n";
    for (std::size_t r = 0; r < full.values.size(); ++r)
      distf << "full," << r << "," << io::format_double(full.values[r]) << "\n";
    for (std::size_t j = 0; j < dropone.size(); ++j)
      for (std::size_t r = 0; r < dropone[j].values.size(); ++r)
        distf << data.snp_ids[j] << "," << r << ","
              << io::format_double(dropone[j].values[r]) << "\n";
  }
  return result;
}

}  // namespace evalue
