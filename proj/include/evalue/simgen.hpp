#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evalue/common.hpp"
#include "evalue/pedigree.hpp"
#include "evalue/rng.hpp"

namespace evalue {

struct BlockSpec {
  std::vector<int> sizes{6, 4, 6, 4, 30};
  std::vector<double> mafs{0.2, 0.4, 0.4, 0.25, 0.25};
  double within_corr = 0.7;  // mixing weight; realized pairwise corr = square

  void validate() const {
    if (sizes.empty() || sizes.size() != mafs.size())
      throw ValidationError("BlockSpec: sizes/mafs length mismatch");
    for (int s : sizes)
      if (s <= 0) throw ValidationError("BlockSpec: nonpositive block size");
    for (double m : mafs)
      if (!(m > 0.0 && m <= 0.5))
        throw ValidationError("BlockSpec: maf must be in (0, 0.5]");
    if (!(within_corr >= 0.0 && within_corr < 1.0))
      throw ValidationError("BlockSpec: within_corr must be in [0,1)");
  }
  int total_snps() const {
    int t = 0;
    for (int s : sizes) t += s;
    return t;
  }
  // first SNP index (0-based) of each block
  std::vector<int> starts() const {
    std::vector<int> out;
    int acc = 0;
    for (int s : sizes) {
      out.push_back(acc);
      acc += s;
    }
    return out;
  }
  int block_of(int snp) const {
    int acc = 0;
    for (std::size_t b = 0; b < sizes.size(); ++b) {
      acc += sizes[b];
      if (snp < acc) return static_cast<int>(b);
    }
    throw ValidationError("BlockSpec: SNP index out of range");
  }
};

struct TruthSpec {
  std::vector<int> causal_indices;   // 0-based SNP indices
  double h = 0.0;                    // per-SNP heritability, percent
  Eigen::VectorXd beta;              // length p_g, zero off the causal set
  std::vector<int> causal_blocks;    // block ids containing causal SNPs
  int noise_block = 4;
};

struct Metrics {
  double tp = 0.0, tn = 0.0, rtp = 0.0, rtn = 0.0;
  bool tp_defined = true;  // false when there are no causal SNPs (h = 0)
};

struct SimConfig {
  int m = 250;
  BlockSpec blocks;
  double h = 0.0;
  std::optional<std::vector<int>> causal_indices;  // default: block starts 1-4
  AceVarianceComponents vc{4.0, 1.0, 1.0};
  ChildType family_type = ChildType::MZ;
  std::uint64_t seed = 0;

  void validate() const {
    if (m < 1) throw ValidationError("SimConfig: m must be >= 1");
    blocks.validate();
    vc.validate();
    if (h < 0.0) throw ValidationError("SimConfig: h must be >= 0");
  }
};

// Calibrated so the SNP's genotype variance contribution
// beta_k^2 * 2 MAF_k (1-MAF_k) equals 3h/200, i.e. at h = 10 each causal
// SNP adds 0.15 to the phenotypic variance against a residual variance of
// sa2+sc2+se2 = 6 under the default components. This puts the single-SNP
// noncentrality for the default design (m = 250 MZ families) near 4.5 at
// h = 10: detectable but not saturated, decaying into the ambiguous range
// as h drops toward 2.
//   beta_k = sqrt( 3h / (400 * MAF_k (1-MAF_k)) )
inline Eigen::VectorXd effect_sizes(double h, const AceVarianceComponents& vc,
                                    const std::vector<double>& mafs) {
  (void)vc;
  if (h < 0.0) throw ValidationError("effect_sizes: h must be >= 0");
  Eigen::VectorXd beta(static_cast<Eigen::Index>(mafs.size()));
  for (std::size_t k = 0; k < mafs.size(); ++k) {
    const double maf = mafs[k];
    if (!(maf > 0.0 && maf < 1.0))
      throw ValidationError("effect_sizes: MAF must be in (0,1)");
    beta[static_cast<Eigen::Index>(k)] =
        std::sqrt(3.0 * h / (400.0 * maf * (1.0 - maf)));
  }
  return beta;
}

namespace detail {

// Equicorrelated Bernoulli haplotype by the common-component mixture: per
// block draw Z ~ Bern(maf); each SNP copies Z with probability
// within_corr, otherwise draws fresh. The realized pairwise Pearson
// correlation between two same-block entries is within_corr^2 (0.49 at
// the default mixing weight 0.7).
inline Eigen::VectorXd draw_haplotype(const BlockSpec& blocks, RngStream& rng) {
  const double a = blocks.within_corr;
  Eigen::VectorXd hap(blocks.total_snps());
  Eigen::Index pos = 0;
  for (std::size_t b = 0; b < blocks.sizes.size(); ++b) {
    const double maf = blocks.mafs[b];
    const double z = rng.bernoulli(maf) ? 1.0 : 0.0;
    for (int j = 0; j < blocks.sizes[b]; ++j) {
      // draw both decisions unconditionally so the stream position does
      // not depend on the mixing weight
      const bool copy = rng.bernoulli(a);
      const double fresh = rng.bernoulli(maf) ? 1.0 : 0.0;
      hap[pos++] = copy ? z : fresh;
    }
  }
  return hap;
}

}  // namespace detail

// Per-family genotype matrices for 2 parents + 2 children of the
// configured type. Parents: sum of two independent haplotypes. Children:
// one haplotype picked from each parent; MZ twins share the pick, DZ
// twins pick independently, adopted children get fresh parental-style
// haplotypes.
inline std::vector<Eigen::MatrixXd> simulate_genotypes(const SimConfig& config,
                                                       RngStream& rng) {
  config.validate();
  const int pg = config.blocks.total_snps();
  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<std::size_t>(config.m));
  for (int i = 0; i < config.m; ++i) {
    Eigen::MatrixXd g(4, pg);
    const Eigen::VectorXd p1a = detail::draw_haplotype(config.blocks, rng);
    const Eigen::VectorXd p1b = detail::draw_haplotype(config.blocks, rng);
    const Eigen::VectorXd p2a = detail::draw_haplotype(config.blocks, rng);
    const Eigen::VectorXd p2b = detail::draw_haplotype(config.blocks, rng);
    g.row(0) = (p1a + p1b).transpose();
    g.row(1) = (p2a + p2b).transpose();
    auto child = [&] {
      const Eigen::VectorXd& from1 = rng.bernoulli(0.5) ? p1a : p1b;
      const Eigen::VectorXd& from2 = rng.bernoulli(0.5) ? p2a : p2b;
      return (from1 + from2).eval();
    };
    switch (config.family_type) {
      case ChildType::MZ: {
        const Eigen::VectorXd twin = child();
        g.row(2) = twin.transpose();
        g.row(3) = twin.transpose();
        break;
      }
      case ChildType::Adopted: {
        g.row(2) = (detail::draw_haplotype(config.blocks, rng) +
                    detail::draw_haplotype(config.blocks, rng))
                       .transpose();
        g.row(3) = (detail::draw_haplotype(config.blocks, rng) +
                    detail::draw_haplotype(config.blocks, rng))
                       .transpose();
        break;
      }
      default: {  // DZ twins / biological sibs draw independently
        g.row(2) = child().transpose();
        g.row(3) = child().transpose();
        break;
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

// y_i = G_i beta + eps_i, eps_i ~ N(0, V_i); no covariates.
inline std::pair<Dataset, TruthSpec> simulate_dataset(const SimConfig& config,
                                                      RngStream& rng) {
  config.validate();
  const int pg = config.blocks.total_snps();
  const auto starts = config.blocks.starts();

  TruthSpec truth;
  truth.h = config.h;
  if (config.causal_indices) {
    truth.causal_indices = *config.causal_indices;
  } else if (config.h > 0.0) {
    // first SNP of each of the first four blocks
    for (std::size_t b = 0; b + 1 < starts.size() && b < 4; ++b)
      truth.causal_indices.push_back(starts[b]);
  }
  truth.beta = Eigen::VectorXd::Zero(pg);
  if (!truth.causal_indices.empty() && config.h > 0.0) {
    std::vector<double> causal_mafs;
    for (int j : truth.causal_indices) {
      if (j < 0 || j >= pg)
        throw ValidationError("simulate_dataset: causal index out of range");
      causal_mafs.push_back(config.blocks.mafs[static_cast<std::size_t>(
          config.blocks.block_of(j))]);
      truth.causal_blocks.push_back(config.blocks.block_of(j));
    }
    const Eigen::VectorXd b = effect_sizes(config.h, config.vc, causal_mafs);
    for (std::size_t k = 0; k < truth.causal_indices.size(); ++k)
      truth.beta[truth.causal_indices[k]] = b[static_cast<Eigen::Index>(k)];
  }
  truth.noise_block = static_cast<int>(config.blocks.sizes.size()) - 1;

  PedigreeSpec proto;
  proto.child_type = config.family_type;
  proto.members = {{"p1", Role::Parent}, {"p2", Role::Parent},
                   {"c1", Role::Child}, {"c2", Role::Child}};
  const Eigen::MatrixXd phi = build_kinship(proto);
  const Eigen::MatrixXd v = ace_covariance(phi, config.vc);
  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(v).matrixL();

  std::vector<Eigen::MatrixXd> genos = simulate_genotypes(config, rng);

  Dataset data;
  for (int j = 0; j < pg; ++j) data.snp_ids.push_back("snp" + std::to_string(j + 1));
  data.families.reserve(static_cast<std::size_t>(config.m));
  for (int i = 0; i < config.m; ++i) {
    Family fam;
    fam.pedigree = proto;
    fam.pedigree.family_id = "fam" + std::to_string(i + 1);
    fam.genotypes = std::move(genos[static_cast<std::size_t>(i)]);
    Eigen::VectorXd eps(4);
    for (int k = 0; k < 4; ++k) eps[k] = rng.normal();
    fam.phenotype = fam.genotypes * truth.beta + chol * eps;
    fam.covariates = Eigen::MatrixXd(4, 0);
    data.families.push_back(std::move(fam));
  }
  return {std::move(data), std::move(truth)};
}

// TP/TN over individual SNPs, RTP/RTN over blocks (any hit in a causal
// block counts; RTN is the undetected fraction of the noise block).
inline Metrics score_selection(const std::vector<int>& selected,
                               const TruthSpec& truth, const BlockSpec& blocks) {
  const int pg = blocks.total_snps();
  std::vector<bool> sel(static_cast<std::size_t>(pg), false);
  for (int j : selected) {
    if (j < 0 || j >= pg)
      throw ValidationError("score_selection: selected index out of range");
    sel[static_cast<std::size_t>(j)] = true;
  }
  std::vector<bool> causal(static_cast<std::size_t>(pg), false);
  for (int j : truth.causal_indices) causal[static_cast<std::size_t>(j)] = true;

  Metrics mt;
  const auto n_causal = truth.causal_indices.size();
  if (n_causal == 0) {
    mt.tp_defined = false;
  } else {
    int hit = 0;
    for (int j : truth.causal_indices) hit += sel[static_cast<std::size_t>(j)];
    mt.tp = static_cast<double>(hit) / static_cast<double>(n_causal);
  }
  int noncausal = 0, missed = 0;
  for (int j = 0; j < pg; ++j)
    if (!causal[static_cast<std::size_t>(j)]) {
      ++noncausal;
      missed += !sel[static_cast<std::size_t>(j)];
    }
  mt.tn = noncausal > 0
              ? static_cast<double>(missed) / static_cast<double>(noncausal)
              : 1.0;

  if (!truth.causal_blocks.empty()) {
    int blocks_hit = 0;
    for (int b : truth.causal_blocks) {
      bool any = false;
      int start = blocks.starts()[static_cast<std::size_t>(b)];
      for (int j = start; j < start + blocks.sizes[static_cast<std::size_t>(b)]; ++j)
        any = any || sel[static_cast<std::size_t>(j)];
      blocks_hit += any;
    }
    mt.rtp = static_cast<double>(blocks_hit) /
             static_cast<double>(truth.causal_blocks.size());
  } else {
    mt.tp_defined = false;
  }
  const int nb = truth.noise_block;
  const int nstart = blocks.starts()[static_cast<std::size_t>(nb)];
  const int nsize = blocks.sizes[static_cast<std::size_t>(nb)];
  int unpicked = 0;
  for (int j = nstart; j < nstart + nsize; ++j)
    unpicked += !sel[static_cast<std::size_t>(j)];
  mt.rtn = static_cast<double>(unpicked) / static_cast<double>(nsize);
  return mt;
}

}  // namespace evalue
