#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "evalue/simgen.hpp"

using namespace evalue;

TEST_CASE("effect size formula pinned values") {
  const AceVarianceComponents vc{4.0, 1.0, 1.0};
  REQUIRE(effect_sizes(0.0, vc, {0.2, 0.4})[0] == 0.0);
  REQUIRE(effect_sizes(10.0, vc, {0.2})[0] ==
          Catch::Approx(std::sqrt(30.0 / 64.0)).epsilon(1e-12));
  REQUIRE(effect_sizes(10.0, vc, {0.4})[0] ==
          Catch::Approx(std::sqrt(30.0 / 96.0)).epsilon(1e-12));
  // genotype variance contribution is exactly 3h/200
  REQUIRE(effect_sizes(10.0, vc, {0.2})[0] * effect_sizes(10.0, vc, {0.2})[0] *
              2.0 * 0.2 * 0.8 ==
          Catch::Approx(0.15).epsilon(1e-12));
  REQUIRE(effect_sizes(10.0, vc, {0.2})[0] == Catch::Approx(0.68465).margin(1e-5));
  REQUIRE(effect_sizes(10.0, vc, {0.4})[0] == Catch::Approx(0.55902).margin(1e-5));
}

TEST_CASE("genotype entries are always 0, 1 or 2") {
  SimConfig cfg;
  cfg.m = 50;
  RngStream rng(1);
  for (const auto& g : simulate_genotypes(cfg, rng))
    for (Eigen::Index r = 0; r < g.rows(); ++r)
      for (Eigen::Index c = 0; c < g.cols(); ++c)
        REQUIRE((g(r, c) == 0.0 || g(r, c) == 1.0 || g(r, c) == 2.0));
}

TEST_CASE("allele frequency, within-block correlation, Hardy-Weinberg") {
  SimConfig cfg;
  cfg.m = 10000;
  RngStream rng(2);
  const auto genos = simulate_genotypes(cfg, rng);

  // parent allele frequency of block-1 SNPs (maf 0.2)
  double sum = 0.0;
  double hom = 0.0;
  Eigen::VectorXd snp0(2 * cfg.m), snp1(2 * cfg.m);
  Eigen::VectorXd cross(2 * cfg.m);  // block-2 SNP for independence check
  Eigen::Index at = 0;
  for (const auto& g : genos)
    for (int parent = 0; parent < 2; ++parent) {
      sum += g(parent, 0);
      hom += (g(parent, 0) == 2.0);
      snp0[at] = g(parent, 0);
      snp1[at] = g(parent, 1);
      cross[at] = g(parent, 6);
      ++at;
    }
  const double n = static_cast<double>(2 * cfg.m);
  REQUIRE(sum / (2.0 * n) == Catch::Approx(0.2).margin(0.01));
  // P(genotype = 2) = maf^2 = 0.04; 3 binomial standard errors
  const double se2 = std::sqrt(0.04 * 0.96 / n);
  REQUIRE(hom / n == Catch::Approx(0.04).margin(3.0 * se2 + 1e-12));

  auto corr = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double ma = a.mean(), mb = b.mean();
    const double cov = ((a.array() - ma) * (b.array() - mb)).mean();
    const double va = (a.array() - ma).square().mean();
    const double vb = (b.array() - mb).square().mean();
    return cov / std::sqrt(va * vb);
  };
  // realized within-block correlation is the square of the mixing weight
  REQUIRE(corr(snp0, snp1) == Catch::Approx(0.49).margin(0.02));
  REQUIRE(corr(snp0, cross) == Catch::Approx(0.0).margin(0.02));
}

TEST_CASE("phenotype moments at h = 0 match the ACE variance components") {
  SimConfig cfg;
  cfg.m = 4000;
  cfg.h = 0.0;
  RngStream rng(3);
  const Dataset d = simulate_dataset(cfg, rng).first;
  double sum = 0.0, ssq = 0.0;
  double twin_cov = 0.0;
  const double n = 4.0 * static_cast<double>(cfg.m);
  for (const auto& f : d.families) sum += f.phenotype.sum();
  const double mean = sum / n;
  for (const auto& f : d.families) {
    ssq += (f.phenotype.array() - mean).square().sum();
    twin_cov += (f.phenotype[2] - mean) * (f.phenotype[3] - mean);
  }
  REQUIRE(ssq / n == Catch::Approx(6.0).margin(0.3));
  REQUIRE(twin_cov / cfg.m == Catch::Approx(5.0).margin(0.3));
}

TEST_CASE("MZ twins share genotypes, DZ twins differ somewhere") {
  SimConfig cfg;
  cfg.m = 200;
  RngStream rng(4);
  for (const auto& g : simulate_genotypes(cfg, rng))
    REQUIRE(g.row(2) == g.row(3));
  cfg.family_type = ChildType::DZ;
  RngStream rng2(5);
  int differing = 0;
  for (const auto& g : simulate_genotypes(cfg, rng2))
    differing += (g.row(2) != g.row(3));
  REQUIRE(differing > 100);
}

TEST_CASE("simulation is deterministic in the seed") {
  SimConfig cfg;
  cfg.m = 20;
  cfg.h = 5.0;
  RngStream a(77), b(77);
  const Dataset da = simulate_dataset(cfg, a).first;
  const Dataset db = simulate_dataset(cfg, b).first;
  for (std::size_t i = 0; i < da.families.size(); ++i) {
    REQUIRE(da.families[i].phenotype == db.families[i].phenotype);
    REQUIRE(da.families[i].genotypes == db.families[i].genotypes);
  }
}

TEST_CASE("default truth layout: first SNP of each of the first four blocks") {
  SimConfig cfg;
  cfg.m = 5;
  cfg.h = 10.0;
  RngStream rng(6);
  const TruthSpec truth = simulate_dataset(cfg, rng).second;
  REQUIRE(truth.causal_indices == std::vector<int>{0, 6, 10, 16});
  REQUIRE(truth.noise_block == 4);
  for (int j = 0; j < 50; ++j) {
    const bool causal = std::count(truth.causal_indices.begin(),
                                   truth.causal_indices.end(), j) > 0;
    if (!causal) REQUIRE(truth.beta[j] == 0.0);
  }
}

TEST_CASE("selection scoring pinned examples") {
  BlockSpec blocks;  // 1-6, 7-10, 11-16, 17-20, 21-50 in 1-based terms
  TruthSpec truth;
  truth.h = 10.0;
  truth.causal_indices = {0, 6, 10, 16};
  truth.causal_blocks = {0, 1, 2, 3};
  truth.noise_block = 4;

  const Metrics exact = score_selection({0, 6, 10, 16}, truth, blocks);
  REQUIRE(exact.tp == 1.0);
  REQUIRE(exact.tn == 1.0);
  REQUIRE(exact.rtp == 1.0);
  REQUIRE(exact.rtn == 1.0);

  const Metrics none = score_selection({}, truth, blocks);
  REQUIRE(none.tp == 0.0);
  REQUIRE(none.tn == 1.0);
  REQUIRE(none.rtp == 0.0);
  REQUIRE(none.rtn == 1.0);

  // 1-based {1,7,21} = 0-based {0,6,20}
  const Metrics partial = score_selection({0, 6, 20}, truth, blocks);
  REQUIRE(partial.tp == Catch::Approx(0.5));
  REQUIRE(partial.tn == Catch::Approx(45.0 / 46.0));
  REQUIRE(partial.rtp == Catch::Approx(0.5));
  REQUIRE(partial.rtn == Catch::Approx(29.0 / 30.0));
}

TEST_CASE("metrics ignore ordering of the selected set") {
  BlockSpec blocks;
  TruthSpec truth;
  truth.causal_indices = {0, 6, 10, 16};
  truth.causal_blocks = {0, 1, 2, 3};
  const Metrics a = score_selection({16, 0, 20, 6}, truth, blocks);
  const Metrics b = score_selection({0, 6, 16, 20}, truth, blocks);
  REQUIRE(a.tp == b.tp);
  REQUIRE(a.tn == b.tn);
  REQUIRE(a.rtp == b.rtp);
  REQUIRE(a.rtn == b.rtn);
}
