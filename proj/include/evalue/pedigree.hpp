#pragma once

#include <Eigen/Dense>
#include <set>
#include <string>
#include <vector>

#include "evalue/common.hpp"

namespace evalue {

enum class Role { Parent, Child };

enum class ChildType { MZ, DZ, Adopted, BioSib, Mixed };

struct Member {
  std::string id;
  Role role = Role::Child;
  // Only consulted for ChildType::Mixed; Adopted implies true for all
  // children, the other types imply false.
  bool adopted = false;
};

struct PedigreeSpec {
  std::string family_id;
  std::vector<Member> members;
  ChildType child_type = ChildType::MZ;

  void validate() const {
    if (members.empty())
      throw ValidationError("family " + family_id + ": no members");
    int parents = 0;
    std::set<std::string> ids;
    for (const auto& m : members) {
      if (m.role == Role::Parent) ++parents;
      if (!ids.insert(m.id).second)
        throw ValidationError("family " + family_id + ": duplicate member id '" +
                              m.id + "'");
    }
    if (parents > 2)
      throw ValidationError("family " + family_id + ": more than 2 parents");
  }
};

// Symmetric matrix of twice-kinship coefficients, unit diagonal.
using RelationshipMatrix = Eigen::MatrixXd;

struct AceVarianceComponents {
  double sigma_a2 = 0.0;  // polygenic
  double sigma_c2 = 0.0;  // shared environment
  double sigma_e2 = 1.0;  // unique environment

  void validate() const {
    if (sigma_a2 < 0.0 || sigma_c2 < 0.0)
      throw ValidationError("variance components must be nonnegative");
    if (sigma_e2 <= 0.0)
      throw ValidationError("sigma_e2 must be strictly positive");
  }
  double total() const { return sigma_a2 + sigma_c2 + sigma_e2; }
};

// Twice-kinship between two members of the same nuclear family.
inline double twice_kinship(const PedigreeSpec& ped, std::size_t a, std::size_t b) {
  if (a == b) return 1.0;
  const Member& ma = ped.members[a];
  const Member& mb = ped.members[b];

  auto is_adopted = [&](const Member& m) {
    if (m.role == Role::Parent) return false;
    switch (ped.child_type) {
      case ChildType::Adopted: return true;
      case ChildType::Mixed: return m.adopted;
      default: return false;
    }
  };

  if (ma.role == Role::Parent && mb.role == Role::Parent) return 0.0;
  if (ma.role != mb.role)  // parent-child
    return is_adopted(ma.role == Role::Child ? ma : mb) ? 0.0 : 0.5;

  // child-child
  if (is_adopted(ma) || is_adopted(mb)) return 0.0;
  if (ped.child_type == ChildType::MZ) {
    // The first two non-adopted children are the identical twin pair;
    // any further siblings are ordinary full sibs.
    std::size_t seen = 0, rank_a = 0, rank_b = 0;
    for (std::size_t k = 0; k < ped.members.size(); ++k) {
      const Member& m = ped.members[k];
      if (m.role != Role::Child || is_adopted(m)) continue;
      ++seen;
      if (k == a) rank_a = seen;
      if (k == b) rank_b = seen;
    }
    if (rank_a <= 2 && rank_b <= 2) return 1.0;
  }
  return 0.5;  // DZ twins and biological siblings
}

// Relationship matrix Phi for one family: unit diagonal, parent-parent 0,
// parent-child 1/2 (0 for adopted), MZ twin pair 1, DZ/full sibs 1/2,
// adopted children unrelated to everyone.
inline RelationshipMatrix build_kinship(const PedigreeSpec& ped) {
  ped.validate();
  const auto n = static_cast<Eigen::Index>(ped.members.size());
  RelationshipMatrix phi(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = twice_kinship(ped, static_cast<std::size_t>(i),
                                     static_cast<std::size_t>(j));
      phi(i, j) = v;
      phi(j, i) = v;
    }
  return phi;
}

// V_i = sigma_a^2 Phi + sigma_c^2 11^T + sigma_e^2 I
inline Eigen::MatrixXd ace_covariance(const RelationshipMatrix& phi,
                                      const AceVarianceComponents& vc) {
  vc.validate();
  if (phi.rows() != phi.cols())
    throw ValidationError("relationship matrix must be square");
  const Eigen::Index n = phi.rows();
  Eigen::MatrixXd v = vc.sigma_a2 * phi;
  v.array() += vc.sigma_c2;
  v.diagonal().array() += vc.sigma_e2;
  (void)n;
  return v;
}

struct Family {
  PedigreeSpec pedigree;
  Eigen::VectorXd phenotype;    // length n_i
  Eigen::MatrixXd genotypes;    // n_i x p_g, entries in {0,1,2}
  Eigen::MatrixXd covariates;   // n_i x p
};

struct Dataset {
  std::vector<Family> families;
  std::vector<std::string> snp_ids;
  std::vector<std::string> covariate_ids;

  std::size_t family_count() const { return families.size(); }
  Eigen::Index snp_count() const { return static_cast<Eigen::Index>(snp_ids.size()); }
  Eigen::Index covariate_count() const {
    return static_cast<Eigen::Index>(covariate_ids.size());
  }
  Eigen::Index individual_count() const {
    Eigen::Index n = 0;
    for (const auto& f : families) n += f.phenotype.size();
    return n;
  }

  void validate() const {
    const Eigen::Index pg = snp_count();
    const Eigen::Index pc = covariate_count();
    for (const auto& f : families) {
      f.pedigree.validate();
      const auto n = static_cast<Eigen::Index>(f.pedigree.members.size());
      if (f.phenotype.size() != n || f.genotypes.rows() != n ||
          f.covariates.rows() != n)
        throw ValidationError("family " + f.pedigree.family_id +
                              ": row count mismatch");
      if (f.genotypes.cols() != pg)
        throw ValidationError("family " + f.pedigree.family_id +
                              ": genotype column count mismatch");
      if (f.covariates.cols() != pc)
        throw ValidationError("family " + f.pedigree.family_id +
                              ": covariate column count mismatch");
      for (Eigen::Index r = 0; r < f.genotypes.rows(); ++r)
        for (Eigen::Index c = 0; c < f.genotypes.cols(); ++c) {
          const double g = f.genotypes(r, c);
          if (g != 0.0 && g != 1.0 && g != 2.0)
            throw ValidationError("family " + f.pedigree.family_id +
                                  ": genotype value outside {0,1,2}");
        }
    }
  }
};

}  // namespace evalue
