#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "evalue/common.hpp"
#include "evalue/pedigree.hpp"

namespace evalue {
namespace io {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // line numbers = index + 2
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  CsvTable t;
  t.path = path;
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError(path + ": empty file");
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split_csv_line(line));
  }
  return t;
}

inline double parse_double(const CsvTable& t, std::size_t row, std::size_t col) {
  const std::string& s = t.rows[row][col];
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(t.path + ": line " + std::to_string(row + 2) +
                          ", column " + std::to_string(col + 1) +
                          ": malformed number '" + s + "'");
  }
}

// Shortest round-trippable decimal representation.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{})
    throw NumericalError("format_double: conversion failed");
  return std::string(buf, end);
}

inline Role parse_role(const std::string& s, const std::string& ctx) {
  if (s == "parent") return Role::Parent;
  if (s == "child" || s == "adopted_child") return Role::Child;
  throw ValidationError(ctx + ": unknown role '" + s + "'");
}

inline ChildType parse_child_type(const std::string& s, const std::string& ctx) {
  if (s == "MZ") return ChildType::MZ;
  if (s == "DZ") return ChildType::DZ;
  if (s == "ADOPTED") return ChildType::Adopted;
  if (s == "BIO_SIB") return ChildType::BioSib;
  if (s == "MIXED") return ChildType::Mixed;
  throw ValidationError(ctx + ": unknown child_type '" + s + "'");
}

inline const char* role_name(const Member& m) {
  if (m.role == Role::Parent) return "parent";
  return m.adopted ? "adopted_child" : "child";
}

inline const char* child_type_name(ChildType t) {
  switch (t) {
    case ChildType::MZ: return "MZ";
    case ChildType::DZ: return "DZ";
    case ChildType::Adopted: return "ADOPTED";
    case ChildType::BioSib: return "BIO_SIB";
    case ChildType::Mixed: return "MIXED";
  }
  return "MZ";
}

struct IngestSummary {
  std::size_t families = 0;
  std::size_t individuals = 0;
  std::size_t dropped_families = 0;  // families with missing values
};

// CSV ingestion. pedigree.csv drives family membership and member order;
// phenotype/genotype/covariate rows are cross-referenced by
// (family_id, member_id). Families containing any missing (empty) value
// are dropped; malformed values are hard errors.
inline Dataset ingest(const std::string& pedigree_path,
                      const std::string& phenotype_path,
                      const std::string& genotype_path,
                      const std::optional<std::string>& covariate_path = {},
                      IngestSummary* summary = nullptr) {
  const CsvTable ped = read_csv(pedigree_path);
  if (ped.header.size() < 4)
    throw ValidationError(pedigree_path +
                          ": expected header family_id,member_id,role,child_type");

  struct PendingFamily {
    PedigreeSpec spec;
    std::map<std::string, std::size_t> member_pos;
  };
  std::vector<PendingFamily> fams;
  std::map<std::string, std::size_t> fam_pos;
  for (std::size_t r = 0; r < ped.rows.size(); ++r) {
    const auto& row = ped.rows[r];
    const std::string ctx =
        pedigree_path + ": line " + std::to_string(r + 2);
    if (row.size() < 4) throw ValidationError(ctx + ": too few columns");
    const std::string& fid = row[0];
    auto [it, inserted] = fam_pos.try_emplace(fid, fams.size());
    if (inserted) {
      fams.emplace_back();
      fams.back().spec.family_id = fid;
      fams.back().spec.child_type = parse_child_type(row[3], ctx);
    }
    PendingFamily& pf = fams[it->second];
    Member m;
    m.id = row[1];
    m.role = parse_role(row[2], ctx);
    m.adopted = (row[2] == "adopted_child");
    if (!pf.member_pos.emplace(m.id, pf.spec.members.size()).second)
      throw ValidationError(ctx + ": duplicate member id '" + m.id +
                            "' in family " + fid);
    pf.spec.members.push_back(std::move(m));
  }

  auto locate = [&](const CsvTable& t, std::size_t row) {
    const std::string ctx = t.path + ": line " + std::to_string(row + 2);
    if (t.rows[row].size() < 2) throw ValidationError(ctx + ": too few columns");
    auto fit = fam_pos.find(t.rows[row][0]);
    if (fit == fam_pos.end())
      throw ValidationError(ctx + ": family id '" + t.rows[row][0] +
                            "' not present in pedigree file");
    const PendingFamily& pf = fams[fit->second];
    auto mit = pf.member_pos.find(t.rows[row][1]);
    if (mit == pf.member_pos.end())
      throw ValidationError(ctx + ": member id '" + t.rows[row][1] +
                            "' not present in family " + t.rows[row][0]);
    return std::pair<std::size_t, std::size_t>(fit->second, mit->second);
  };

  const CsvTable pheno = read_csv(phenotype_path);
  const CsvTable geno = read_csv(genotype_path);
  if (geno.header.size() < 3)
    throw ValidationError(genotype_path + ": no SNP columns");
  std::vector<std::string> snp_ids(geno.header.begin() + 2, geno.header.end());

  std::vector<std::string> covariate_ids;
  std::optional<CsvTable> covar;
  if (covariate_path) {
    covar = read_csv(*covariate_path);
    if (covar->header.size() < 2)
      throw ValidationError(*covariate_path + ": malformed header");
    covariate_ids.assign(covar->header.begin() + 2, covar->header.end());
  }

  const std::size_t m = fams.size();
  const auto pg = static_cast<Eigen::Index>(snp_ids.size());
  const auto pc = static_cast<Eigen::Index>(covariate_ids.size());
  std::vector<Family> built(m);
  std::vector<bool> missing(m, false);
  std::vector<std::vector<bool>> pheno_seen(m), geno_seen(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto n = static_cast<Eigen::Index>(fams[i].spec.members.size());
    built[i].pedigree = fams[i].spec;
    built[i].phenotype = Eigen::VectorXd::Zero(n);
    built[i].genotypes = Eigen::MatrixXd::Zero(n, pg);
    built[i].covariates = Eigen::MatrixXd::Zero(n, pc);
    pheno_seen[i].assign(static_cast<std::size_t>(n), false);
    geno_seen[i].assign(static_cast<std::size_t>(n), false);
  }

  for (std::size_t r = 0; r < pheno.rows.size(); ++r) {
    auto [fi, mi] = locate(pheno, r);
    if (pheno.rows[r].size() < 3 || pheno.rows[r][2].empty()) {
      missing[fi] = true;
      continue;
    }
    built[fi].phenotype[static_cast<Eigen::Index>(mi)] = parse_double(pheno, r, 2);
    pheno_seen[fi][mi] = true;
  }
  for (std::size_t r = 0; r < geno.rows.size(); ++r) {
    auto [fi, mi] = locate(geno, r);
    if (geno.rows[r].size() != snp_ids.size() + 2)
      throw ValidationError(geno.path + ": line " + std::to_string(r + 2) +
                            ": wrong number of SNP columns");
    for (Eigen::Index c = 0; c < pg; ++c) {
      const std::string& cell = geno.rows[r][static_cast<std::size_t>(c) + 2];
      if (cell.empty()) {
        missing[fi] = true;
        continue;
      }
      const double g = parse_double(geno, r, static_cast<std::size_t>(c) + 2);
      if (g != 0.0 && g != 1.0 && g != 2.0)
        throw ValidationError(geno.path + ": line " + std::to_string(r + 2) +
                              ", column " + std::to_string(c + 3) +
                              ": genotype value outside {0,1,2}");
      built[fi].genotypes(static_cast<Eigen::Index>(mi), c) = g;
    }
    geno_seen[fi][mi] = true;
  }
  if (covar) {
    for (std::size_t r = 0; r < covar->rows.size(); ++r) {
      auto [fi, mi] = locate(*covar, r);
      if (covar->rows[r].size() != covariate_ids.size() + 2)
        throw ValidationError(covar->path + ": line " + std::to_string(r + 2) +
                              ": wrong number of covariate columns");
      for (Eigen::Index c = 0; c < pc; ++c) {
        const std::string& cell = covar->rows[r][static_cast<std::size_t>(c) + 2];
        if (cell.empty()) {
          missing[fi] = true;
          continue;
        }
        built[fi].covariates(static_cast<Eigen::Index>(mi), c) =
            parse_double(*covar, r, static_cast<std::size_t>(c) + 2);
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < pheno_seen[i].size(); ++k)
      if (!pheno_seen[i][k] || !geno_seen[i][k]) missing[i] = true;

  Dataset out;
  out.snp_ids = std::move(snp_ids);
  out.covariate_ids = std::move(covariate_ids);
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (missing[i]) {
      ++dropped;
      continue;
    }
    out.families.push_back(std::move(built[i]));
  }
  if (out.families.empty())
    throw ValidationError("ingest: no complete families after dropping " +
                          std::to_string(dropped) + " with missing values");
  out.validate();
  if (summary) {
    summary->families = out.families.size();
    summary->individuals = static_cast<std::size_t>(out.individual_count());
    summary->dropped_families = dropped;
  }
  return out;
}

// Write a Dataset to the four CSV files in out_dir (covariates.csv only
// when covariates are present). Round-trips exactly through ingest().
inline void write_dataset(const Dataset& data, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::ofstream ped(fs::path(out_dir) / "pedigree.csv");
  std::ofstream pheno(fs::path(out_dir) / "phenotype.csv");
  std::ofstream geno(fs::path(out_dir) / "genotype.csv");
  ped << "family_id,member_id,role,child_type\n";
  pheno << "family_id,member_id,value\n";
  geno << "family_id,member_id";
  for (const auto& s : data.snp_ids) geno << "," << s;
  geno << "\n";
  std::ofstream covar;
  const bool have_covar = data.covariate_count() > 0;
  if (have_covar) {
    covar.open(fs::path(out_dir) / "covariates.csv");
    covar << "family_id,member_id";
    for (const auto& c : data.covariate_ids) covar << "," << c;
    covar << "\n";
  }
  for (const auto& f : data.families) {
    for (std::size_t k = 0; k < f.pedigree.members.size(); ++k) {
      const Member& mem = f.pedigree.members[k];
      const auto ki = static_cast<Eigen::Index>(k);
      ped << f.pedigree.family_id << "," << mem.id << "," << role_name(mem)
          << "," << child_type_name(f.pedigree.child_type) << "\n";
      pheno << f.pedigree.family_id << "," << mem.id << ","
            << format_double(f.phenotype[ki]) << "\n";
      geno << f.pedigree.family_id << "," << mem.id;
      for (Eigen::Index c = 0; c < f.genotypes.cols(); ++c)
        geno << "," << static_cast<int>(f.genotypes(ki, c));
      geno << "\n";
      if (have_covar) {
        covar << f.pedigree.family_id << "," << mem.id;
        for (Eigen::Index c = 0; c < f.covariates.cols(); ++c)
          covar << "," << format_double(f.covariates(ki, c));
        covar << "\n";
      }
    }
  }
}

}  // namespace io
}  // namespace evalue
