#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "evalue/common.hpp"
#include "evalue/pedigree.hpp"
#include "evalue/selector.hpp"
#include "evalue/simgen.hpp"

namespace evalue {

// Flat TOML-style key/value document: [section] headers, key = value
// lines, # comments, scalar and [a, b, c] array values.
class ConfigDoc {
 public:
  static ConfigDoc parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
  }

  static ConfigDoc parse(const std::string& text,
                         const std::string& origin = "<string>") {
    ConfigDoc doc;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string t = trim(strip_comment(line));
      if (t.empty()) continue;
      if (t.front() == '[') {
        if (t.back() != ']')
          throw ValidationError(origin + ": line " + std::to_string(lineno) +
                                ": malformed section header");
        section = trim(t.substr(1, t.size() - 2));
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos)
        throw ValidationError(origin + ": line " + std::to_string(lineno) +
                              ": expected key = value");
      std::string key = trim(t.substr(0, eq));
      if (!section.empty()) key = section + "." + key;
      doc.values_[key] = trim(t.substr(eq + 1));
    }
    return doc;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    return unquote(it->second);
  }

  double get_double(const std::string& key, double dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    return to_double(it->second, key);
  }

  std::int64_t get_int(const std::string& key, std::int64_t dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    try {
      return std::stoll(it->second);
    } catch (const std::exception&) {
      throw ValidationError("config key '" + key + "': expected integer, got '" +
                            it->second + "'");
    }
  }

  bool get_bool(const std::string& key, bool dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    if (it->second == "true") return true;
    if (it->second == "false") return false;
    throw ValidationError("config key '" + key + "': expected true/false");
  }

  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    std::vector<double> out;
    for (const auto& tok : split_array(it->second, key))
      out.push_back(to_double(tok, key));
    return out;
  }

  std::vector<int> get_int_list(const std::string& key,
                                const std::vector<int>& dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    std::vector<int> out;
    for (const auto& tok : split_array(it->second, key))
      out.push_back(static_cast<int>(to_double(tok, key)));
    return out;
  }

 private:
  static std::string strip_comment(const std::string& s) {
    const auto pos = s.find('#');
    return pos == std::string::npos ? s : s.substr(0, pos);
  }
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }
  static std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
      return s.substr(1, s.size() - 2);
    return s;
  }
  static double to_double(const std::string& s, const std::string& key) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ValidationError("config key '" + key + "': expected number, got '" +
                            s + "'");
    }
  }
  static std::vector<std::string> split_array(const std::string& s,
                                              const std::string& key) {
    std::string t = trim(s);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']')
      throw ValidationError("config key '" + key + "': expected [a, b, ...]");
    t = t.substr(1, t.size() - 2);
    std::vector<std::string> out;
    std::string cur;
    for (char c : t) {
      if (c == ',') {
        out.push_back(trim(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    const std::string last = trim(cur);
    if (!last.empty()) out.push_back(last);
    return out;
  }

  std::map<std::string, std::string> values_;
};

struct RunConfig {
  SimConfig sim;
  std::vector<double> h_list{10.0};
  SelectionConfig selection;
  std::vector<EvaluationKind> kinds{EvaluationKind::E2};
  bool run_mbic2 = true;
  bool run_rfgls_bh = true;
  double bh_level = 0.05;
  double mbic2_penalty_constant = 0.1;
  int replications = 1;
  double train_fraction = 0.75;
  std::uint64_t seed = 1;

  void validate() const {
    sim.validate();
    selection.validate();
    if (replications < 1)
      throw ValidationError("RunConfig: replications must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
      throw ValidationError("RunConfig: train_fraction must be in (0,1)");
    if (kinds.empty()) throw ValidationError("RunConfig: no evaluation kinds");
  }
};

inline EvaluationKind parse_kind(const std::string& s) {
  if (s == "E1") return EvaluationKind::E1;
  if (s == "E2") return EvaluationKind::E2;
  throw ValidationError("unknown evaluation kind '" + s + "' (expected E1 or E2)");
}

inline ChildType io_parse_family_type(const std::string& s) {
  if (s == "MZ") return ChildType::MZ;
  if (s == "DZ") return ChildType::DZ;
  if (s == "ADOPTED") return ChildType::Adopted;
  if (s == "BIO_SIB") return ChildType::BioSib;
  throw ValidationError("unknown family_type '" + s + "'");
}

inline RunConfig load_run_config(const ConfigDoc& doc) {
  RunConfig rc;
  rc.seed = static_cast<std::uint64_t>(doc.get_int("seed", 1));
  rc.replications = static_cast<int>(doc.get_int("replications", 1));
  rc.train_fraction = doc.get_double("train_fraction", 0.75);

  rc.sim.m = static_cast<int>(doc.get_int("simulation.families", 250));
  rc.sim.h = doc.get_double("simulation.h", 10.0);
  rc.h_list = doc.get_double_list("simulation.h_list", {rc.sim.h});
  rc.sim.seed = rc.seed;
  {
    std::vector<int> sizes = doc.get_int_list("simulation.block_sizes",
                                              rc.sim.blocks.sizes);
    std::vector<double> mafs =
        doc.get_double_list("simulation.block_mafs", rc.sim.blocks.mafs);
    rc.sim.blocks.sizes = sizes;
    rc.sim.blocks.mafs = mafs;
    rc.sim.blocks.within_corr =
        doc.get_double("simulation.within_corr", rc.sim.blocks.within_corr);
  }
  rc.sim.vc.sigma_a2 = doc.get_double("simulation.sigma_a2", 4.0);
  rc.sim.vc.sigma_c2 = doc.get_double("simulation.sigma_c2", 1.0);
  rc.sim.vc.sigma_e2 = doc.get_double("simulation.sigma_e2", 1.0);
  {
    const std::string ft = doc.get_string("simulation.family_type", "MZ");
    rc.sim.family_type = io_parse_family_type(ft);
  }
  if (doc.has("simulation.causal_indices")) {
    std::vector<int> one_based = doc.get_int_list("simulation.causal_indices", {});
    std::vector<int> zero_based;
    for (int j : one_based) zero_based.push_back(j - 1);
    rc.sim.causal_indices = zero_based;
  }

  rc.selection.q_list = doc.get_double_list("selection.q_list",
                                            rc.selection.q_list);
  rc.selection.t_grid = doc.get_double_list("selection.t_grid",
                                            rc.selection.t_grid);
  rc.selection.s_grid = doc.get_double_list("selection.s_grid",
                                            rc.selection.s_grid);
  rc.selection.R = static_cast<int>(doc.get_int("selection.R", 500));
  rc.selection.R1 = static_cast<int>(doc.get_int("selection.R1", 500));
  {
    std::vector<EvaluationKind> kinds;
    const std::string k = doc.get_string("selection.kind", "E2");
    if (k == "both") {
      kinds = {EvaluationKind::E1, EvaluationKind::E2};
    } else {
      kinds = {parse_kind(k)};
    }
    rc.kinds = kinds;
    rc.selection.kind = kinds.front();
  }

  rc.run_mbic2 = doc.get_bool("baselines.mbic2", true);
  rc.run_rfgls_bh = doc.get_bool("baselines.rfgls_bh", true);
  rc.bh_level = doc.get_double("baselines.bh_level", 0.05);
  rc.mbic2_penalty_constant =
      doc.get_double("baselines.mbic2_penalty_constant", 0.1);
  rc.validate();
  return rc;
}

}  // namespace evalue
