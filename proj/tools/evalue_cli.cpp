// Command-line front end: simulate / select / study / plot.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "evalue/config.hpp"
#include "evalue/io.hpp"
#include "evalue/plots.hpp"
#include "evalue/study.hpp"

namespace {

evalue::RunConfig load_config(const std::string& path) {
  if (path.empty()) return evalue::RunConfig{};
  return evalue::load_run_config(evalue::ConfigDoc::parse_file(path));
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  evalue::RunConfig rc = load_config(config_path);
  evalue::SimConfig sim = rc.sim;
  sim.h = rc.h_list.front();
  evalue::RngStream rng =
      evalue::RngStream(rc.seed).derive({0, 0});  // h index 0, replication 0
  evalue::RngStream train_rng = rng.derive(1);
  auto [data, truth] = evalue::simulate_dataset(sim, train_rng);
  evalue::io::write_dataset(data, out_dir);
  std::ofstream truthf(std::filesystem::path(out_dir) / "truth.csv");
  truthf << "snp_id,beta\n";
  for (int j : truth.causal_indices)
    truthf << data.snp_ids[static_cast<std::size_t>(j)] << ","
           << evalue::io::format_double(truth.beta[j]) << "\n";
  std::cout << "wrote " << data.families.size() << " families, "
            << data.snp_ids.size() << " SNPs to " << out_dir << "\n";
  return 0;
}

int cmd_select(const std::string& ped, const std::string& pheno,
               const std::string& geno, const std::string& covar,
               const std::string& config_path, const std::string& out_dir,
               bool dump) {
  evalue::RunConfig rc = load_config(config_path);
  evalue::io::IngestSummary summary;
  std::optional<std::string> covar_opt;
  if (!covar.empty()) covar_opt = covar;
  const evalue::Dataset data =
      evalue::io::ingest(ped, pheno, geno, covar_opt, &summary);
  std::cout << "ingested " << summary.families << " families ("
            << summary.individuals << " individuals, "
            << summary.dropped_families << " dropped for missingness)\n";
  const evalue::SelectionResult result =
      evalue::run_select(data, rc, out_dir, dump);
  std::cout << "selected " << result.selected.size() << " SNPs at s="
            << result.winning_s << ", t=" << result.winning_t << "\n";
  return 0;
}

int cmd_study(const std::string& config_path, const std::string& out_dir) {
  evalue::RunConfig rc = load_config(config_path);
  evalue::run_study(rc, out_dir);
  std::cout << "study complete; reports in " << out_dir << "\n";
  return 0;
}

int cmd_plot(const std::string& in_dir, const std::string& out_dir) {
  evalue::plots::emit_plots(in_dir, out_dir);
  std::cout << "plots written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantile e-value SNP selection for family-structured mixed models"};
  app.require_subcommand(1);

  std::string config_path, out_dir, in_dir;
  std::string ped, pheno, geno, covar;
  bool dump = false;

  auto* sim = app.add_subcommand("simulate", "generate a synthetic familial-GWAS dataset");
  sim->add_option("--config", config_path, "config file");
  sim->add_option("--out", out_dir, "output directory")->required();

  auto* sel = app.add_subcommand("select", "run e-value selection on CSV data");
  sel->add_option("--ped", ped, "pedigree.csv")->required();
  sel->add_option("--pheno", pheno, "phenotype.csv")->required();
  sel->add_option("--geno", geno, "genotype.csv")->required();
  sel->add_option("--covar", covar, "covariates.csv (optional)");
  sel->add_option("--config", config_path, "config file");
  sel->add_option("--out", out_dir, "output directory")->required();
  sel->add_flag("--dump-distributions", dump,
                "write full/drop-one score distributions for plotting");

  auto* study = app.add_subcommand("study", "run the replication study");
  study->add_option("--config", config_path, "config file");
  study->add_option("--out", out_dir, "output directory")->required();

  auto* plot = app.add_subcommand("plot", "render plots from select output");
  plot->add_option("--in", in_dir, "directory with select output")->required();
  plot->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config_path, out_dir);
    if (sel->parsed())
      return cmd_select(ped, pheno, geno, covar, config_path, out_dir, dump);
    if (study->parsed()) return cmd_study(config_path, out_dir);
    if (plot->parsed()) return cmd_plot(in_dir, out_dir);
  } catch (const evalue::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const evalue::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
