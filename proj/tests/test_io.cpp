#include <filesystem>
#include <fstream>
#include <string>

#include <catch2/catch_amalgamated.hpp>

#include "evalue/config.hpp"
#include "evalue/io.hpp"
#include "evalue/rng.hpp"
#include "evalue/simgen.hpp"

using namespace evalue;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("evalue_io_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Two MZ twin families, two SNPs, one covariate.
fs::path toy_fixture(const std::string& tag) {
  const fs::path dir = fresh_dir(tag);
  write_file(dir / "pedigree.csv",
             "family_id,member_id,role,child_type\n"
             "f1,mom,parent,MZ\n"
             "f1,dad,parent,MZ\n"
             "f1,t1,child,MZ\n"
             "f1,t2,child,MZ\n"
             "f2,mom,parent,MZ\n"
             "f2,dad,parent,MZ\n"
             "f2,t1,child,MZ\n"
             "f2,t2,child,MZ\n");
  write_file(dir / "phenotype.csv",
             "family_id,member_id,value\n"
             "f1,mom,1.5\n"
             "f1,dad,-0.25\n"
             "f1,t1,2\n"
             "f1,t2,2.5\n"
             "f2,mom,0\n"
             "f2,dad,0.125\n"
             "f2,t1,-1\n"
             "f2,t2,-1.5\n");
  write_file(dir / "genotype.csv",
             "family_id,member_id,snp_1,snp_2\n"
             "f1,mom,0,1\n"
             "f1,dad,1,2\n"
             "f1,t1,1,1\n"
             "f1,t2,1,1\n"
             "f2,mom,2,0\n"
             "f2,dad,0,0\n"
             "f2,t1,1,0\n"
             "f2,t2,1,0\n");
  write_file(dir / "covariates.csv",
             "family_id,member_id,age\n"
             "f1,mom,40\n"
             "f1,dad,41\n"
             "f1,t1,12\n"
             "f1,t2,12\n"
             "f2,mom,35\n"
             "f2,dad,36\n"
             "f2,t1,9\n"
             "f2,t2,9\n");
  return dir;
}

}  // namespace

TEST_CASE("ingest reads the toy fixture faithfully") {
  const fs::path dir = toy_fixture("toy");
  io::IngestSummary summary;
  const Dataset d = io::ingest((dir / "pedigree.csv").string(),
                               (dir / "phenotype.csv").string(),
                               (dir / "genotype.csv").string(),
                               (dir / "covariates.csv").string(), &summary);
  REQUIRE(d.family_count() == 2);
  REQUIRE(d.snp_count() == 2);
  REQUIRE(d.covariate_count() == 1);
  REQUIRE(summary.families == 2);
  REQUIRE(summary.individuals == 8);
  REQUIRE(summary.dropped_families == 0);
  CHECK(d.snp_ids == std::vector<std::string>{"snp_1", "snp_2"});
  CHECK(d.covariate_ids == std::vector<std::string>{"age"});

  const Family& f1 = d.families[0];
  REQUIRE(f1.pedigree.family_id == "f1");
  REQUIRE(f1.pedigree.members.size() == 4);
  CHECK(f1.pedigree.members[2].id == "t1");
  CHECK(f1.pedigree.members[0].role == Role::Parent);
  CHECK(f1.pedigree.members[2].role == Role::Child);
  CHECK(f1.phenotype[0] == 1.5);
  CHECK(f1.phenotype[3] == 2.5);
  CHECK(f1.genotypes(1, 1) == 2.0);
  CHECK(f1.covariates(2, 0) == 12.0);
  const Family& f2 = d.families[1];
  CHECK(f2.phenotype[2] == -1.0);
  CHECK(f2.genotypes(0, 0) == 2.0);
}

TEST_CASE("ingest works without a covariate file") {
  const fs::path dir = toy_fixture("nocovar");
  const Dataset d = io::ingest((dir / "pedigree.csv").string(),
                               (dir / "phenotype.csv").string(),
                               (dir / "genotype.csv").string());
  CHECK(d.covariate_count() == 0);
  CHECK(d.families[0].covariates.cols() == 0);
  CHECK(d.families[0].covariates.rows() == 4);
}

TEST_CASE("out-of-range genotype is a hard error citing the line") {
  const fs::path dir = toy_fixture("badgeno");
  // line 7 of genotype.csv is the f2,dad row
  write_file(dir / "genotype.csv",
             "family_id,member_id,snp_1,snp_2\n"
             "f1,mom,0,1\n"
             "f1,dad,1,2\n"
             "f1,t1,1,1\n"
             "f1,t2,1,1\n"
             "f2,mom,2,0\n"
             "f2,dad,3,0\n"
             "f2,t1,1,0\n"
             "f2,t2,1,0\n");
  try {
    io::ingest((dir / "pedigree.csv").string(),
               (dir / "phenotype.csv").string(),
               (dir / "genotype.csv").string());
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 7") != std::string::npos);
    CHECK(msg.find("{0,1,2}") != std::string::npos);
  }
}

TEST_CASE("malformed numbers cite file, line, and column") {
  const fs::path dir = toy_fixture("badnum");
  write_file(dir / "phenotype.csv",
             "family_id,member_id,value\n"
             "f1,mom,1.5\n"
             "f1,dad,oops\n"
             "f1,t1,2\n"
             "f1,t2,2.5\n"
             "f2,mom,0\n"
             "f2,dad,0.125\n"
             "f2,t1,-1\n"
             "f2,t2,-1.5\n");
  try {
    io::ingest((dir / "pedigree.csv").string(),
               (dir / "phenotype.csv").string(),
               (dir / "genotype.csv").string());
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("phenotype.csv") != std::string::npos);
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column 3") != std::string::npos);
    CHECK(msg.find("oops") != std::string::npos);
  }
}

TEST_CASE("missing (empty) values drop the whole family") {
  const fs::path dir = toy_fixture("missing");
  write_file(dir / "phenotype.csv",
             "family_id,member_id,value\n"
             "f1,mom,1.5\n"
             "f1,dad,\n"
             "f1,t1,2\n"
             "f1,t2,2.5\n"
             "f2,mom,0\n"
             "f2,dad,0.125\n"
             "f2,t1,-1\n"
             "f2,t2,-1.5\n");
  io::IngestSummary summary;
  const Dataset d = io::ingest((dir / "pedigree.csv").string(),
                               (dir / "phenotype.csv").string(),
                               (dir / "genotype.csv").string(),
                               (dir / "covariates.csv").string(), &summary);
  REQUIRE(d.family_count() == 1);
  CHECK(d.families[0].pedigree.family_id == "f2");
  CHECK(summary.dropped_families == 1);
}

TEST_CASE("a family absent from the phenotype file is dropped, not zeroed") {
  const fs::path dir = toy_fixture("absent");
  write_file(dir / "phenotype.csv",
             "family_id,member_id,value\n"
             "f2,mom,0\n"
             "f2,dad,0.125\n"
             "f2,t1,-1\n"
             "f2,t2,-1.5\n");
  const Dataset d = io::ingest((dir / "pedigree.csv").string(),
                               (dir / "phenotype.csv").string(),
                               (dir / "genotype.csv").string());
  REQUIRE(d.family_count() == 1);
  CHECK(d.families[0].pedigree.family_id == "f2");
}

TEST_CASE("rows referencing unknown families or members are errors") {
  const fs::path dir = toy_fixture("unknown");
  write_file(dir / "phenotype.csv",
             "family_id,member_id,value\n"
             "f9,mom,1.0\n");
  CHECK_THROWS_AS(io::ingest((dir / "pedigree.csv").string(),
                             (dir / "phenotype.csv").string(),
                             (dir / "genotype.csv").string()),
                  ValidationError);
  write_file(dir / "phenotype.csv",
             "family_id,member_id,value\n"
             "f1,granny,1.0\n");
  CHECK_THROWS_AS(io::ingest((dir / "pedigree.csv").string(),
                             (dir / "phenotype.csv").string(),
                             (dir / "genotype.csv").string()),
                  ValidationError);
}

TEST_CASE("simulated data round-trips exactly through write and ingest") {
  SimConfig cfg;
  cfg.m = 20;
  cfg.h = 10.0;
  cfg.seed = 99;
  RngStream rng(cfg.seed);
  auto [data, truth] = simulate_dataset(cfg, rng);
  (void)truth;

  const fs::path dir = fresh_dir("roundtrip");
  io::write_dataset(data, dir.string());
  const Dataset back = io::ingest((dir / "pedigree.csv").string(),
                                  (dir / "phenotype.csv").string(),
                                  (dir / "genotype.csv").string());
  REQUIRE(back.family_count() == data.family_count());
  REQUIRE(back.snp_ids == data.snp_ids);
  for (std::size_t i = 0; i < data.families.size(); ++i) {
    const Family& a = data.families[i];
    const Family& b = back.families[i];
    REQUIRE(a.pedigree.family_id == b.pedigree.family_id);
    REQUIRE(a.pedigree.child_type == b.pedigree.child_type);
    REQUIRE(a.phenotype == b.phenotype);  // bitwise
    REQUIRE(a.genotypes == b.genotypes);
  }

  // a second write of the re-ingested data is byte-identical
  const fs::path dir2 = fresh_dir("roundtrip2");
  io::write_dataset(back, dir2.string());
  for (const char* name : {"pedigree.csv", "phenotype.csv", "genotype.csv"})
    CHECK(slurp(dir / name) == slurp(dir2 / name));
}

TEST_CASE("format_double is shortest round-trip") {
  for (double v : {0.0, 1.0, -1.5, 0.1, 1e-8, 123456.789, -2.2250738585072014e-308,
                   3.141592653589793}) {
    const std::string s = io::format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::format_double(2.0) == "2");
}

TEST_CASE("config parser handles sections, arrays, and comments") {
  const ConfigDoc doc = ConfigDoc::parse(
      "# top comment\n"
      "seed = 42\n"
      "replications = 3\n"
      "train_fraction = 0.8\n"
      "\n"
      "[simulation]\n"
      "families = 100   # inline comment\n"
      "h_list = [10, 5, 3]\n"
      "family_type = \"DZ\"\n"
      "causal_indices = [1, 7, 11, 17]\n"
      "\n"
      "[selection]\n"
      "kind = both\n"
      "s_grid = [0.2, 0.5, 1.0]\n"
      "t_grid = [0.8]\n"
      "R = 200\n"
      "R1 = 200\n"
      "\n"
      "[baselines]\n"
      "mbic2 = false\n");
  const RunConfig rc = load_run_config(doc);
  CHECK(rc.seed == 42);
  CHECK(rc.replications == 3);
  CHECK(rc.train_fraction == 0.8);
  CHECK(rc.sim.m == 100);
  CHECK(rc.h_list == std::vector<double>{10.0, 5.0, 3.0});
  CHECK(rc.sim.family_type == ChildType::DZ);
  REQUIRE(rc.sim.causal_indices.has_value());
  // config indices are 1-based; internal indices are 0-based
  CHECK(*rc.sim.causal_indices == std::vector<int>{0, 6, 10, 16});
  CHECK(rc.kinds.size() == 2);
  CHECK(rc.selection.s_grid == std::vector<double>{0.2, 0.5, 1.0});
  CHECK(rc.selection.R == 200);
  CHECK(!rc.run_mbic2);
  CHECK(rc.run_rfgls_bh);
}

TEST_CASE("config defaults match the published study setup") {
  const RunConfig rc = load_run_config(ConfigDoc::parse(""));
  CHECK(rc.sim.m == 250);
  CHECK(rc.sim.vc.sigma_a2 == 4.0);
  CHECK(rc.sim.vc.sigma_c2 == 1.0);
  CHECK(rc.sim.vc.sigma_e2 == 1.0);
  CHECK(rc.train_fraction == 0.75);
  CHECK(rc.selection.q_list == std::vector<double>{0.5, 0.6, 0.7, 0.8, 0.9});
  CHECK(rc.selection.t_grid == std::vector<double>{0.8});
  CHECK(rc.selection.R == 500);
  CHECK(rc.selection.R1 == 500);
  CHECK(rc.kinds == std::vector<EvaluationKind>{EvaluationKind::E2});
}

TEST_CASE("config parse errors are specific") {
  CHECK_THROWS_AS(ConfigDoc::parse("[broken\nfoo = 1\n"), ValidationError);
  CHECK_THROWS_AS(ConfigDoc::parse("just a bare line\n"), ValidationError);
  const ConfigDoc doc = ConfigDoc::parse("seed = banana\n");
  CHECK_THROWS_AS(doc.get_int("seed", 1), ValidationError);
  const ConfigDoc doc2 = ConfigDoc::parse("x = [1, two]\n");
  CHECK_THROWS_AS(doc2.get_double_list("x", {}), ValidationError);
}
