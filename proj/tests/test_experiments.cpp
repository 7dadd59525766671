#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ezfsched/experiments.hpp"

using namespace ezfsched;

namespace {

ScenarioConfig small_scenario(int K = 8, int nt = 8, int rbgs = 3) {
  ScenarioConfig cfg;
  cfg.bs_positions = {{0.0, -300.0, 25.0}, {-1000.0, -300.0, 25.0}, {-500.0, -1200.0, 25.0}};
  cfg.ue_count = K;
  cfg.ue_region = {-1400.0, 400.0, -1400.0, -100.0};
  cfg.nt = nt;
  cfg.nr = 2;
  cfg.carriers = {{3.5e9, rbgs, 48, 30e3}};
  cfg.p_m_dbm = {10.0};
  cfg.beta_db = 5.0;
  cfg.qos_fraction = 0.25;
  cfg.qos_target = 3.0;
  cfg.seed = 11;
  return cfg;
}

std::string spec_json(const std::string& extra = "") {
  std::ostringstream os;
  os << "{\n  \"scenario\": " << small_scenario().to_json_text() << ",\n"
     << "  \"scheduler\": \"proposed\",\n"
     << "  \"bcd\": {\"max_iters\": 15},\n"
     << "  \"replications\": 2,\n"
     << "  \"output_dir\": \"out/test\"" << extra << "\n}\n";
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("experiment spec parses and validates") {
  const ExperimentSpec spec = ExperimentSpec::from_json_text(spec_json());
  CHECK(spec.schedulers == std::vector<SchedulerKind>{SchedulerKind::Proposed});
  CHECK(spec.replications == 2);
  CHECK(spec.bcd.max_iters == 15);
  CHECK(spec.output_dir == "out/test");
  CHECK_FALSE(spec.sweep.has_value());
}

TEST_CASE("experiment spec rejects unknown keys and bad values") {
  CHECK_THROWS_WITH_AS(ExperimentSpec::from_json_text(spec_json(",\n  \"plot\": true")),
                       doctest::Contains("unknown key 'plot'"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      ExperimentSpec::from_json_text(spec_json(",\n  \"scheduler\": \"magic\"")),
      doctest::Contains("magic"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      ExperimentSpec::from_json_text(spec_json(
          ",\n  \"sweep\": {\"parameter\": \"qos\", \"values\": [1]}")),
      doctest::Contains("sweep.parameter"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(ExperimentSpec::from_json_text(spec_json(",\n  \"replications\": 0")),
                       doctest::Contains("replications"), std::invalid_argument);
}

TEST_CASE("pipeline artifacts are mutually consistent") {
  const PipelineArtifacts art = build_pipeline(small_scenario());
  CHECK(art.channels.K == 8);
  CHECK(art.channels.S == 3);
  CHECK(art.coeffs.K == art.channels.K);
  CHECK(art.assoc.qos_ues.size() == 2);  // floor(0.25 * 8)
  CHECK(art.tx.nt == 8);
}

TEST_CASE("run_experiment produces finite metrics and a non-decreasing trace") {
  ExperimentSpec spec = ExperimentSpec::from_json_text(spec_json());
  spec.replications = 2;
  const RunReport report = run_experiment(spec);
  REQUIRE(report.rows.size() == 2);
  for (const auto& row : report.rows) {
    REQUIRE_FALSE(row.failed);
    CHECK(row.esr_nats > 0.0);
    CHECK(row.f_t > 0.0);
    CHECK(row.sat >= 0.0);
    CHECK(row.sat <= 1.0);
    CHECK(!row.f_a_trace.empty());
    CHECK(row.f_a == row.f_a_trace.back());
    CHECK(row.esr_bits == doctest::Approx(row.esr_nats / std::log(2.0)));
  }
  REQUIRE(report.aggregates.size() == 1);
  CHECK(report.aggregates[0].count == 2);
}

TEST_CASE("identical spec and seed give identical reports") {
  ExperimentSpec spec = ExperimentSpec::from_json_text(spec_json());
  const RunReport a = run_experiment(spec);
  const RunReport b = run_experiment(spec);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].schedule == b.rows[i].schedule);  // byte-identical bits
    CHECK(a.rows[i].stable_hash == b.rows[i].stable_hash);
    CHECK(a.rows[i].esr_nats == b.rows[i].esr_nats);
  }
  CHECK(a.stable_hash == b.stable_hash);
}

TEST_CASE("replication seeds are paired across sweep values") {
  ExperimentSpec spec = ExperimentSpec::from_json_text(spec_json());
  spec.sweep = SweepSpec{"beta_db", {0.0, 5.0}};
  spec.replications = 2;
  const RunReport report = run_experiment(spec);
  REQUIRE(report.rows.size() == 4);
  CHECK(report.rows[0].seed == report.rows[2].seed);
  CHECK(report.rows[1].seed == report.rows[3].seed);
  CHECK(report.rows[0].sweep_value == 0.0);
  CHECK(report.rows[2].sweep_value == 5.0);
  // beta = 0: identical channels, different association; both must succeed.
  for (const auto& row : report.rows) CHECK_FALSE(row.failed);
}

TEST_CASE("ue_count sweep applies the parameter") {
  ExperimentSpec spec = ExperimentSpec::from_json_text(spec_json());
  spec.sweep = SweepSpec{"ue_count", {4.0, 6.0}};
  spec.replications = 1;
  const RunReport report = run_experiment(spec);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].schedule.K == 4);
  CHECK(report.rows[1].schedule.K == 6);
}

TEST_CASE("compare runs every scheduler and keeps grouping") {
  ExperimentSpec spec = ExperimentSpec::from_json_text(spec_json());
  spec.schedulers = {SchedulerKind::Proposed, SchedulerKind::Sus, SchedulerKind::Mshs};
  spec.replications = 2;
  const RunReport report = compare_schedulers(spec);
  REQUIRE(report.rows.size() == 6);
  REQUIRE(report.aggregates.size() == 3);
  for (const auto& agg : report.aggregates) CHECK(agg.count == 2);

  ExperimentSpec single = spec;
  single.schedulers = {SchedulerKind::Proposed};
  CHECK_THROWS_AS(compare_schedulers(single), std::invalid_argument);
}

TEST_CASE("exhaustive scheduler kind works on a tiny instance") {
  ExperimentSpec spec = ExperimentSpec::from_json_text(spec_json());
  spec.scenario.ue_count = 3;
  spec.scenario.carriers[0].rbg_count = 4;  // 12 variables
  spec.scenario.nt = 4;
  spec.schedulers = {SchedulerKind::Exhaustive, SchedulerKind::Proposed};
  spec.replications = 2;
  const RunReport report = run_experiment(spec);
  REQUIRE(report.rows.size() == 4);
  for (int r = 0; r < 2; ++r) {
    const auto& oracle = report.rows[r];
    const auto& bcd = report.rows[2 + r];
    REQUIRE_FALSE(oracle.failed);
    REQUIRE_FALSE(bcd.failed);
    CHECK(oracle.surrogate_nats >= bcd.surrogate_nats - 1e-9);
  }
}

TEST_CASE("oversized exhaustive runs are recorded as failed replications") {
  ExperimentSpec spec = ExperimentSpec::from_json_text(spec_json());
  spec.schedulers = {SchedulerKind::Exhaustive};  // 8 UEs x 3 slots = 24 vars
  spec.replications = 1;
  const RunReport report = run_experiment(spec);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].failed);
  CHECK(report.rows[0].error.find("too large") != std::string::npos);
  CHECK(report.aggregates[0].failed == 1);
}

TEST_CASE("csv and json outputs carry the schema and the stable hash") {
  namespace fs = std::filesystem;
  ExperimentSpec spec = ExperimentSpec::from_json_text(spec_json());
  spec.replications = 1;
  const RunReport report = run_experiment(spec);

  const fs::path dir = fs::temp_directory_path() / "ezfsched_test_out";
  fs::remove_all(dir);
  const std::string csv_path = (dir / "run.csv").string();
  const std::string json_path = (dir / "run_summary.json").string();
  write_csv(report, csv_path);
  write_json_summary(report, json_path);

  const std::string csv = read_file(csv_path);
  CHECK(csv.find(kCsvSchema) != std::string::npos);
  CHECK(csv.find("proposed") != std::string::npos);
  // One line per sweep plus header comment and column row.
  const auto lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == static_cast<long>(report.rows[0].f_a_trace.size()) + 2);

  const std::string json = read_file(json_path);
  CHECK(json.find("\"stable_hash\"") != std::string::npos);
  CHECK(json.find("\"esr_nats\"") != std::string::npos);
  CHECK(json.find("\"aggregates\"") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("trace_exact records a per-sweep exact trace") {
  ExperimentSpec spec = ExperimentSpec::from_json_text(spec_json());
  spec.replications = 1;
  spec.trace_exact = true;
  const RunReport report = run_experiment(spec);
  REQUIRE_FALSE(report.rows[0].failed);
  CHECK(report.rows[0].f_t_trace.size() == report.rows[0].f_a_trace.size());
  CHECK(report.rows[0].f_t_trace.back() == doctest::Approx(report.rows[0].f_t));
}
