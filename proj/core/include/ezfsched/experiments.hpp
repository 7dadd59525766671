#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ezfsched/baselines.hpp"
#include "ezfsched/rate_model.hpp"
#include "ezfsched/scheduler.hpp"

namespace ezfsched {

enum class SchedulerKind { Proposed, Sus, Mshs, Exhaustive };

std::string to_string(SchedulerKind kind);
SchedulerKind scheduler_kind_from_string(const std::string& name);

struct SweepSpec {
  std::string parameter;  // beta_db | ue_count | nt
  std::vector<double> values;
};

struct ExperimentSpec {
  ScenarioConfig scenario;
  std::vector<SchedulerKind> schedulers = {SchedulerKind::Proposed};
  BcdConfig bcd;
  std::optional<SweepSpec> sweep;
  int replications = 1;
  std::string output_dir = "out";
  bool trace_exact = false;

  void validate() const;
  static ExperimentSpec from_json_text(const std::string& text);
  static ExperimentSpec from_json_file(const std::string& path);
};

// Immutable per-replication pipeline products shared by the schedulers.
struct PipelineArtifacts {
  Scenario scenario;
  ChannelTensor channels;
  Association assoc;
  TransceiverSet tx;
  RateCoefficients coeffs;
};

PipelineArtifacts build_pipeline(const ScenarioConfig& config);

struct ReplicationResult {
  std::uint64_t seed = 0;
  double sweep_value = 0.0;
  bool has_sweep_value = false;
  SchedulerKind scheduler = SchedulerKind::Proposed;
  bool failed = false;
  std::string error;

  std::vector<double> f_a_trace;  // per sweep, rho = 1 normalization
  std::vector<double> f_t_trace;  // only with trace_exact
  double f_a = 0.0;
  double f_t = 0.0;
  double esr_nats = 0.0;
  double esr_bits = 0.0;
  double sat = 1.0;
  std::vector<std::pair<int, double>> qos_shortfall;  // UE id, missing nats
  double runtime_ms = 0.0;
  // Final surrogate objective at the run's penalty weight (proposed and
  // exhaustive schedulers), for oracle-gap reporting.
  double surrogate_nats = 0.0;
  Schedule schedule;
  std::uint64_t stable_hash = 0;  // timestamp/runtime free
};

struct AggregateRow {
  SchedulerKind scheduler = SchedulerKind::Proposed;
  double sweep_value = 0.0;
  bool has_sweep_value = false;
  int count = 0;
  int failed = 0;
  double esr_mean = 0.0, esr_stderr = 0.0;
  double sat_mean = 0.0, sat_stderr = 0.0;
  double runtime_ms_mean = 0.0;
};

struct RunReport {
  ExperimentSpec spec;
  std::vector<ReplicationResult> rows;
  std::vector<AggregateRow> aggregates;
  std::uint64_t stable_hash = 0;
};

// Runs schedulers x sweep values x replications. Replication r uses master
// seed scenario.seed + r, identical across sweep values so comparisons are
// paired. Replications execute in parallel; output order is deterministic.
RunReport run_experiment(const ExperimentSpec& spec);

// Convenience wrapper requiring >= 2 schedulers.
RunReport compare_schedulers(const ExperimentSpec& spec);

// One CSV row per BCD sweep plus a final metrics row per replication; see
// kCsvSchema for the column set.
extern const char* const kCsvSchema;
void write_csv(const RunReport& report, const std::string& path);
void write_json_summary(const RunReport& report, const std::string& path);

std::uint64_t replication_stable_hash(const ReplicationResult& row);

}  // namespace ezfsched
