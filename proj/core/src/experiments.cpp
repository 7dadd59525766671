#include "ezfsched/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "ezfsched/rng.hpp"
#include "ezfsched/units.hpp"

namespace ezfsched {

using nlohmann::json;
using nlohmann::ordered_json;

const char* const kCsvSchema =
    "seed,sweep_value,scheduler,iteration,f_a,f_t,esr_nats,sat,runtime_ms";

std::string to_string(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::Proposed: return "proposed";
    case SchedulerKind::Sus: return "sus";
    case SchedulerKind::Mshs: return "mshs";
    case SchedulerKind::Exhaustive: return "exhaustive";
  }
  return "?";
}

SchedulerKind scheduler_kind_from_string(const std::string& name) {
  if (name == "proposed") return SchedulerKind::Proposed;
  if (name == "sus") return SchedulerKind::Sus;
  if (name == "mshs") return SchedulerKind::Mshs;
  if (name == "exhaustive") return SchedulerKind::Exhaustive;
  throw std::invalid_argument("experiment spec: scheduler: unknown value '" + name + "'");
}

void ExperimentSpec::validate() const {
  scenario.validate();
  if (schedulers.empty()) throw std::invalid_argument("experiment spec: schedulers: empty");
  if (replications < 1) throw std::invalid_argument("experiment spec: replications: must be >= 1");
  if (sweep) {
    if (sweep->values.empty())
      throw std::invalid_argument("experiment spec: sweep.values: must be nonempty");
    if (sweep->parameter != "beta_db" && sweep->parameter != "ue_count" &&
        sweep->parameter != "nt")
      throw std::invalid_argument("experiment spec: sweep.parameter: must be one of "
                                  "beta_db | ue_count | nt");
  }
  if (bcd.max_iters < 1) throw std::invalid_argument("experiment spec: bcd.max_iters: must be >= 1");
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& why) {
  throw std::invalid_argument("experiment spec: " + where + ": " + why);
}

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& required,
                  const std::set<std::string>& optional) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : obj.items())
    if (!required.count(key) && !optional.count(key)) fail(where, "unknown key '" + key + "'");
  for (const auto& key : required)
    if (!obj.contains(key)) fail(where, "missing key '" + key + "'");
}

BcdConfig bcd_from_json(const json& obj) {
  require_keys(obj, "bcd", {}, {"rho", "max_iters", "init", "tol"});
  BcdConfig cfg;
  if (obj.contains("rho")) cfg.rho = obj["rho"].get<double>();
  if (obj.contains("max_iters")) cfg.max_iters = obj["max_iters"].get<int>();
  if (obj.contains("tol")) cfg.tol = obj["tol"].get<double>();
  if (obj.contains("init")) {
    const std::string init = obj["init"].get<std::string>();
    if (init == "all-zero")
      cfg.init = BcdConfig::Init::AllZero;
    else if (init == "all-one")
      cfg.init = BcdConfig::Init::AllOne;
    else if (init == "seeded-random")
      cfg.init = BcdConfig::Init::SeededRandom;
    else
      fail("bcd.init", "must be all-zero | all-one | seeded-random");
  }
  return cfg;
}

}  // namespace

ExperimentSpec ExperimentSpec::from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail("json", e.what());
  }
  require_keys(root, "root", {"scenario"},
               {"scheduler", "schedulers", "bcd", "sweep", "replications", "output_dir",
                "trace_exact"});

  ExperimentSpec spec;
  spec.scenario = ScenarioConfig::from_json_text(root["scenario"].dump());
  spec.schedulers.clear();
  if (root.contains("scheduler")) spec.schedulers.push_back(
      scheduler_kind_from_string(root["scheduler"].get<std::string>()));
  if (root.contains("schedulers"))
    for (const auto& name : root["schedulers"])
      spec.schedulers.push_back(scheduler_kind_from_string(name.get<std::string>()));
  if (spec.schedulers.empty()) spec.schedulers.push_back(SchedulerKind::Proposed);
  if (root.contains("bcd")) spec.bcd = bcd_from_json(root["bcd"]);
  if (root.contains("sweep")) {
    require_keys(root["sweep"], "sweep", {"parameter", "values"}, {});
    SweepSpec sw;
    sw.parameter = root["sweep"]["parameter"].get<std::string>();
    for (const auto& v : root["sweep"]["values"]) sw.values.push_back(v.get<double>());
    spec.sweep = sw;
  }
  if (root.contains("replications")) spec.replications = root["replications"].get<int>();
  if (root.contains("output_dir")) spec.output_dir = root["output_dir"].get<std::string>();
  if (root.contains("trace_exact")) spec.trace_exact = root["trace_exact"].get<bool>();
  spec.validate();
  return spec;
}

ExperimentSpec ExperimentSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("experiment spec: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

PipelineArtifacts build_pipeline(const ScenarioConfig& config) {
  PipelineArtifacts art;
  art.scenario = generate_scenario(config);
  art.channels = synthesize_channels(art.scenario);
  art.assoc = associate_users(art.channels, config.beta_db);
  art.assoc = select_qos_users(art.scenario, std::move(art.assoc));
  art.tx = build_transceivers(art.channels, art.assoc);
  art.coeffs = compute_coefficients(art.tx, art.assoc, art.scenario.p_mw,
                                    art.scenario.sigma2_slot);
  return art;
}

namespace {

ScenarioConfig apply_sweep(ScenarioConfig cfg, const std::string& parameter, double value) {
  if (parameter == "beta_db")
    cfg.beta_db = value;
  else if (parameter == "ue_count")
    cfg.ue_count = static_cast<int>(value);
  else if (parameter == "nt")
    cfg.nt = static_cast<int>(value);
  return cfg;
}

double normalization(const PipelineArtifacts& art) {
  return static_cast<double>(art.scenario.grid.total) * art.scenario.ue_count();
}

void finalize_metrics(ReplicationResult& row, const PipelineArtifacts& art,
                      const Schedule& schedule) {
  const PrecoderSet precoders =
      build_ezf_precoders(art.tx, schedule, art.assoc, art.scenario.p_mw);
  const Eigen::MatrixXd rates = exact_rate_table(schedule, precoders, art.channels, art.tx,
                                                 art.assoc, art.scenario.sigma2_slot);
  const double norm = normalization(art);
  row.esr_nats = effective_sum_rate(rates, art.assoc);
  row.esr_bits = nats_to_bits(row.esr_nats);
  row.f_t = row.esr_nats / norm;
  row.f_a = surrogate_objective(schedule, art.coeffs, art.assoc, 1.0) / norm;
  row.sat = satisfaction_rate(rates, art.assoc);
  for (int j : art.assoc.qos_ues) {
    const double shortfall = art.assoc.qos_target[j] - rates.row(j).sum();
    if (shortfall > 0.0) row.qos_shortfall.emplace_back(j, shortfall);
  }
  row.schedule = schedule;
}

ReplicationResult run_one(const ExperimentSpec& spec, SchedulerKind kind,
                          const ScenarioConfig& config, std::uint64_t seed,
                          double sweep_value, bool has_sweep_value) {
  ReplicationResult row;
  row.seed = seed;
  row.scheduler = kind;
  row.sweep_value = sweep_value;
  row.has_sweep_value = has_sweep_value;

  const auto start = std::chrono::steady_clock::now();
  try {
    ScenarioConfig cfg = config;
    cfg.seed = seed;
    const PipelineArtifacts art = build_pipeline(cfg);
    const double norm = normalization(art);

    Schedule schedule;
    switch (kind) {
      case SchedulerKind::Proposed: {
        SweepObserver observer = [&](int, const Schedule& snapshot, double) {
          row.f_a_trace.push_back(
              surrogate_objective(snapshot, art.coeffs, art.assoc, 1.0) / norm);
          if (spec.trace_exact) {
            const PrecoderSet p =
                build_ezf_precoders(art.tx, snapshot, art.assoc, art.scenario.p_mw);
            const Eigen::MatrixXd r = exact_rate_table(snapshot, p, art.channels, art.tx,
                                                       art.assoc, art.scenario.sigma2_slot);
            row.f_t_trace.push_back(effective_sum_rate(r, art.assoc) / norm);
          }
        };
        BcdResult result = bcd_schedule(art.coeffs, art.assoc, spec.bcd, observer);
        row.surrogate_nats = result.trace.empty() ? 0.0 : result.trace.back();
        schedule = std::move(result.schedule);
        break;
      }
      case SchedulerKind::Sus:
        schedule = sus_schedule(art.tx, art.assoc, SusConfig{});
        break;
      case SchedulerKind::Mshs:
        schedule = mshs_schedule(art.tx, art.channels, art.assoc, art.scenario, MshsConfig{});
        break;
      case SchedulerKind::Exhaustive: {
        const double rho = spec.bcd.rho >= 0.0 ? spec.bcd.rho
                                               : default_rho(art.coeffs, art.assoc);
        const ExhaustiveResult oracle =
            exhaustive_schedule_surrogate(art.coeffs, art.assoc, rho);
        row.surrogate_nats = oracle.objective;
        schedule = oracle.schedule;
        break;
      }
    }
    finalize_metrics(row, art, schedule);
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
  }
  row.runtime_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  row.stable_hash = replication_stable_hash(row);
  return row;
}

int worker_count(int tasks) {
  if (const char* env = std::getenv("EZFSCHED_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return std::min(n, tasks);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return std::min<int>(tasks, hw == 0 ? 1 : static_cast<int>(hw));
}

std::vector<AggregateRow> aggregate(const std::vector<ReplicationResult>& rows) {
  std::vector<AggregateRow> out;
  auto key_of = [](const ReplicationResult& r) {
    return std::make_pair(r.scheduler, r.has_sweep_value ? r.sweep_value : 0.0);
  };
  for (const auto& row : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const AggregateRow& a) {
      return std::make_pair(a.scheduler, a.has_sweep_value ? a.sweep_value : 0.0) == key_of(row);
    });
    if (it == out.end()) {
      AggregateRow a;
      a.scheduler = row.scheduler;
      a.sweep_value = row.sweep_value;
      a.has_sweep_value = row.has_sweep_value;
      out.push_back(a);
      it = out.end() - 1;
    }
    if (row.failed) {
      ++it->failed;
      continue;
    }
    ++it->count;
    it->esr_mean += row.esr_nats;
    it->sat_mean += row.sat;
    it->runtime_ms_mean += row.runtime_ms;
    it->esr_stderr += row.esr_nats * row.esr_nats;
    it->sat_stderr += row.sat * row.sat;
  }
  for (auto& a : out) {
    if (a.count == 0) continue;
    const double n = a.count;
    a.esr_mean /= n;
    a.sat_mean /= n;
    a.runtime_ms_mean /= n;
    const double esr_var = std::max(0.0, a.esr_stderr / n - a.esr_mean * a.esr_mean);
    const double sat_var = std::max(0.0, a.sat_stderr / n - a.sat_mean * a.sat_mean);
    a.esr_stderr = a.count > 1 ? std::sqrt(esr_var / (n - 1)) : 0.0;
    a.sat_stderr = a.count > 1 ? std::sqrt(sat_var / (n - 1)) : 0.0;
  }
  return out;
}

}  // namespace

RunReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();

  struct Task {
    SchedulerKind kind;
    ScenarioConfig config;
    std::uint64_t seed;
    double sweep_value;
    bool has_sweep_value;
  };
  std::vector<Task> tasks;
  const std::vector<double> values = spec.sweep ? spec.sweep->values : std::vector<double>{0.0};
  for (SchedulerKind kind : spec.schedulers)
    for (double value : values)
      for (int r = 0; r < spec.replications; ++r) {
        Task t;
        t.kind = kind;
        t.config = spec.sweep ? apply_sweep(spec.scenario, spec.sweep->parameter, value)
                              : spec.scenario;
        t.seed = spec.scenario.seed + static_cast<std::uint64_t>(r);
        t.sweep_value = value;
        t.has_sweep_value = spec.sweep.has_value();
        tasks.push_back(std::move(t));
      }

  RunReport report;
  report.spec = spec;
  report.rows.resize(tasks.size());

  const int workers = worker_count(static_cast<int>(tasks.size()));
  std::atomic<std::size_t> next{0};
  auto drain = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      report.rows[i] = run_one(spec, t.kind, t.config, t.seed, t.sweep_value, t.has_sweep_value);
    }
  };
  if (workers <= 1) {
    drain();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (auto& th : pool) th.join();
  }

  report.aggregates = aggregate(report.rows);
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& row : report.rows) h = rng::mix(h, row.stable_hash);
  report.stable_hash = h;
  return report;
}

RunReport compare_schedulers(const ExperimentSpec& spec) {
  if (spec.schedulers.size() < 2)
    throw std::invalid_argument("compare: at least two schedulers required");
  return run_experiment(spec);
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

std::uint64_t replication_stable_hash(const ReplicationResult& row) {
  // Runtime and error text stay out; the hash covers the deterministic
  // section of the report only.
  std::uint64_t h = rng::fnv1a(to_string(row.scheduler));
  h = rng::mix(h, row.seed);
  h = rng::mix(h, row.has_sweep_value ? std::bit_cast<std::uint64_t>(row.sweep_value) : 0);
  h = rng::mix(h, row.failed ? 1 : 0);
  for (double v : row.f_a_trace) h = rng::mix(h, std::bit_cast<std::uint64_t>(v));
  h = rng::mix(h, std::bit_cast<std::uint64_t>(row.esr_nats));
  h = rng::mix(h, std::bit_cast<std::uint64_t>(row.sat));
  for (std::uint8_t bit : row.schedule.b) h = rng::mix(h, bit);
  return h;
}

void write_csv(const RunReport& report, const std::string& path) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "# ezfsched-results v1; normalization f = G/(total_rbgs*ue_count)\n";
  out << kCsvSchema << "\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& row : report.rows) {
    const std::string sweep = row.has_sweep_value ? fmt(row.sweep_value) : "";
    if (row.failed) {
      out << row.seed << ',' << sweep << ',' << to_string(row.scheduler)
          << ",,,,,," << fmt(row.runtime_ms) << "\n";
      continue;
    }
    const int sweeps = static_cast<int>(row.f_a_trace.size());
    for (int i = 0; i < sweeps; ++i) {
      const bool last = i + 1 == sweeps;
      out << row.seed << ',' << sweep << ',' << to_string(row.scheduler) << ',' << (i + 1) << ','
          << fmt(row.f_a_trace[i]) << ','
          << fmt(i < static_cast<int>(row.f_t_trace.size()) ? row.f_t_trace[i]
                                                            : (last ? row.f_t : nan))
          << ',' << (last ? fmt(row.esr_nats) : "") << ',' << (last ? fmt(row.sat) : "") << ','
          << (last ? fmt(row.runtime_ms) : "") << "\n";
    }
    if (sweeps == 0) {
      out << row.seed << ',' << sweep << ',' << to_string(row.scheduler) << ",0,"
          << fmt(row.f_a) << ',' << fmt(row.f_t) << ',' << fmt(row.esr_nats) << ','
          << fmt(row.sat) << ',' << fmt(row.runtime_ms) << "\n";
    }
  }
}

void write_json_summary(const RunReport& report, const std::string& path) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  ordered_json root;
  root["schema"] = "ezfsched-summary v1";
  root["normalization"] = "f = G/(total_rbgs*ue_count); rates in nats unless suffixed _bits";
  root["scenario"] = json::parse(report.spec.scenario.to_json_text());
  root["replications"] = report.spec.replications;
  root["stable_hash"] = report.stable_hash;

  ordered_json rows = ordered_json::array();
  for (const auto& row : report.rows) {
    ordered_json r;
    r["seed"] = row.seed;
    if (row.has_sweep_value) r["sweep_value"] = row.sweep_value;
    r["scheduler"] = to_string(row.scheduler);
    if (row.failed) {
      r["failed"] = true;
      r["error"] = row.error;
    } else {
      r["f_a"] = row.f_a;
      r["f_t"] = row.f_t;
      r["esr_nats"] = row.esr_nats;
      r["esr_bits"] = row.esr_bits;
      r["sat"] = row.sat;
      if (!row.f_a_trace.empty()) r["f_a_trace"] = row.f_a_trace;
      if (!row.f_t_trace.empty()) r["f_t_trace"] = row.f_t_trace;
      if (!row.qos_shortfall.empty()) {
        ordered_json sh = ordered_json::array();
        for (const auto& [ue, missing] : row.qos_shortfall)
          sh.push_back({{"ue", ue}, {"missing_nats", missing}});
        r["qos_shortfall"] = sh;
      }
      if (row.scheduler == SchedulerKind::Exhaustive ||
          row.scheduler == SchedulerKind::Proposed)
        r["surrogate_nats"] = row.surrogate_nats;
    }
    r["stable_hash"] = row.stable_hash;
    r["runtime_ms"] = row.runtime_ms;  // excluded from stable_hash
    rows.push_back(std::move(r));
  }
  root["rows"] = std::move(rows);

  ordered_json aggs = ordered_json::array();
  for (const auto& a : report.aggregates) {
    ordered_json r;
    r["scheduler"] = to_string(a.scheduler);
    if (a.has_sweep_value) r["sweep_value"] = a.sweep_value;
    r["count"] = a.count;
    r["failed"] = a.failed;
    r["esr_nats_mean"] = a.esr_mean;
    r["esr_nats_stderr"] = a.esr_stderr;
    r["sat_mean"] = a.sat_mean;
    r["sat_stderr"] = a.sat_stderr;
    r["runtime_ms_mean"] = a.runtime_ms_mean;
    aggs.push_back(std::move(r));
  }
  root["aggregates"] = std::move(aggs);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << root.dump(2) << "\n";
}

}  // namespace ezfsched
