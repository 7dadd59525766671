#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "ezfsched/rate_model.hpp"

namespace ezfsched {

struct BcdConfig {
  // Penalty weight; negative means "derive from the instance" via
  // default_rho.
  double rho = -1.0;
  int max_iters = 30;
  enum class Init { AllZero, AllOne, SeededRandom };
  Init init = Init::AllZero;
  std::uint64_t init_seed = 0;
  // Early-stop threshold on per-sweep objective improvement (nats); a sweep
  // that changes no variable always stops.
  double tol = 1e-9;
};

// Scale-free heuristic: 10 * max psi / min Q_j, falling back to 1 when Q is
// empty or the scales degenerate.
double default_rho(const RateCoefficients& coeffs, const Association& assoc);

// Incrementally maintained evaluation caches for one candidate schedule.
struct BcdState {
  Schedule schedule;
  Eigen::MatrixXd per_ue_rbg_rate;  // K x S surrogate rates
  Eigen::VectorXd per_ue_total;     // per UE, summed over slots
  double objective = 0.0;
  int iteration = 0;
};

BcdState make_bcd_state(Schedule schedule, const RateCoefficients& coeffs,
                        const Association& assoc, double rho);

// G(b_k^{c,r}=1) - G(b_k^{c,r}=0) with every other variable fixed, including
// the interference and power-sharing terms inflicted on co-scheduled UEs and
// the min{., Q_j} saturation of every affected QoS UE.
double gain(const BcdState& state, const RateCoefficients& coeffs, const Association& assoc,
            double rho, int k, int s);

// Sets b_k^{c,r} to `value`, updating every cache incrementally; no-op when
// the variable already holds the value.
void bcd_apply(BcdState& state, const RateCoefficients& coeffs, const Association& assoc,
               double rho, int k, int s, bool value);

// Largest |cached - recomputed| discrepancy across the caches; test hook.
double state_consistency_error(const BcdState& state, const RateCoefficients& coeffs,
                               const Association& assoc, double rho);

struct BcdResult {
  Schedule schedule;
  std::vector<double> trace;  // objective after each sweep, non-decreasing
  int sweeps = 0;
  bool converged = false;
  double rho = 0.0;
  // Per-QoS-UE surrogate shortfall after convergence (UE id, missing nats);
  // empty when every target is met.
  std::vector<std::pair<int, double>> qos_shortfall;
};

using SweepObserver = std::function<void(int sweep, const Schedule& schedule, double objective)>;

// Penalty BCD: sweeps UE-major / slot-minor, re-deciding every variable by
// the sign of its gain (gain > 0 schedules, ties unschedule). A toggle to 1
// that would push A_m past nt at any serving BS is rejected. Starts from the
// configured initialization and stops on max_iters, a no-change sweep, or a
// sweep improving the objective by less than tol.
BcdResult bcd_schedule(const RateCoefficients& coeffs, const Association& assoc,
                       const BcdConfig& config, const SweepObserver& observer = {});

struct ExhaustiveResult {
  Schedule schedule;
  double objective = 0.0;
  std::uint64_t evaluated = 0;
};

// Enumerates all 2^(K*S) schedules obeying the nt layer cap and returns the
// surrogate-objective maximizer. Refuses instances with K*S > 20.
ExhaustiveResult exhaustive_schedule_surrogate(const RateCoefficients& coeffs,
                                               const Association& assoc, double rho);

// Same enumeration scored by exact rates with a full EZF rebuild per
// candidate; infeasible precoder builds are skipped.
ExhaustiveResult exhaustive_schedule_exact(const ChannelTensor& channels,
                                           const TransceiverSet& tx, const Association& assoc,
                                           const Scenario& scenario, double rho);

}  // namespace ezfsched
