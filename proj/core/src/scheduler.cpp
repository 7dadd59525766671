#include "ezfsched/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ezfsched/rng.hpp"

namespace ezfsched {

namespace {

double qos_aware_contribution(const Association& assoc, double rho, int ue, double total,
                              double delta) {
  if (!assoc.is_qos[ue]) return delta;
  const double q = assoc.qos_target[ue];
  return rho * (std::min(total + delta, q) - std::min(total, q));
}

// Rate deltas of flipping b_k^s, split into the UE's own new value and the
// per-UE deltas inflicted on co-scheduled neighbors. `scratch` collects
// (ue, delta) pairs; a UE sharing several serving BSs with k appears once.
struct FlipDeltas {
  double own_delta = 0.0;
  std::vector<std::pair<int, double>> neighbors;
};

FlipDeltas flip_deltas(const BcdState& state, const RateCoefficients& coeffs,
                       const Association& assoc, int k, int s) {
  const Schedule& sched = state.schedule;
  const bool turning_on = !sched.get(k, s);
  const auto& bk = coeffs.serving[k];
  const double norm_k = static_cast<double>(bk.size());

  FlipDeltas out;
  double own_acc = 0.0;
  for (int m : bk) {
    const BsCoefficients& bm = coeffs.bs[m];
    const int lk = bm.local[k];
    const auto& d = bm.d[s];
    const int a_old = sched.layers(m, s);
    const int a_new = turning_on ? a_old + 1 : a_old - 1;
    // ln(A) change seen by co-scheduled UEs of this BS; they keep A >= 1, so
    // the a_new = 0 case never reaches g_delta.
    const double g_delta =
        a_new > 0 ? std::log(static_cast<double>(a_new)) - std::log(static_cast<double>(a_old))
                  : 0.0;

    double d_sum = 0.0;
    for (std::size_t i = 0; i < bm.ue_ids.size(); ++i) {
      const int j = bm.ue_ids[i];
      if (j == k || !sched.get(j, s)) continue;
      d_sum += d(static_cast<int>(i), lk);
      const double dj = (turning_on ? d(lk, static_cast<int>(i)) : -d(lk, static_cast<int>(i)));
      const double delta_j = (dj - g_delta) / static_cast<double>(coeffs.serving[j].size());
      auto it = std::find_if(out.neighbors.begin(), out.neighbors.end(),
                             [j](const auto& p) { return p.first == j; });
      if (it == out.neighbors.end())
        out.neighbors.emplace_back(j, delta_j);
      else
        it->second += delta_j;
    }
    if (turning_on)
      own_acc += bm.psi_tilde(lk, s) + d_sum - std::log(static_cast<double>(a_new));
  }
  const double current = state.per_ue_rbg_rate(k, s);
  out.own_delta = (turning_on ? own_acc / norm_k : 0.0) - current;
  return out;
}

double objective_delta(const BcdState& state, const Association& assoc, double rho, int k,
                       const FlipDeltas& deltas) {
  double dg = qos_aware_contribution(assoc, rho, k, state.per_ue_total(k), deltas.own_delta);
  for (const auto& [j, dj] : deltas.neighbors)
    dg += qos_aware_contribution(assoc, rho, j, state.per_ue_total(j), dj);
  return dg;
}

void apply_flip(BcdState& state, const Association& assoc, double rho, int k, int s,
                const FlipDeltas& deltas) {
  state.objective += objective_delta(state, assoc, rho, k, deltas);
  state.per_ue_rbg_rate(k, s) += deltas.own_delta;
  state.per_ue_total(k) += deltas.own_delta;
  for (const auto& [j, dj] : deltas.neighbors) {
    state.per_ue_rbg_rate(j, s) += dj;
    state.per_ue_total(j) += dj;
  }
  state.schedule.set(assoc, k, s, !state.schedule.get(k, s));
}

bool cap_allows_on(const Schedule& sched, const RateCoefficients& coeffs, int k, int s) {
  const bool on = sched.get(k, s);
  for (int m : coeffs.serving[k]) {
    const int a_with_k = sched.layers(m, s) + (on ? 0 : 1);
    if (a_with_k > coeffs.nt) return false;
  }
  return true;
}

}  // namespace

double default_rho(const RateCoefficients& coeffs, const Association& assoc) {
  if (assoc.qos_ues.empty()) return 1.0;
  double min_q = std::numeric_limits<double>::infinity();
  for (int j : assoc.qos_ues) min_q = std::min(min_q, assoc.qos_target[j]);
  double max_psi = 0.0;
  for (const auto& bm : coeffs.bs)
    if (bm.psi.size() > 0) max_psi = std::max(max_psi, bm.psi.maxCoeff());
  if (!(min_q > 0.0) || !(max_psi > 0.0)) return 1.0;
  return 10.0 * max_psi / min_q;
}

BcdState make_bcd_state(Schedule schedule, const RateCoefficients& coeffs,
                        const Association& assoc, double rho) {
  BcdState state;
  state.schedule = std::move(schedule);
  state.per_ue_rbg_rate = approx_rate_table(state.schedule, coeffs);
  state.per_ue_total = state.per_ue_rbg_rate.rowwise().sum();
  state.objective = penalized_objective(state.per_ue_rbg_rate, assoc, rho);
  return state;
}

double gain(const BcdState& state, const RateCoefficients& coeffs, const Association& assoc,
            double rho, int k, int s) {
  const FlipDeltas deltas = flip_deltas(state, coeffs, assoc, k, s);
  const double dg = objective_delta(state, assoc, rho, k, deltas);
  return state.schedule.get(k, s) ? -dg : dg;
}

void bcd_apply(BcdState& state, const RateCoefficients& coeffs, const Association& assoc,
               double rho, int k, int s, bool value) {
  if (state.schedule.get(k, s) == value) return;
  const FlipDeltas deltas = flip_deltas(state, coeffs, assoc, k, s);
  apply_flip(state, assoc, rho, k, s, deltas);
}

double state_consistency_error(const BcdState& state, const RateCoefficients& coeffs,
                               const Association& assoc, double rho) {
  const Eigen::MatrixXd rates = approx_rate_table(state.schedule, coeffs);
  double err = (rates - state.per_ue_rbg_rate).cwiseAbs().maxCoeff();
  err = std::max(err, (rates.rowwise().sum() - state.per_ue_total).cwiseAbs().maxCoeff());
  err = std::max(err, std::abs(penalized_objective(rates, assoc, rho) - state.objective));
  return err;
}

BcdResult bcd_schedule(const RateCoefficients& coeffs, const Association& assoc,
                       const BcdConfig& config, const SweepObserver& observer) {
  if (config.max_iters < 1) throw std::invalid_argument("bcd: max_iters must be >= 1");
  const int K = coeffs.K;
  const int S = coeffs.S;
  const double rho = config.rho >= 0.0 ? config.rho : default_rho(coeffs, assoc);

  Schedule init = make_empty_schedule(assoc, K, S);
  switch (config.init) {
    case BcdConfig::Init::AllZero:
      break;
    case BcdConfig::Init::AllOne:
      for (int k = 0; k < K; ++k)
        for (int s = 0; s < S; ++s)
          if (cap_allows_on(init, coeffs, k, s)) init.set(assoc, k, s, true);
      break;
    case BcdConfig::Init::SeededRandom: {
      auto eng = rng::make_engine(rng::substream(config.init_seed, "bcd-init"));
      std::bernoulli_distribution coin(0.5);
      for (int k = 0; k < K; ++k)
        for (int s = 0; s < S; ++s)
          if (coin(eng) && cap_allows_on(init, coeffs, k, s)) init.set(assoc, k, s, true);
      break;
    }
  }

  BcdState state = make_bcd_state(std::move(init), coeffs, assoc, rho);

  BcdResult result;
  result.rho = rho;
  for (int sweep = 1; sweep <= config.max_iters; ++sweep) {
    const double sweep_start = state.objective;
    int changes = 0;
    for (int k = 0; k < K; ++k) {
      for (int s = 0; s < S; ++s) {
        const bool current = state.schedule.get(k, s);
        bool want;
        if (!cap_allows_on(state.schedule, coeffs, k, s)) {
          want = false;
        } else {
          want = gain(state, coeffs, assoc, rho, k, s) > 0.0;
        }
        if (want != current) {
          const FlipDeltas deltas = flip_deltas(state, coeffs, assoc, k, s);
          apply_flip(state, assoc, rho, k, s, deltas);
          ++changes;
        }
      }
    }
    state.iteration = sweep;
    result.trace.push_back(state.objective);
    result.sweeps = sweep;
    if (observer) observer(sweep, state.schedule, state.objective);
    if (changes == 0 || state.objective - sweep_start < config.tol) {
      result.converged = true;
      break;
    }
  }

  for (int j : assoc.qos_ues) {
    const double shortfall = assoc.qos_target[j] - state.per_ue_total(j);
    if (shortfall > 0.0) result.qos_shortfall.emplace_back(j, shortfall);
  }
  result.schedule = std::move(state.schedule);
  return result;
}

namespace {

void check_exhaustive_size(int K, int S) {
  if (static_cast<long long>(K) * S > 20)
    throw std::invalid_argument("exhaustive: instance too large, K*S = " +
                                std::to_string(static_cast<long long>(K) * S) +
                                " exceeds 20 variables");
}

bool schedule_from_mask(Schedule& sched, const Association& assoc, int nt_cap,
                        std::uint64_t mask) {
  const int K = sched.K;
  const int S = sched.S;
  for (int k = 0; k < K; ++k)
    for (int s = 0; s < S; ++s)
      sched.set(assoc, k, s, (mask >> (static_cast<unsigned>(k) * S + s)) & 1ULL);
  for (int m = 0; m < sched.M; ++m)
    for (int s = 0; s < S; ++s)
      if (sched.layers(m, s) > nt_cap) return false;
  return true;
}

}  // namespace

ExhaustiveResult exhaustive_schedule_surrogate(const RateCoefficients& coeffs,
                                               const Association& assoc, double rho) {
  check_exhaustive_size(coeffs.K, coeffs.S);
  const std::uint64_t count = 1ULL << (static_cast<unsigned>(coeffs.K) * coeffs.S);
  Schedule candidate = make_empty_schedule(assoc, coeffs.K, coeffs.S);

  ExhaustiveResult best;
  best.schedule = candidate;
  best.objective = -std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    if (!schedule_from_mask(candidate, assoc, coeffs.nt, mask)) continue;
    ++best.evaluated;
    const double g = surrogate_objective(candidate, coeffs, assoc, rho);
    if (g > best.objective) {
      best.objective = g;
      best.schedule = candidate;
    }
  }
  return best;
}

ExhaustiveResult exhaustive_schedule_exact(const ChannelTensor& channels,
                                           const TransceiverSet& tx, const Association& assoc,
                                           const Scenario& scenario, double rho) {
  check_exhaustive_size(channels.K, channels.S);
  const std::uint64_t count = 1ULL << (static_cast<unsigned>(channels.K) * channels.S);
  Schedule candidate = make_empty_schedule(assoc, channels.K, channels.S);

  ExhaustiveResult best;
  best.schedule = candidate;
  best.objective = -std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    if (!schedule_from_mask(candidate, assoc, tx.nt, mask)) continue;
    double g;
    try {
      const PrecoderSet precoders = build_ezf_precoders(tx, candidate, assoc, scenario.p_mw);
      const Eigen::MatrixXd rates =
          exact_rate_table(candidate, precoders, channels, tx, assoc, scenario.sigma2_slot);
      g = penalized_objective(rates, assoc, rho);
    } catch (const std::runtime_error&) {
      continue;  // infeasible precoder build
    }
    ++best.evaluated;
    if (g > best.objective) {
      best.objective = g;
      best.schedule = candidate;
    }
  }
  return best;
}

}  // namespace ezfsched
