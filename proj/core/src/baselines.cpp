#include "ezfsched/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ezfsched/rate_model.hpp"

namespace ezfsched {

namespace {

double direction_correlation(const TransceiverSet& tx, const Association& assoc, int m, int j,
                             int k, int s) {
  const auto& vj = tx.v_block(j, assoc.serving_index(j, m), s);
  const auto& vk = tx.v_block(k, assoc.serving_index(k, m), s);
  const double nj = vj.norm();
  const double nk = vk.norm();
  if (nj == 0.0 || nk == 0.0) return 1.0;
  return std::abs(vj.dot(vk)) / (nj * nk);
}

}  // namespace

Schedule sus_schedule(const TransceiverSet& tx, const Association& assoc,
                      const SusConfig& config) {
  const int M = assoc.bs_count();
  const int K = assoc.ue_count();
  const int S = tx.S;
  const int cap = std::min(config.max_layers, tx.nt);

  // selected[m] = per-BS greedy pick for the current slot.
  std::vector<std::vector<char>> selected(M, std::vector<char>(K, 0));
  Schedule sched = make_empty_schedule(assoc, K, S);

  for (int s = 0; s < S; ++s) {
    for (int m = 0; m < M; ++m) {
      std::fill(selected[m].begin(), selected[m].end(), 0);
      std::vector<int> picked;
      std::vector<char> excluded(K, 0);
      while (static_cast<int>(picked.size()) < cap) {
        int best = -1;
        double best_lambda = -1.0;
        for (int k : assoc.attached[m]) {
          if (excluded[k] || selected[m][k]) continue;
          const double lam = tx.lam(k, s);
          if (lam > best_lambda) {
            best_lambda = lam;
            best = k;
          }
        }
        if (best < 0) break;
        bool ok = true;
        for (int j : picked)
          if (direction_correlation(tx, assoc, m, j, best, s) > config.alpha) {
            ok = false;
            break;
          }
        if (ok) {
          picked.push_back(best);
          selected[m][best] = 1;
        } else {
          excluded[best] = 1;
        }
      }
    }
    // NJT picks schedule directly; a JT UE needs every serving BS on board.
    for (int k = 0; k < K; ++k) {
      bool all = !assoc.serving[k].empty();
      for (int m : assoc.serving[k]) all = all && selected[m][k];
      if (all) sched.set(assoc, k, s, true);
    }
  }
  return sched;
}

Schedule mshs_schedule(const TransceiverSet& tx, const ChannelTensor& channels,
                       const Association& assoc, const Scenario& scenario,
                       const MshsConfig& config) {
  const int M = assoc.bs_count();
  const int K = assoc.ue_count();
  const int S = tx.S;

  Schedule sched = make_empty_schedule(assoc, K, S);
  std::vector<double> accumulated(K, 0.0);

  auto weight = [&](int k) {
    if (!assoc.is_qos[k]) return config.weight_floor;
    const double q = assoc.qos_target[k];
    const double shortfall = q - accumulated[k];
    if (!(q > 0.0) || shortfall <= 0.0) return config.weight_floor;
    return 1.0 + shortfall / q;
  };

  for (int s = 0; s < S; ++s) {
    std::vector<char> occupied(M, 0);
    for (int m = 0; m < M; ++m) {
      if (occupied[m]) continue;  // filled by an earlier JT pick
      int best = -1;
      double best_metric = -1.0;
      for (int k : assoc.attached[m]) {
        if (sched.get(k, s)) continue;
        bool fits = true;
        for (int l : assoc.serving[k]) fits = fits && !occupied[l];
        if (!fits) continue;
        const double metric = weight(k) * tx.lam(k, s);
        if (metric > best_metric) {
          best_metric = metric;
          best = k;
        }
      }
      if (best < 0) continue;
      sched.set(assoc, best, s, true);
      for (int l : assoc.serving[best]) occupied[l] = 1;
    }

    // Update accumulated exact rates for this slot; single-layer EZF per BS.
    PrecoderSet precoders = build_ezf_precoders(tx, sched, assoc, scenario.p_mw);
    for (int k = 0; k < K; ++k)
      if (sched.get(k, s))
        accumulated[k] +=
            exact_rate(sched, precoders, channels, tx, assoc, scenario.sigma2_slot, k, s);
  }
  return sched;
}

}  // namespace ezfsched
