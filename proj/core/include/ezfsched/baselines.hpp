#pragma once

#include "ezfsched/beamforming.hpp"
#include "ezfsched/scenario.hpp"
#include "ezfsched/schedule.hpp"

namespace ezfsched {

struct SusConfig {
  // Semi-orthogonality threshold on |v_j^H v_k| / (||v_j|| ||v_k||).
  double alpha = 0.5;
  // Per-BS per-RBG layer cap; the effective cap is min(max_layers, nt).
  int max_layers = 8;
};

// Semi-orthogonal user selection with EZF: per BS and RBG, greedily pick the
// largest-lambda attached UE, then keep adding the largest-lambda UE whose
// direction correlates at most alpha with every UE already picked. A JT UE
// enters each serving BS's pool with its per-BS v block and is scheduled only
// if every serving BS picked it.
Schedule sus_schedule(const TransceiverSet& tx, const Association& assoc,
                      const SusConfig& config);

struct MshsConfig {
  // Weight of satisfied-QoS and unconstrained UEs.
  double weight_floor = 1.0;
};

// QoS-weighted single-user-per-RBG heuristic: slots in fixed order, each BS
// serving the attached UE maximizing weight(k) * lambda_k, where an unmet QoS
// UE weighs 1 + shortfall/Q_k (shortfall from exact rates accumulated over
// the slots processed so far) and everyone else weight_floor. A JT pick
// occupies the single layer of every serving BS, so BSs are processed in
// ascending order and an occupied BS skips its pick. Satisfied QoS UEs drop
// out of the weighted pool.
Schedule mshs_schedule(const TransceiverSet& tx, const ChannelTensor& channels,
                       const Association& assoc, const Scenario& scenario,
                       const MshsConfig& config);

}  // namespace ezfsched
