#pragma once

#include <Eigen/Core>
#include <vector>

#include "ezfsched/scenario.hpp"
#include "ezfsched/schedule.hpp"

namespace ezfsched {

struct Rank1Svd {
  double lambda = 0.0;        // largest singular value
  Eigen::VectorXcd left;      // unit norm, length = rows
  Eigen::VectorXcd right;     // unit norm, length = cols
};

// Dominant singular triple of a complex matrix. The phase is fixed so that
// the largest-magnitude entry of `right` is real positive (the matching
// rotation is applied to `left`), which makes the output reproducible.
// An all-zero matrix yields lambda = 0 and first-basis-vector singular
// vectors.
Rank1Svd svd_rank1_parts(const Eigen::MatrixXcd& matrix);

// Horizontal stack [H_{m,i}] over m in B_i (strongest server first),
// nr x (|B_i|*nt).
Eigen::MatrixXcd aggregate_jt_channel(const ChannelTensor& channels,
                                      const Association& assoc, int i, int s);

// Dominant-eigenmode transceivers: per (k,s) the largest singular value, the
// receive combiner u (first left singular vector) and per serving BS the
// right singular sub-vector v. For an NJT UE v is unit norm; a JT UE's
// blocks satisfy sum_m ||v_{m,i}||^2 = 1.
struct TransceiverSet {
  int K = 0, S = 0, nr = 0, nt = 0;
  std::vector<double> lambda;        // [k*S + s]
  std::vector<Eigen::VectorXcd> u;   // [k*S + s], length nr
  std::vector<Eigen::VectorXcd> v;   // [v_offset[k] + bi*S + s], length nt
  std::vector<std::size_t> v_offset; // per UE

  double lam(int k, int s) const { return lambda[static_cast<std::size_t>(k) * S + s]; }
  const Eigen::VectorXcd& comb(int k, int s) const { return u[static_cast<std::size_t>(k) * S + s]; }
  // bi = index of the BS within B_k.
  const Eigen::VectorXcd& v_block(int k, int bi, int s) const {
    return v[v_offset[k] + static_cast<std::size_t>(bi) * S + s];
  }
};

TransceiverSet build_transceivers(const ChannelTensor& channels, const Association& assoc);

// EZF precoders of one BS on one slot. Columns of `w` are power-normalized:
// ||w_j||^2 = P_m / A_m. `hat_norm2` keeps the un-normalized pseudo-inverse
// column norms ||w_hat_j||^2 used by the simplified SINR expressions.
struct SlotPrecoders {
  std::vector<int> ues;       // scheduled attached UEs, ascending
  Eigen::MatrixXcd w;         // nt x |ues|
  std::vector<double> hat_norm2;

  int col_of(int k) const;
};

struct PrecoderSet {
  int M = 0, S = 0;
  std::vector<SlotPrecoders> slots;  // [m*S + s]
  std::vector<int> a;                // A_m^{c,r}, [m*S + s]

  const SlotPrecoders& at(int m, int s) const { return slots[static_cast<std::size_t>(m) * S + s]; }
  int layers(int m, int s) const { return a[static_cast<std::size_t>(m) * S + s]; }
};

// Condition-number limit on V^H V beyond which the build fails instead of
// regularizing; near-identical co-scheduled channels are a scheduler bug.
constexpr double kEzfConditionLimit = 1e10;

// W_hat = V (V^H V)^{-1}, columns rescaled to sqrt(P_m / A_m). Throws
// std::runtime_error naming the slot and UE set on rank deficiency, and when
// A_m exceeds nt.
SlotPrecoders build_slot_precoders(const TransceiverSet& tx, const Association& assoc,
                                   const Schedule& schedule, int m, int s, double p_mw);

PrecoderSet build_ezf_precoders(const TransceiverSet& tx, const Schedule& schedule,
                                const Association& assoc, const std::vector<double>& p_mw);

}  // namespace ezfsched
