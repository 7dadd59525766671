#pragma once

#include <Eigen/Core>
#include <vector>

#include "ezfsched/beamforming.hpp"
#include "ezfsched/scenario.hpp"
#include "ezfsched/schedule.hpp"

namespace ezfsched {

// Separable surrogate-rate coefficients, one block per BS over its attached
// UEs:
//   psi       = ln(lambda^2 ||v||^2 P_m / sigma^2)
//   psi_tilde = ln|B_k| + psi
//   eta       = |v_j^H v_k|^2 / (||v_j||^2 ||v_k||^2), symmetric
//   d         = ln(1 - eta) <= 0, clamped at eta >= 1 - 1e-12
// The power-sharing term g = ln(A_m) is evaluated on the fly from the
// schedule under consideration.
struct BsCoefficients {
  std::vector<int> ue_ids;   // A_m, ascending
  std::vector<int> local;    // K-sized, local index or -1
  Eigen::MatrixXd psi;       // |A_m| x S
  Eigen::MatrixXd psi_tilde; // |A_m| x S
  std::vector<Eigen::MatrixXd> eta;  // per slot, |A_m| x |A_m|
  std::vector<Eigen::MatrixXd> d;    // per slot, |A_m| x |A_m|
};

struct RateCoefficients {
  int K = 0, S = 0, M = 0, nt = 0;
  std::vector<BsCoefficients> bs;
  std::vector<std::vector<int>> serving;  // B_k, copied from the association

  static constexpr double kPsiFloor = -1e9;   // lambda = 0 sentinel
  static constexpr double kEtaClamp = 1e-12;  // d >= ln(1e-12)

  double psi(int m, int k, int s) const { return bs[m].psi(bs[m].local[k], s); }
  double psi_tilde(int m, int k, int s) const { return bs[m].psi_tilde(bs[m].local[k], s); }
  double eta(int m, int j, int k, int s) const { return bs[m].eta[s](bs[m].local[j], bs[m].local[k]); }
  double d(int m, int j, int k, int s) const { return bs[m].d[s](bs[m].local[j], bs[m].local[k]); }
};

RateCoefficients compute_coefficients(const TransceiverSet& tx, const Association& assoc,
                                      const std::vector<double>& p_mw,
                                      const std::vector<double>& sigma2_slot);

// Exact SINR with full inter-cell interference: every scheduled UE j
// interferes through all of its serving BSs. Returns 0 for an unscheduled
// UE.
double exact_sinr(const Schedule& schedule, const PrecoderSet& precoders,
                  const ChannelTensor& channels, const TransceiverSet& tx,
                  const Association& assoc, const std::vector<double>& sigma2_slot,
                  int k, int s);

// ln(1 + b * sinr).
double exact_rate(const Schedule& schedule, const PrecoderSet& precoders,
                  const ChannelTensor& channels, const TransceiverSet& tx,
                  const Association& assoc, const std::vector<double>& sigma2_slot,
                  int k, int s);

// K x S table of exact rates (nats per RBG use).
Eigen::MatrixXd exact_rate_table(const Schedule& schedule, const PrecoderSet& precoders,
                                 const ChannelTensor& channels, const TransceiverSet& tx,
                                 const Association& assoc,
                                 const std::vector<double>& sigma2_slot);

// Interference-free SINR of a scheduled UE under intra-set zero forcing:
// |sum_m lambda sqrt(P_m/A_m) / ||w_hat_m|||^2 / sigma^2.
double simplified_sinr(const TransceiverSet& tx, const PrecoderSet& precoders,
                       const Association& assoc, const std::vector<double>& p_mw,
                       double sigma2, int k, int s);

// Per-BS SINR share lambda^2 P_m / (A_m sigma^2 ||w_hat||^2). Summed over
// B_k this lower-bounds the simplified SINR.
double per_bs_sinr_component(double lambda, double p_mw, int a_m, double sigma2,
                             double hat_norm2);

// Theorem-style separable surrogate rate in nats: for an NJT UE
// b*(psi + sum_j b_j d - ln A_m); for a JT UE the Jensen-separated per-BS
// average with psi_tilde. Returns 0 when unscheduled.
double approx_rate(const Schedule& schedule, const RateCoefficients& coeffs, int k, int s);

// sum_{k not in Q} sum_s rate(k,s) + rho * sum_{j in Q} min(sum_s rate(j,s), Q_j).
// Shared by the surrogate objective and the effective sum rate.
double penalized_objective(const Eigen::MatrixXd& rate_table, const Association& assoc,
                           double rho);

double surrogate_objective(const Schedule& schedule, const RateCoefficients& coeffs,
                           const Association& assoc, double rho);

Eigen::MatrixXd approx_rate_table(const Schedule& schedule, const RateCoefficients& coeffs);

// Penalized objective at rho = 1 over exact rates.
double effective_sum_rate(const Eigen::MatrixXd& exact_rates, const Association& assoc);

// Fraction of QoS UEs meeting their target; 1 when Q is empty.
double satisfaction_rate(const Eigen::MatrixXd& exact_rates, const Association& assoc);

}  // namespace ezfsched
