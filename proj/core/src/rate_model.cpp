#include "ezfsched/rate_model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace ezfsched {

RateCoefficients compute_coefficients(const TransceiverSet& tx, const Association& assoc,
                                      const std::vector<double>& p_mw,
                                      const std::vector<double>& sigma2_slot) {
  const int M = assoc.bs_count();
  const int K = assoc.ue_count();
  const int S = tx.S;

  RateCoefficients coeffs;
  coeffs.K = K;
  coeffs.S = S;
  coeffs.M = M;
  coeffs.nt = tx.nt;
  coeffs.serving = assoc.serving;
  coeffs.bs.resize(M);

  for (int m = 0; m < M; ++m) {
    BsCoefficients& bm = coeffs.bs[m];
    bm.ue_ids = assoc.attached[m];
    bm.local.assign(K, -1);
    const int n = static_cast<int>(bm.ue_ids.size());
    for (int i = 0; i < n; ++i) bm.local[bm.ue_ids[i]] = i;

    bm.psi.resize(n, S);
    bm.psi_tilde.resize(n, S);
    bm.eta.assign(S, Eigen::MatrixXd::Zero(n, n));
    bm.d.assign(S, Eigen::MatrixXd::Zero(n, n));

    for (int s = 0; s < S; ++s) {
      const double sigma2 = sigma2_slot[s];
      for (int i = 0; i < n; ++i) {
        const int k = bm.ue_ids[i];
        const double lambda = tx.lam(k, s);
        const int bi = assoc.serving_index(k, m);
        const double vnorm2 = tx.v_block(k, bi, s).squaredNorm();
        const double ln_b = std::log(static_cast<double>(assoc.serving[k].size()));
        if (lambda > 0.0 && vnorm2 > 0.0) {
          bm.psi(i, s) = std::log(lambda * lambda * vnorm2 * p_mw[m] / sigma2);
          bm.psi_tilde(i, s) = ln_b + bm.psi(i, s);
        } else {
          bm.psi(i, s) = RateCoefficients::kPsiFloor;
          bm.psi_tilde(i, s) = RateCoefficients::kPsiFloor;
        }
      }
      for (int i = 0; i < n; ++i) {
        const int j = bm.ue_ids[i];
        const auto& vj = tx.v_block(j, assoc.serving_index(j, m), s);
        const double nj = vj.squaredNorm();
        for (int l = i + 1; l < n; ++l) {
          const int k = bm.ue_ids[l];
          const auto& vk = tx.v_block(k, assoc.serving_index(k, m), s);
          const double nk = vk.squaredNorm();
          double eta = 0.0;
          if (nj > 0.0 && nk > 0.0) eta = std::norm(vj.dot(vk)) / (nj * nk);
          eta = std::clamp(eta, 0.0, 1.0);
          const double d = eta >= 1.0 - RateCoefficients::kEtaClamp
                               ? std::log(RateCoefficients::kEtaClamp)
                               : std::log1p(-eta);
          bm.eta[s](i, l) = eta;
          bm.eta[s](l, i) = eta;
          bm.d[s](i, l) = d;
          bm.d[s](l, i) = d;
        }
      }
    }
  }
  return coeffs;
}

double exact_sinr(const Schedule& schedule, const PrecoderSet& precoders,
                  const ChannelTensor& channels, const TransceiverSet& tx,
                  const Association& assoc, const std::vector<double>& sigma2_slot,
                  int k, int s) {
  if (!schedule.get(k, s)) return 0.0;
  const Eigen::VectorXcd& u = tx.comb(k, s);

  std::complex<double> signal(0.0, 0.0);
  for (int m : assoc.serving[k]) {
    const auto& slot = precoders.at(m, s);
    signal += u.dot(channels.at(m, k, s) * slot.w.col(slot.col_of(k)));
  }

  double interference = 0.0;
  for (int j = 0; j < schedule.K; ++j) {
    if (j == k || !schedule.get(j, s)) continue;
    std::complex<double> amp(0.0, 0.0);
    for (int l : assoc.serving[j]) {
      const auto& slot = precoders.at(l, s);
      amp += u.dot(channels.at(l, k, s) * slot.w.col(slot.col_of(j)));
    }
    interference += std::norm(amp);
  }
  return std::norm(signal) / (interference + sigma2_slot[s]);
}

double exact_rate(const Schedule& schedule, const PrecoderSet& precoders,
                  const ChannelTensor& channels, const TransceiverSet& tx,
                  const Association& assoc, const std::vector<double>& sigma2_slot,
                  int k, int s) {
  if (!schedule.get(k, s)) return 0.0;
  return std::log1p(exact_sinr(schedule, precoders, channels, tx, assoc, sigma2_slot, k, s));
}

Eigen::MatrixXd exact_rate_table(const Schedule& schedule, const PrecoderSet& precoders,
                                 const ChannelTensor& channels, const TransceiverSet& tx,
                                 const Association& assoc,
                                 const std::vector<double>& sigma2_slot) {
  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(schedule.K, schedule.S);
  for (int s = 0; s < schedule.S; ++s)
    for (int k = 0; k < schedule.K; ++k)
      if (schedule.get(k, s))
        rates(k, s) = exact_rate(schedule, precoders, channels, tx, assoc, sigma2_slot, k, s);
  return rates;
}

double simplified_sinr(const TransceiverSet& tx, const PrecoderSet& precoders,
                       const Association& assoc, const std::vector<double>& p_mw,
                       double sigma2, int k, int s) {
  double amp = 0.0;
  for (int m : assoc.serving[k]) {
    const auto& slot = precoders.at(m, s);
    const int col = slot.col_of(k);
    if (col < 0) return 0.0;
    amp += tx.lam(k, s) * std::sqrt(p_mw[m] / precoders.layers(m, s)) /
           std::sqrt(slot.hat_norm2[col]);
  }
  return amp * amp / sigma2;
}

double per_bs_sinr_component(double lambda, double p_mw, int a_m, double sigma2,
                             double hat_norm2) {
  return lambda * lambda * p_mw / (a_m * sigma2 * hat_norm2);
}

double approx_rate(const Schedule& schedule, const RateCoefficients& coeffs, int k, int s) {
  if (!schedule.get(k, s)) return 0.0;
  const auto& bk = coeffs.serving[k];
  const double norm = static_cast<double>(bk.size());
  double acc = 0.0;
  for (int m : bk) {
    const BsCoefficients& bm = coeffs.bs[m];
    const int lk = bm.local[k];
    double term = bm.psi_tilde(lk, s);
    const auto& d = bm.d[s];
    for (std::size_t i = 0; i < bm.ue_ids.size(); ++i) {
      const int j = bm.ue_ids[i];
      if (j != k && schedule.get(j, s)) term += d(static_cast<int>(i), lk);
    }
    term -= std::log(static_cast<double>(schedule.layers(m, s)));
    acc += term;
  }
  return acc / norm;
}

Eigen::MatrixXd approx_rate_table(const Schedule& schedule, const RateCoefficients& coeffs) {
  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(schedule.K, schedule.S);
  for (int s = 0; s < schedule.S; ++s)
    for (int k = 0; k < schedule.K; ++k) rates(k, s) = approx_rate(schedule, coeffs, k, s);
  return rates;
}

double penalized_objective(const Eigen::MatrixXd& rate_table, const Association& assoc,
                           double rho) {
  double g = 0.0;
  for (int k = 0; k < rate_table.rows(); ++k) {
    const double total = rate_table.row(k).sum();
    if (assoc.is_qos[k])
      g += rho * std::min(total, assoc.qos_target[k]);
    else
      g += total;
  }
  return g;
}

double surrogate_objective(const Schedule& schedule, const RateCoefficients& coeffs,
                           const Association& assoc, double rho) {
  return penalized_objective(approx_rate_table(schedule, coeffs), assoc, rho);
}

double effective_sum_rate(const Eigen::MatrixXd& exact_rates, const Association& assoc) {
  return penalized_objective(exact_rates, assoc, 1.0);
}

double satisfaction_rate(const Eigen::MatrixXd& exact_rates, const Association& assoc) {
  if (assoc.qos_ues.empty()) return 1.0;
  int met = 0;
  for (int j : assoc.qos_ues)
    if (exact_rates.row(j).sum() >= assoc.qos_target[j]) ++met;
  return static_cast<double>(met) / static_cast<double>(assoc.qos_ues.size());
}

}  // namespace ezfsched
