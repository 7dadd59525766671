#include "ezfsched/beamforming.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ezfsched {

Rank1Svd svd_rank1_parts(const Eigen::MatrixXcd& matrix) {
  Rank1Svd out;
  const auto rows = matrix.rows();
  const auto cols = matrix.cols();
  if (matrix.norm() == 0.0) {
    out.lambda = 0.0;
    out.left = Eigen::VectorXcd::Unit(rows, 0);
    out.right = Eigen::VectorXcd::Unit(cols, 0);
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.lambda = svd.singularValues()(0);
  out.left = svd.matrixU().col(0);
  out.right = svd.matrixV().col(0);

  // Rotate both singular vectors by a common unit scalar so the
  // largest-magnitude entry of `right` lands on the real positive axis;
  // left*right^H is unchanged and the output becomes reproducible.
  Eigen::Index imax = 0;
  out.right.cwiseAbs().maxCoeff(&imax);
  const std::complex<double> z = out.right(imax);
  if (std::abs(z) > 0) {
    const std::complex<double> rot = std::conj(z) / std::abs(z);
    out.right *= rot;
    out.left *= rot;
    out.right(imax) = std::complex<double>(out.right(imax).real(), 0.0);
  }
  return out;
}

Eigen::MatrixXcd aggregate_jt_channel(const ChannelTensor& channels, const Association& assoc,
                                      int i, int s) {
  const auto& bk = assoc.serving[i];
  Eigen::MatrixXcd stacked(channels.nr, static_cast<Eigen::Index>(bk.size()) * channels.nt);
  for (std::size_t bi = 0; bi < bk.size(); ++bi)
    stacked.middleCols(static_cast<Eigen::Index>(bi) * channels.nt, channels.nt) =
        channels.at(bk[bi], i, s);
  return stacked;
}

TransceiverSet build_transceivers(const ChannelTensor& channels, const Association& assoc) {
  const int K = channels.K;
  const int S = channels.S;
  TransceiverSet tx;
  tx.K = K;
  tx.S = S;
  tx.nr = channels.nr;
  tx.nt = channels.nt;
  tx.lambda.assign(static_cast<std::size_t>(K) * S, 0.0);
  tx.u.resize(static_cast<std::size_t>(K) * S);
  tx.v_offset.resize(K);
  std::size_t total = 0;
  for (int k = 0; k < K; ++k) {
    tx.v_offset[k] = total;
    total += assoc.serving[k].size() * static_cast<std::size_t>(S);
  }
  tx.v.resize(total);

  for (int k = 0; k < K; ++k) {
    const auto& bk = assoc.serving[k];
    for (int s = 0; s < S; ++s) {
      const std::size_t ks = static_cast<std::size_t>(k) * S + s;
      if (bk.size() == 1) {
        const Rank1Svd r = svd_rank1_parts(channels.at(bk[0], k, s));
        tx.lambda[ks] = r.lambda;
        tx.u[ks] = r.left;
        tx.v[tx.v_offset[k] + s] = r.right;
      } else {
        const Rank1Svd r = svd_rank1_parts(aggregate_jt_channel(channels, assoc, k, s));
        tx.lambda[ks] = r.lambda;
        tx.u[ks] = r.left;
        for (std::size_t bi = 0; bi < bk.size(); ++bi)
          tx.v[tx.v_offset[k] + bi * S + s] =
              r.right.segment(static_cast<Eigen::Index>(bi) * channels.nt, channels.nt);
      }
    }
  }
  return tx;
}

int SlotPrecoders::col_of(int k) const {
  for (std::size_t i = 0; i < ues.size(); ++i)
    if (ues[i] == k) return static_cast<int>(i);
  return -1;
}

SlotPrecoders build_slot_precoders(const TransceiverSet& tx, const Association& assoc,
                                   const Schedule& schedule, int m, int s, double p_mw) {
  SlotPrecoders out;
  for (int k : assoc.attached[m])
    if (schedule.get(k, s)) out.ues.push_back(k);
  const int n = static_cast<int>(out.ues.size());
  if (n == 0) return out;

  auto slot_error = [&](const std::string& what) {
    std::ostringstream msg;
    msg << "ezf precoder: " << what << " at BS " << m << " slot " << s << " (UEs:";
    for (int k : out.ues) msg << ' ' << k;
    msg << ")";
    return std::runtime_error(msg.str());
  };

  if (n > tx.nt) throw slot_error("over-scheduled spatial layer, A_m > nt");

  Eigen::MatrixXcd vhat(tx.nt, n);
  for (int i = 0; i < n; ++i) {
    const int k = out.ues[i];
    const int bi = assoc.serving_index(k, m);
    vhat.col(i) = tx.v_block(k, bi, s);
  }

  const Eigen::MatrixXcd gram = vhat.adjoint() * vhat;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
  const double emin = es.eigenvalues().minCoeff();
  const double emax = es.eigenvalues().maxCoeff();
  if (!(emin > 0) || emax / emin > kEzfConditionLimit)
    throw slot_error("rank-deficient stacked directions");

  Eigen::MatrixXcd what = vhat * gram.llt().solve(Eigen::MatrixXcd::Identity(n, n));
  out.hat_norm2.resize(n);
  out.w.resize(tx.nt, n);
  const double target = std::sqrt(p_mw / n);
  for (int i = 0; i < n; ++i) {
    out.hat_norm2[i] = what.col(i).squaredNorm();
    out.w.col(i) = what.col(i) * (target / std::sqrt(out.hat_norm2[i]));
  }
  return out;
}

PrecoderSet build_ezf_precoders(const TransceiverSet& tx, const Schedule& schedule,
                                const Association& assoc, const std::vector<double>& p_mw) {
  const int M = assoc.bs_count();
  const int S = tx.S;
  PrecoderSet set;
  set.M = M;
  set.S = S;
  set.slots.resize(static_cast<std::size_t>(M) * S);
  set.a.assign(static_cast<std::size_t>(M) * S, 0);
  for (int m = 0; m < M; ++m)
    for (int s = 0; s < S; ++s) {
      auto& slot = set.slots[static_cast<std::size_t>(m) * S + s];
      slot = build_slot_precoders(tx, assoc, schedule, m, s, p_mw[m]);
      set.a[static_cast<std::size_t>(m) * S + s] = static_cast<int>(slot.ues.size());
    }
  return set;
}

}  // namespace ezfsched
