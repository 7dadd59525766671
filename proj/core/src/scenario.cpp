#include "ezfsched/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ezfsched/rng.hpp"
#include "ezfsched/units.hpp"

namespace ezfsched {

namespace {

[[noreturn]] void reject(const std::string& field, const std::string& why) {
  throw std::invalid_argument("scenario config: " + field + ": " + why);
}

}  // namespace

void ScenarioConfig::validate() const {
  if (bs_positions.empty()) reject("bs_positions", "at least one BS required");
  for (const auto& p : bs_positions)
    if (!p.allFinite()) reject("bs_positions", "coordinates must be finite");
  if (ue_count < 1) reject("ue_count", "must be >= 1 (got " + std::to_string(ue_count) + ")");
  if (!(ue_region.x_min <= ue_region.x_max)) reject("ue_region", "x_min must be <= x_max");
  if (!(ue_region.y_min <= ue_region.y_max)) reject("ue_region", "y_min must be <= y_max");
  if (!std::isfinite(ue_region.x_min) || !std::isfinite(ue_region.x_max) ||
      !std::isfinite(ue_region.y_min) || !std::isfinite(ue_region.y_max))
    reject("ue_region", "bounds must be finite");
  if (!std::isfinite(ue_height)) reject("ue_height", "must be finite");
  if (nr < 1) reject("nr", "must be >= 1");
  if (nt < nr) reject("nt", "must be >= nr");
  if (carriers.empty()) reject("carriers", "at least one carrier required");
  for (std::size_t c = 0; c < carriers.size(); ++c) {
    const auto& cc = carriers[c];
    const std::string tag = "carriers[" + std::to_string(c) + "]";
    if (!(cc.center_freq_hz > 0) || !std::isfinite(cc.center_freq_hz))
      reject(tag + ".center_freq_hz", "must be positive and finite");
    if (cc.rbg_count < 1) reject(tag + ".rbg_count", "must be >= 1");
    if (cc.subcarriers_per_rbg < 1) reject(tag + ".subcarriers_per_rbg", "must be >= 1");
    if (!(cc.subcarrier_spacing_hz > 0) || !std::isfinite(cc.subcarrier_spacing_hz))
      reject(tag + ".subcarrier_spacing_hz", "must be positive and finite");
  }
  if (p_m_dbm.size() != 1 && p_m_dbm.size() != bs_positions.size())
    reject("p_m_dbm", "must hold one value or one per BS");
  for (double p : p_m_dbm)
    if (!std::isfinite(p)) reject("p_m_dbm", "must be finite");
  if (!std::isfinite(noise_density_dbm_hz)) reject("noise_density_dbm_hz", "must be finite");
  if (!(beta_db >= 0) || !std::isfinite(beta_db)) reject("beta_db", "must be >= 0 and finite");
  if (!(qos_fraction >= 0 && qos_fraction <= 1))
    reject("qos_fraction", "must be within [0, 1]");
  if (!std::isfinite(qos_target)) reject("qos_target", "must be finite");
}

ScenarioConfig ScenarioConfig::desk_profile() {
  ScenarioConfig cfg;
  cfg.bs_positions = {{0.0, -300.0, 25.0}, {-1000.0, -300.0, 25.0}, {-500.0, -1200.0, 25.0}};
  cfg.ue_count = 45;
  cfg.ue_region = {-1400.0, 400.0, -1400.0, -100.0};
  cfg.ue_height = 1.5;
  cfg.nt = 64;
  cfg.nr = 4;
  cfg.carriers = {{3.2e9, 13, 48, 30e3}, {3.5e9, 13, 48, 30e3}, {3.8e9, 13, 48, 30e3}};
  cfg.p_m_dbm = {10.0};
  cfg.noise_density_dbm_hz = -174.0;
  cfg.beta_db = 5.0;
  cfg.qos_fraction = 1.0 / 3.0;
  cfg.qos_target = 5.0;
  cfg.seed = 1;
  return cfg;
}

SlotGrid::SlotGrid(const std::vector<CarrierConfig>& carriers) {
  rbg_count.reserve(carriers.size());
  offset.reserve(carriers.size());
  for (const auto& c : carriers) {
    offset.push_back(total);
    rbg_count.push_back(c.rbg_count);
    total += c.rbg_count;
  }
}

std::pair<int, int> SlotGrid::cr(int s) const {
  for (int c = static_cast<int>(offset.size()) - 1; c >= 0; --c)
    if (s >= offset[c]) return {c, s - offset[c]};
  return {0, s};
}

double path_loss_db(double distance_m, double freq_hz) {
  const double d = std::max(distance_m, kMinBsUeDistanceM);
  return 32.4 + 10.0 * kPathLossExponent * std::log10(d) + 20.0 * std::log10(freq_hz / 3.5e9);
}

Scenario generate_scenario(const ScenarioConfig& config) {
  config.validate();
  Scenario sc;
  sc.config = config;
  sc.bs_positions = config.bs_positions;
  sc.grid = SlotGrid(config.carriers);

  const int K = config.ue_count;
  sc.ue_positions.resize(K);
  sc.ue_stream_ids.resize(K);
  const std::uint64_t drop_root = rng::substream(config.seed, "ue-drop");
  for (int k = 0; k < K; ++k) {
    auto eng = rng::make_engine(rng::chain(drop_root, {static_cast<std::uint64_t>(k)}));
    std::uniform_real_distribution<double> ux(config.ue_region.x_min, config.ue_region.x_max);
    std::uniform_real_distribution<double> uy(config.ue_region.y_min, config.ue_region.y_max);
    const double x = ux(eng);
    const double y = uy(eng);
    sc.ue_positions[k] = {x, y, config.ue_height};
    sc.ue_stream_ids[k] = static_cast<std::uint64_t>(k);
  }

  sc.p_mw.resize(config.bs_positions.size());
  for (std::size_t m = 0; m < sc.p_mw.size(); ++m)
    sc.p_mw[m] = dbm_to_mw(config.p_m_dbm.size() == 1 ? config.p_m_dbm[0] : config.p_m_dbm[m]);

  sc.sigma2_mw.reserve(config.carriers.size());
  for (const auto& c : config.carriers) {
    const double bw_hz = c.subcarriers_per_rbg * c.subcarrier_spacing_hz;
    sc.sigma2_mw.push_back(dbm_to_mw(config.noise_density_dbm_hz) * bw_hz);
  }
  sc.sigma2_slot.resize(sc.grid.total);
  for (int s = 0; s < sc.grid.total; ++s) sc.sigma2_slot[s] = sc.sigma2_mw[sc.grid.carrier_of(s)];
  return sc;
}

ChannelTensor synthesize_channels(const Scenario& scenario) {
  const int M = scenario.bs_count();
  const int K = scenario.ue_count();
  const int S = scenario.grid.total;
  const int nr = scenario.config.nr;
  const int nt = scenario.config.nt;

  ChannelTensor t;
  t.M = M;
  t.K = K;
  t.S = S;
  t.nr = nr;
  t.nt = nt;
  t.grid = scenario.grid;
  t.h.resize(static_cast<std::size_t>(M) * K * S);
  t.large_scale_gain.resize(M, K);

  const std::uint64_t fading_root = rng::substream(scenario.config.seed, "fading");
  const std::uint64_t shadow_root = rng::substream(scenario.config.seed, "shadowing");
  for (int m = 0; m < M; ++m) {
    for (int k = 0; k < K; ++k) {
      const double dist = (scenario.bs_positions[m] - scenario.ue_positions[k]).norm();
      auto shadow_eng = rng::make_engine(
          rng::chain(shadow_root, {scenario.ue_stream_ids[k], static_cast<std::uint64_t>(m)}));
      std::normal_distribution<double> shadow(0.0, kShadowingSigmaDb);
      const double shadow_db = shadow(shadow_eng);
      // Reference carrier for the association gain is carrier 0; the
      // frequency term is common across BSs so the choice does not affect
      // the serving sets.
      t.large_scale_gain(m, k) = db_to_linear(
          shadow_db - path_loss_db(dist, scenario.config.carriers[0].center_freq_hz));
      const std::uint64_t link_root =
          rng::chain(fading_root, {scenario.ue_stream_ids[k], static_cast<std::uint64_t>(m)});
      for (int s = 0; s < S; ++s) {
        const auto [c, r] = scenario.grid.cr(s);
        const double gain_c = db_to_linear(
            shadow_db - path_loss_db(dist, scenario.config.carriers[c].center_freq_hz));
        const double amp = std::sqrt(gain_c);
        auto eng = rng::make_engine(
            rng::chain(link_root, {static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(r)}));
        std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
        Eigen::MatrixXcd& H = t.at(m, k, s);
        H.resize(nr, nt);
        for (int i = 0; i < nr; ++i)
          for (int j = 0; j < nt; ++j) {
            const double re = gauss(eng);
            const double im = gauss(eng);
            H(i, j) = std::complex<double>(amp * re, amp * im);
          }
      }
    }
  }
  return t;
}

int Association::serving_index(int k, int m) const {
  const auto& bk = serving[k];
  for (std::size_t i = 0; i < bk.size(); ++i)
    if (bk[i] == m) return static_cast<int>(i);
  return -1;
}

Association associate_users(const ChannelTensor& channels, double beta_db) {
  const int M = channels.M;
  const int K = channels.K;
  Association a;
  a.serving.resize(K);
  a.cell_center.resize(M);
  a.cell_edge.resize(M);
  a.attached.resize(M);
  a.is_qos.assign(K, 0);
  a.qos_target.assign(K, 0.0);

  for (int k = 0; k < K; ++k) {
    int best = 0;
    for (int m = 1; m < M; ++m)
      if (channels.large_scale_gain(m, k) > channels.large_scale_gain(best, k)) best = m;
    const double best_db = linear_to_db(channels.large_scale_gain(best, k));

    std::vector<int> bk = {best};
    if (beta_db > 0) {
      for (int m = 0; m < M; ++m) {
        if (m == best) continue;
        const double gap = best_db - linear_to_db(channels.large_scale_gain(m, k));
        if (gap <= beta_db) bk.push_back(m);
      }
      std::stable_sort(bk.begin(), bk.end(), [&](int lhs, int rhs) {
        const double gl = channels.large_scale_gain(lhs, k);
        const double gr = channels.large_scale_gain(rhs, k);
        if (gl != gr) return gl > gr;
        return lhs < rhs;
      });
    }
    a.serving[k] = bk;
    if (bk.size() > 1) {
      for (int m : bk) a.cell_edge[m].push_back(k);
    } else {
      a.cell_center[bk[0]].push_back(k);
    }
  }
  for (int m = 0; m < M; ++m) {
    a.attached[m] = a.cell_center[m];
    a.attached[m].insert(a.attached[m].end(), a.cell_edge[m].begin(), a.cell_edge[m].end());
    std::sort(a.attached[m].begin(), a.attached[m].end());
  }
  return a;
}

Association select_qos_users(const Scenario& scenario, Association association) {
  const int K = scenario.ue_count();
  const int count = static_cast<int>(std::floor(scenario.config.qos_fraction * K));
  association.qos_ues.clear();
  association.is_qos.assign(K, 0);
  association.qos_target.assign(K, 0.0);
  if (count == 0) return association;

  std::vector<int> ids(K);
  std::iota(ids.begin(), ids.end(), 0);
  auto eng = rng::make_engine(rng::substream(scenario.config.seed, "qos-selection"));
  // Partial Fisher-Yates; the first `count` entries are the sample.
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, K - 1);
    std::swap(ids[i], ids[pick(eng)]);
  }
  association.qos_ues.assign(ids.begin(), ids.begin() + count);
  std::sort(association.qos_ues.begin(), association.qos_ues.end());
  for (int j : association.qos_ues) {
    association.is_qos[j] = 1;
    association.qos_target[j] = scenario.config.qos_target;
  }
  return association;
}

}  // namespace ezfsched
