#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "ezfsched/rng.hpp"
#include "ezfsched/scenario.hpp"
#include "ezfsched/units.hpp"

using namespace ezfsched;

namespace {

ScenarioConfig tiny_config() {
  ScenarioConfig cfg;
  cfg.bs_positions = {{0.0, 0.0, 25.0}, {500.0, 0.0, 25.0}};
  cfg.ue_count = 6;
  cfg.ue_region = {-200.0, 700.0, -300.0, 300.0};
  cfg.nt = 8;
  cfg.nr = 2;
  cfg.carriers = {{3.5e9, 2, 48, 30e3}};
  cfg.p_m_dbm = {10.0};
  cfg.beta_db = 5.0;
  cfg.qos_fraction = 0.5;
  cfg.qos_target = 2.0;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("desk profile matches the reference geometry") {
  const ScenarioConfig cfg = ScenarioConfig::desk_profile();
  const Scenario sc = generate_scenario(cfg);
  REQUIRE(sc.bs_count() == 3);
  CHECK(sc.bs_positions[0] == Eigen::Vector3d(0.0, -300.0, 25.0));
  CHECK(sc.bs_positions[1] == Eigen::Vector3d(-1000.0, -300.0, 25.0));
  CHECK(sc.bs_positions[2] == Eigen::Vector3d(-500.0, -1200.0, 25.0));
  CHECK(sc.grid.total == 39);
  CHECK(sc.ue_count() == 45);
  for (const auto& p : sc.ue_positions) {
    CHECK(p.x() >= -1400.0);
    CHECK(p.x() <= 400.0);
    CHECK(p.y() >= -1400.0);
    CHECK(p.y() <= -100.0);
    CHECK(p.z() == 1.5);
  }
}

TEST_CASE("degenerate point region places the UE exactly there") {
  ScenarioConfig cfg = tiny_config();
  cfg.ue_count = 1;
  cfg.ue_region = {12.5, 12.5, -40.0, -40.0};
  const Scenario sc = generate_scenario(cfg);
  CHECK(sc.ue_positions[0] == Eigen::Vector3d(12.5, -40.0, cfg.ue_height));
}

TEST_CASE("generation is deterministic and seed-sensitive") {
  const ScenarioConfig cfg = tiny_config();
  const Scenario a = generate_scenario(cfg);
  const Scenario b = generate_scenario(cfg);
  REQUIRE(a.ue_positions.size() == b.ue_positions.size());
  for (std::size_t k = 0; k < a.ue_positions.size(); ++k)
    CHECK(a.ue_positions[k] == b.ue_positions[k]);  // bitwise

  ScenarioConfig other = cfg;
  other.seed = 8;
  const Scenario c = generate_scenario(other);
  bool any_diff = false;
  for (std::size_t k = 0; k < a.ue_positions.size(); ++k)
    any_diff = any_diff || a.ue_positions[k] != c.ue_positions[k];
  CHECK(any_diff);
}

TEST_CASE("adding UEs keeps existing draws") {
  ScenarioConfig small = tiny_config();
  ScenarioConfig large = tiny_config();
  large.ue_count = 11;
  const Scenario a = generate_scenario(small);
  const Scenario b = generate_scenario(large);
  for (int k = 0; k < small.ue_count; ++k) CHECK(a.ue_positions[k] == b.ue_positions[k]);

  const ChannelTensor ha = synthesize_channels(a);
  const ChannelTensor hb = synthesize_channels(b);
  for (int m = 0; m < 2; ++m)
    for (int k = 0; k < small.ue_count; ++k)
      for (int s = 0; s < a.grid.total; ++s) CHECK(ha.at(m, k, s) == hb.at(m, k, s));
}

TEST_CASE("config validation names the offending field") {
  ScenarioConfig cfg = tiny_config();
  cfg.ue_count = 0;
  CHECK_THROWS_WITH_AS(generate_scenario(cfg), doctest::Contains("ue_count"),
                       std::invalid_argument);
  cfg = tiny_config();
  cfg.nt = 1;  // < nr
  CHECK_THROWS_WITH_AS(generate_scenario(cfg), doctest::Contains("nt"), std::invalid_argument);
  cfg = tiny_config();
  cfg.beta_db = -1.0;
  CHECK_THROWS_WITH_AS(generate_scenario(cfg), doctest::Contains("beta_db"),
                       std::invalid_argument);
  cfg = tiny_config();
  cfg.qos_fraction = 1.5;
  CHECK_THROWS_WITH_AS(generate_scenario(cfg), doctest::Contains("qos_fraction"),
                       std::invalid_argument);
  cfg = tiny_config();
  cfg.carriers.clear();
  CHECK_THROWS_WITH_AS(generate_scenario(cfg), doctest::Contains("carriers"),
                       std::invalid_argument);
}

TEST_CASE("path loss ratio of two distances follows the exponent") {
  const double d = 120.0;
  const double f = 3.5e9;
  const double g1 = db_to_linear(-path_loss_db(d, f));
  const double g2 = db_to_linear(-path_loss_db(2 * d, f));
  CHECK(g1 / g2 == doctest::Approx(std::pow(2.0, kPathLossExponent)).epsilon(1e-12));
}

TEST_CASE("distances below the clamp share one gain") {
  const double f = 3.2e9;
  CHECK(path_loss_db(0.0, f) == path_loss_db(10.0, f));
  CHECK(path_loss_db(3.0, f) == path_loss_db(10.0, f));
  CHECK(path_loss_db(11.0, f) > path_loss_db(10.0, f));
}

TEST_CASE("mean squared channel entry matches the large-scale gain") {
  // Monte-Carlo over 1e4 independent fading draws at one fixed position;
  // |h|^2 has mean g and variance g^2, so the sample mean over n*nr*nt
  // entries stays within 3 sigma = 3*g/sqrt(n*nr*nt).
  ScenarioConfig cfg = tiny_config();
  cfg.ue_count = 1;
  cfg.bs_positions = {{0.0, 0.0, 25.0}};
  cfg.ue_region = {150.0, 150.0, 0.0, 0.0};
  cfg.nt = 4;
  cfg.nr = 2;
  cfg.carriers = {{3.5e9, 1, 48, 30e3}};

  // Normalize per draw: the large-scale gain carries that seed's shadowing.
  const int draws = 10000;
  double sum = 0.0;
  for (int i = 0; i < draws; ++i) {
    cfg.seed = 1000 + i;
    const Scenario sc = generate_scenario(cfg);
    const ChannelTensor t = synthesize_channels(sc);
    sum += t.at(0, 0, 0).squaredNorm() / t.large_scale_gain(0, 0);
  }
  const int entries = draws * cfg.nt * cfg.nr;
  const double mean = sum / entries;
  const double three_sigma = 3.0 / std::sqrt(static_cast<double>(entries));
  CHECK(std::abs(mean - 1.0) <= three_sigma);
}

TEST_CASE("channel synthesis is deterministic") {
  const Scenario sc = generate_scenario(tiny_config());
  const ChannelTensor a = synthesize_channels(sc);
  const ChannelTensor b = synthesize_channels(sc);
  for (int m = 0; m < a.M; ++m)
    for (int k = 0; k < a.K; ++k)
      for (int s = 0; s < a.S; ++s) CHECK(a.at(m, k, s) == b.at(m, k, s));
}

TEST_CASE("channels follow the UE under relabeling with matched streams") {
  const Scenario base = generate_scenario(tiny_config());
  const ChannelTensor ha = synthesize_channels(base);

  // Reverse the UE order, carrying positions and stream ids along.
  Scenario permuted = base;
  const int K = base.ue_count();
  for (int k = 0; k < K; ++k) {
    permuted.ue_positions[k] = base.ue_positions[K - 1 - k];
    permuted.ue_stream_ids[k] = base.ue_stream_ids[K - 1 - k];
  }
  const ChannelTensor hb = synthesize_channels(permuted);
  for (int m = 0; m < ha.M; ++m)
    for (int k = 0; k < K; ++k)
      for (int s = 0; s < ha.S; ++s) CHECK(hb.at(m, k, s) == ha.at(m, K - 1 - k, s));
}

TEST_CASE("association follows the stated threshold rule") {
  // Gains are injected directly; only large_scale_gain matters here.
  ChannelTensor t;
  t.M = 3;
  t.K = 1;
  t.S = 0;
  t.large_scale_gain.resize(3, 1);
  t.large_scale_gain(0, 0) = db_to_linear(-80.0);
  t.large_scale_gain(1, 0) = db_to_linear(-83.0);
  t.large_scale_gain(2, 0) = db_to_linear(-90.0);

  SUBCASE("beta 5 adds the 3 dB-away BS") {
    const Association a = associate_users(t, 5.0);
    REQUIRE(a.serving[0] == std::vector<int>{0, 1});
    CHECK(a.jt(0));
    CHECK(a.cell_edge[0] == std::vector<int>{0});
    CHECK(a.cell_edge[1] == std::vector<int>{0});
    CHECK(a.cell_center[0].empty());
  }
  SUBCASE("beta 0 keeps a singleton") {
    const Association a = associate_users(t, 0.0);
    REQUIRE(a.serving[0] == std::vector<int>{0});
    CHECK_FALSE(a.jt(0));
    CHECK(a.cell_center[0] == std::vector<int>{0});
  }
  SUBCASE("equal gains at beta 0 pick the lower index") {
    t.large_scale_gain(1, 0) = t.large_scale_gain(0, 0);
    const Association a = associate_users(t, 0.0);
    CHECK(a.serving[0] == std::vector<int>{0});
  }
  SUBCASE("wide beta captures all") {
    const Association a = associate_users(t, 12.0);
    CHECK(a.serving[0] == std::vector<int>{0, 1, 2});
  }
}

TEST_CASE("raising beta never shrinks a serving set") {
  const Scenario sc = generate_scenario(tiny_config());
  const ChannelTensor t = synthesize_channels(sc);
  const double betas[] = {0.0, 1.0, 3.0, 5.0, 8.0, 12.0};
  Association prev = associate_users(t, betas[0]);
  for (std::size_t i = 1; i < std::size(betas); ++i) {
    const Association next = associate_users(t, betas[i]);
    for (int k = 0; k < t.K; ++k) {
      for (int m : prev.serving[k]) {
        CHECK(std::find(next.serving[k].begin(), next.serving[k].end(), m) !=
              next.serving[k].end());
      }
    }
    prev = next;
  }
}

TEST_CASE("every UE lands in exactly one partition class") {
  const Scenario sc = generate_scenario(tiny_config());
  const ChannelTensor t = synthesize_channels(sc);
  const Association a = associate_users(t, 6.0);
  for (int k = 0; k < t.K; ++k) {
    REQUIRE(!a.serving[k].empty());
    int center_hits = 0, edge_hits = 0;
    for (int m = 0; m < t.M; ++m) {
      center_hits += std::count(a.cell_center[m].begin(), a.cell_center[m].end(), k);
      edge_hits += std::count(a.cell_edge[m].begin(), a.cell_edge[m].end(), k);
    }
    if (a.jt(k)) {
      CHECK(center_hits == 0);
      CHECK(edge_hits == static_cast<int>(a.serving[k].size()));
    } else {
      CHECK(center_hits == 1);
      CHECK(edge_hits == 0);
    }
  }
}

TEST_CASE("qos selection count, determinism and the empty case") {
  ScenarioConfig cfg = ScenarioConfig::desk_profile();
  cfg.ue_count = 45;
  cfg.qos_fraction = 1.0 / 3.0;
  const Scenario sc = generate_scenario(cfg);
  const ChannelTensor t = synthesize_channels(sc);
  Association a = associate_users(t, cfg.beta_db);

  const Association with_q = select_qos_users(sc, a);
  CHECK(with_q.qos_ues.size() == 15);
  const std::set<int> unique(with_q.qos_ues.begin(), with_q.qos_ues.end());
  CHECK(unique.size() == with_q.qos_ues.size());
  for (int j : with_q.qos_ues) CHECK(with_q.qos_target[j] == cfg.qos_target);

  const Association again = select_qos_users(sc, a);
  CHECK(again.qos_ues == with_q.qos_ues);

  ScenarioConfig none = cfg;
  none.qos_fraction = 0.0;
  const Scenario sc0 = generate_scenario(none);
  const Association empty = select_qos_users(sc0, a);
  CHECK(empty.qos_ues.empty());
}

TEST_CASE("json config round-trips and rejects unknown keys") {
  const ScenarioConfig cfg = ScenarioConfig::desk_profile();
  const ScenarioConfig parsed = ScenarioConfig::from_json_text(cfg.to_json_text());
  CHECK(parsed.ue_count == cfg.ue_count);
  CHECK(parsed.beta_db == cfg.beta_db);
  CHECK(parsed.carriers.size() == cfg.carriers.size());
  CHECK(parsed.seed == cfg.seed);

  std::string text = cfg.to_json_text();
  text.insert(text.rfind('}'), ",\"bogus_key\": 3");
  CHECK_THROWS_WITH_AS(ScenarioConfig::from_json_text(text), doctest::Contains("bogus_key"),
                       std::invalid_argument);

  CHECK_THROWS_WITH_AS(ScenarioConfig::from_json_text("{\"ue_count\": 3}"),
                       doctest::Contains("missing key"), std::invalid_argument);
}

TEST_CASE("noise power scales with RBG bandwidth") {
  ScenarioConfig cfg = tiny_config();
  cfg.carriers = {{3.5e9, 1, 48, 30e3}, {3.5e9, 1, 24, 15e3}};
  const Scenario sc = generate_scenario(cfg);
  const double expected0 = dbm_to_mw(cfg.noise_density_dbm_hz) * 48 * 30e3;
  const double expected1 = dbm_to_mw(cfg.noise_density_dbm_hz) * 24 * 15e3;
  CHECK(sc.sigma2_mw[0] == doctest::Approx(expected0).epsilon(1e-12));
  CHECK(sc.sigma2_mw[1] == doctest::Approx(expected1).epsilon(1e-12));
  CHECK(sc.sigma2_slot[0] == sc.sigma2_mw[0]);
  CHECK(sc.sigma2_slot[1] == sc.sigma2_mw[1]);
}
