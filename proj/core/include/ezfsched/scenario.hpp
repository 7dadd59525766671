#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ezfsched {

struct CarrierConfig {
  double center_freq_hz = 3.5e9;
  int rbg_count = 13;
  int subcarriers_per_rbg = 48;
  double subcarrier_spacing_hz = 30e3;
};

struct Box2D {
  double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
};

// Network instance description. Positions in meters, powers in dBm; all
// dB/dBm quantities are converted to linear once, in generate_scenario.
struct ScenarioConfig {
  std::vector<Eigen::Vector3d> bs_positions;
  int ue_count = 1;
  Box2D ue_region;
  double ue_height = 1.5;
  int nt = 64;
  int nr = 4;
  std::vector<CarrierConfig> carriers;
  std::vector<double> p_m_dbm;  // per-BS per-RBG power budget
  double noise_density_dbm_hz = -174.0;
  double beta_db = 5.0;
  double qos_fraction = 1.0 / 3.0;
  double qos_target = 5.0;  // nats per frame, summed over all RBGs
  std::uint64_t seed = 1;

  // Throws std::invalid_argument with a field-level diagnostic.
  void validate() const;

  static ScenarioConfig from_json_text(const std::string& text);
  static ScenarioConfig from_json_file(const std::string& path);
  std::string to_json_text() const;

  // 3-cell / 3-carrier desk-scale default profile.
  static ScenarioConfig desk_profile();
};

// Flat indexing of RBGs: slot s <-> (carrier c, rbg r), c-major, r ascending.
struct SlotGrid {
  std::vector<int> rbg_count;  // per carrier
  std::vector<int> offset;     // per carrier
  int total = 0;

  SlotGrid() = default;
  explicit SlotGrid(const std::vector<CarrierConfig>& carriers);

  int slot(int c, int r) const { return offset[c] + r; }
  std::pair<int, int> cr(int s) const;
  int carrier_of(int s) const { return cr(s).first; }
  int carriers() const { return static_cast<int>(rbg_count.size()); }
};

struct Scenario {
  ScenarioConfig config;
  std::vector<Eigen::Vector3d> bs_positions;
  std::vector<Eigen::Vector3d> ue_positions;
  // Per-UE fading substream roots; channels follow these ids under UE
  // relabeling, which is what makes the synthesis exchangeable.
  std::vector<std::uint64_t> ue_stream_ids;
  SlotGrid grid;
  std::vector<double> p_mw;        // per BS, per RBG
  std::vector<double> sigma2_mw;   // per carrier (PSD x RBG bandwidth)
  std::vector<double> sigma2_slot; // per slot

  int bs_count() const { return static_cast<int>(bs_positions.size()); }
  int ue_count() const { return static_cast<int>(ue_positions.size()); }
};

Scenario generate_scenario(const ScenarioConfig& config);

// Log-distance path loss in dB: PL0 + 10*alpha*log10(d/d0) + 20*log10(f/f0),
// with PL0 = 32.4 dB, alpha = 3.5, d0 = 1 m, f0 = 3.5 GHz. Distances below
// 10 m are clamped.
double path_loss_db(double distance_m, double freq_hz);

constexpr double kMinBsUeDistanceM = 10.0;
constexpr double kPathLossExponent = 3.5;

// Per-link log-normal shadow fading, frequency-flat, drawn once per (BS, UE)
// from its own substream. The large spread is what separates the would-be JT
// servers (within beta of the strongest) from everything else, which lands
// well below the noise floor.
constexpr double kShadowingSigmaDb = 6.0;

struct ChannelTensor {
  int M = 0, K = 0, S = 0, nr = 0, nt = 0;
  SlotGrid grid;
  std::vector<Eigen::MatrixXcd> h;  // [(m*K + k)*S + s], each nr x nt
  Eigen::MatrixXd large_scale_gain; // M x K, linear, at the reference carrier

  const Eigen::MatrixXcd& at(int m, int k, int s) const { return h[(static_cast<std::size_t>(m) * K + k) * S + s]; }
  Eigen::MatrixXcd& at(int m, int k, int s) { return h[(static_cast<std::size_t>(m) * K + k) * S + s]; }
};

// Rayleigh fading per RBG scaled by the log-distance gain. Each (m,k,c,r)
// draw comes from its own substream, so synthesis is order-independent.
ChannelTensor synthesize_channels(const Scenario& scenario);

struct Association {
  // B_k, strongest gain first (ties toward lower BS index).
  std::vector<std::vector<int>> serving;
  std::vector<std::vector<int>> cell_center;  // K_m
  std::vector<std::vector<int>> cell_edge;    // U_m
  std::vector<std::vector<int>> attached;     // A_m = K_m U U_m, sorted
  std::vector<int> qos_ues;                   // Q, sorted
  std::vector<char> is_qos;                   // per UE
  std::vector<double> qos_target;             // per UE, meaningful when is_qos

  int bs_count() const { return static_cast<int>(attached.size()); }
  int ue_count() const { return static_cast<int>(serving.size()); }
  bool jt(int k) const { return serving[k].size() > 1; }
  // Position of BS m in B_k, or -1.
  int serving_index(int k, int m) const;
};

// Channel-strength association: primary BS is the strongest large-scale gain
// (ties toward lower index); with beta_db > 0, BSs within beta_db of the
// strongest join as JT links. At beta_db = 0 every serving set is a
// singleton, so no UE is JT.
Association associate_users(const ChannelTensor& channels, double beta_db);

// Draws floor(qos_fraction * K) UEs without replacement and assigns each the
// configured rate target.
Association select_qos_users(const Scenario& scenario, Association association);

}  // namespace ezfsched
