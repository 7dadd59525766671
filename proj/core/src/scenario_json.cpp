#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ezfsched/scenario.hpp"

namespace ezfsched {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& why) {
  throw std::invalid_argument("scenario config: " + where + ": " + why);
}

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& required,
                  const std::set<std::string>& optional = {}) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!required.count(key) && !optional.count(key)) fail(where, "unknown key '" + key + "'");
  }
  for (const auto& key : required)
    if (!obj.contains(key)) fail(where, "missing key '" + key + "'");
}

double number_at(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.at(key).is_number()) fail(where + "." + key, "expected a number");
  return obj.at(key).get<double>();
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail("json", e.what());
  }

  require_keys(root, "root",
               {"bs_positions", "ue_count", "ue_region", "ue_height", "nt", "nr", "carriers",
                "p_m_dbm", "noise_density_dbm_hz", "beta_db", "qos_fraction", "qos_target",
                "seed"});

  ScenarioConfig cfg;
  if (!root["bs_positions"].is_array() || root["bs_positions"].empty())
    fail("bs_positions", "expected a non-empty array of [x,y,z]");
  for (const auto& p : root["bs_positions"]) {
    if (!p.is_array() || p.size() != 3) fail("bs_positions", "each entry must be [x,y,z]");
    cfg.bs_positions.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
  }
  cfg.ue_count = root["ue_count"].get<int>();

  const json& region = root["ue_region"];
  require_keys(region, "ue_region", {"x_min", "x_max", "y_min", "y_max"});
  cfg.ue_region = {number_at(region, "ue_region", "x_min"), number_at(region, "ue_region", "x_max"),
                   number_at(region, "ue_region", "y_min"), number_at(region, "ue_region", "y_max")};
  cfg.ue_height = number_at(root, "root", "ue_height");
  cfg.nt = root["nt"].get<int>();
  cfg.nr = root["nr"].get<int>();

  if (!root["carriers"].is_array() || root["carriers"].empty())
    fail("carriers", "expected a non-empty array");
  for (std::size_t i = 0; i < root["carriers"].size(); ++i) {
    const json& c = root["carriers"][i];
    const std::string tag = "carriers[" + std::to_string(i) + "]";
    require_keys(c, tag,
                 {"center_freq_hz", "rbg_count", "subcarriers_per_rbg", "subcarrier_spacing_hz"});
    CarrierConfig cc;
    cc.center_freq_hz = number_at(c, tag, "center_freq_hz");
    cc.rbg_count = c["rbg_count"].get<int>();
    cc.subcarriers_per_rbg = c["subcarriers_per_rbg"].get<int>();
    cc.subcarrier_spacing_hz = number_at(c, tag, "subcarrier_spacing_hz");
    cfg.carriers.push_back(cc);
  }

  if (root["p_m_dbm"].is_number()) {
    cfg.p_m_dbm = {root["p_m_dbm"].get<double>()};
  } else if (root["p_m_dbm"].is_array()) {
    for (const auto& v : root["p_m_dbm"]) cfg.p_m_dbm.push_back(v.get<double>());
  } else {
    fail("p_m_dbm", "expected a number or an array");
  }

  cfg.noise_density_dbm_hz = number_at(root, "root", "noise_density_dbm_hz");
  cfg.beta_db = number_at(root, "root", "beta_db");
  cfg.qos_fraction = number_at(root, "root", "qos_fraction");
  cfg.qos_target = number_at(root, "root", "qos_target");
  if (!root["seed"].is_number_unsigned()) fail("seed", "expected an unsigned integer");
  cfg.seed = root["seed"].get<std::uint64_t>();

  cfg.validate();
  return cfg;
}

ScenarioConfig ScenarioConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("scenario config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string ScenarioConfig::to_json_text() const {
  json root;
  for (const auto& p : bs_positions) root["bs_positions"].push_back({p.x(), p.y(), p.z()});
  root["ue_count"] = ue_count;
  root["ue_region"] = {{"x_min", ue_region.x_min},
                       {"x_max", ue_region.x_max},
                       {"y_min", ue_region.y_min},
                       {"y_max", ue_region.y_max}};
  root["ue_height"] = ue_height;
  root["nt"] = nt;
  root["nr"] = nr;
  for (const auto& c : carriers)
    root["carriers"].push_back({{"center_freq_hz", c.center_freq_hz},
                                {"rbg_count", c.rbg_count},
                                {"subcarriers_per_rbg", c.subcarriers_per_rbg},
                                {"subcarrier_spacing_hz", c.subcarrier_spacing_hz}});
  if (p_m_dbm.size() == 1)
    root["p_m_dbm"] = p_m_dbm[0];
  else
    root["p_m_dbm"] = p_m_dbm;
  root["noise_density_dbm_hz"] = noise_density_dbm_hz;
  root["beta_db"] = beta_db;
  root["qos_fraction"] = qos_fraction;
  root["qos_target"] = qos_target;
  root["seed"] = seed;
  return root.dump(2);
}

}  // namespace ezfsched
