// SPDX-License-Identifier: Apache-2.0
#include "satmoe/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "satmoe/errors.hpp"
#include "satmoe/numkernel.hpp"

namespace satmoe {

using nlohmann::json;

namespace {

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

[[noreturn]] void bad_enum(std::string_view what, std::string_view s) {
  throw ConfigError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

}  // namespace

std::string_view to_string(ScenarioKind v) {
  return v == ScenarioKind::homogeneous ? "homogeneous" : "heterogeneous";
}
std::string_view to_string(Protocol v) { return v == Protocol::rsma ? "rsma" : "sdma"; }
std::string_view to_string(ChannelMode v) {
  return v == ChannelMode::fixed ? "fixed" : "time_varying";
}
std::string_view to_string(Objective v) {
  switch (v) {
    case Objective::sum_rate: return "sum_rate";
    case Objective::energy_efficiency: return "energy_efficiency";
    case Objective::power_min: return "power_min";
  }
  return "sum_rate";
}
std::string_view to_string(GeoPrecoder v) { return v == GeoPrecoder::mrt ? "mrt" : "zf"; }
std::string_view to_string(Algorithm v) { return v == Algorithm::moe_ppo ? "moe_ppo" : "ppo"; }

ScenarioKind parse_scenario_kind(std::string_view s) {
  if (s == "homogeneous") return ScenarioKind::homogeneous;
  if (s == "heterogeneous") return ScenarioKind::heterogeneous;
  bad_enum("scenario kind", s);
}
Protocol parse_protocol(std::string_view s) {
  if (s == "rsma" || s == "RSMA") return Protocol::rsma;
  if (s == "sdma" || s == "SDMA") return Protocol::sdma;
  bad_enum("protocol", s);
}
ChannelMode parse_channel_mode(std::string_view s) {
  if (s == "fixed") return ChannelMode::fixed;
  if (s == "time_varying") return ChannelMode::time_varying;
  bad_enum("channel mode", s);
}
Objective parse_objective(std::string_view s) {
  if (s == "sum_rate" || s == "se") return Objective::sum_rate;
  if (s == "energy_efficiency" || s == "ee") return Objective::energy_efficiency;
  if (s == "power_min" || s == "power") return Objective::power_min;
  bad_enum("objective", s);
}
GeoPrecoder parse_geo_precoder(std::string_view s) {
  if (s == "mrt") return GeoPrecoder::mrt;
  if (s == "zf") return GeoPrecoder::zf;
  bad_enum("GEO precoder", s);
}
Algorithm parse_algorithm(std::string_view s) {
  if (s == "moe_ppo") return Algorithm::moe_ppo;
  if (s == "ppo") return Algorithm::ppo;
  bad_enum("algorithm", s);
}

double ScenarioConfig::p_max_leo_w() const { return dbm_to_watt(p_max_leo_dbm); }
double ScenarioConfig::p_max_geo_w() const { return dbm_to_watt(p_max_geo_dbm); }
double ScenarioConfig::noise_ggu_w() const { return dbm_to_watt(noise_ggu_dbm) * noise_bandwidth_hz; }
double ScenarioConfig::noise_lgu_w() const { return dbm_to_watt(noise_lgu_dbm) * noise_bandwidth_hz; }
double ScenarioConfig::jakes_rho() const {
  return bessel_j0(2.0 * std::numbers::pi * doppler_hz * slot_interval_s);
}

void ScenarioConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* msg) {
    if (!ok) throw ConfigError(msg, std::string("scenario.") + field);
  };
  require(K >= 1, "K", "must be >= 1");
  require(M >= 0, "M", "must be >= 0");
  require(scenario_kind == ScenarioKind::heterogeneous || M == 0, "M",
          "must be 0 for a homogeneous scenario");
  require(N_T >= K, "N_T", "must be >= K (zero-forcing needs N_T >= K)");
  require(scenario_kind == ScenarioKind::homogeneous || N_M >= 1, "N_M", "must be >= 1");
  require(geo_precoder == GeoPrecoder::mrt || ggu_count() <= N_M, "N_M",
          "must be >= M for the zero-forcing GEO precoder");
  require(std::isfinite(p_max_leo_dbm), "p_max_leo_dbm", "must be finite");
  require(std::isfinite(p_max_geo_dbm), "p_max_geo_dbm", "must be finite");
  require(std::isfinite(noise_ggu_dbm), "noise_ggu_dbm", "must be finite");
  require(std::isfinite(noise_lgu_dbm), "noise_lgu_dbm", "must be finite");
  require(noise_bandwidth_hz > 0.0, "noise_bandwidth_hz", "must be > 0");
  require(xi_ggu >= 0.0, "xi_ggu", "must be >= 0");
  require(xi_lgu >= 0.0, "xi_lgu", "must be >= 0");
  require(mu >= 1.0, "mu", "must be >= 1");
  require(p_circuit_w > 0.0, "p_circuit_w", "must be > 0");
  require(time_slots >= 1, "time_slots", "must be >= 1");
  require(carrier_freq_hz > 0.0, "carrier_freq_hz", "must be > 0");
  require(std::isfinite(sat_gain_dbi), "sat_gain_dbi", "must be finite");
  require(std::isfinite(user_gain_dbi), "user_gain_dbi", "must be finite");
  require(leo_altitude_m >= 1.0, "leo_altitude_m", "must be >= 1");
  require(geo_altitude_m >= 1.0, "geo_altitude_m", "must be >= 1");
  require(doppler_hz >= 0.0, "doppler_hz", "must be >= 0");
  require(slot_interval_s > 0.0, "slot_interval_s", "must be > 0");
  require(rician_factor >= 0.0, "rician_factor", "must be >= 0");
}

void PpoConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* msg) {
    if (!ok) throw ConfigError(msg, std::string("ppo.") + field);
  };
  require(experts >= 1, "experts", "must be >= 1");
  require(algorithm == Algorithm::moe_ppo || experts == 1, "experts", "plain PPO uses one actor");
  require(clip_start > 0.0 && clip_start < 1.0, "clip_start", "must lie in (0,1)");
  require(clip_end > 0.0 && clip_end < 1.0, "clip_end", "must lie in (0,1)");
  require(gamma >= 0.0 && gamma <= 1.0, "gamma", "must lie in [0,1]");
  require(n_step >= 1, "n_step", "must be >= 1");
  require(lr >= 0.0, "lr", "must be >= 0");
  require(batch_size >= 1, "batch_size", "must be >= 1");
  require(memory_size >= batch_size, "memory_size", "must be >= batch_size");
  require(update_epochs >= 1, "update_epochs", "must be >= 1");
  require(hidden >= 1, "hidden", "must be >= 1");
  require(std::isfinite(init_log_std), "init_log_std", "must be finite");
  require(std::isfinite(power_logit_offset), "power_logit_offset", "must be finite");
}

void RunConfig::validate() const {
  scenario.validate();
  ppo.validate();
  if (episodes < 0) throw ConfigError("must be >= 0", "episodes");
  if (eval_episodes < 0) throw ConfigError("must be >= 0", "eval_episodes");
}

PpoConfig desk_scale_ppo() {
  PpoConfig p;
  p.batch_size = 32;
  p.memory_size = 200;
  p.update_epochs = 10;
  return p;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

void reject_unknown(const json& j, const std::string& path, const std::set<std::string>& known) {
  if (!j.is_object()) throw ConfigError("expected an object", path);
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown field", path + "." + key);
  }
}

template <typename T>
void read(const json& j, const std::string& path, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError("expected a boolean", path + "." + key);
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ConfigError("expected an integer", path + "." + key);
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ConfigError("expected a number", path + "." + key);
    } else {
      if (!it->is_string()) throw ConfigError("expected a string", path + "." + key);
    }
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(e.what(), path + "." + key);
  }
}

template <typename E, typename Parse>
void read_enum(const json& j, const std::string& path, const char* key, E& out, Parse parse) {
  std::string s;
  if (!j.contains(key)) return;
  read(j, path, key, s);
  try {
    out = parse(s);
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), path + "." + key);
  }
}

}  // namespace

json to_json(const ScenarioConfig& c) {
  return json{{"scenario_kind", to_string(c.scenario_kind)},
              {"protocol", to_string(c.protocol)},
              {"channel_mode", to_string(c.channel_mode)},
              {"objective", to_string(c.objective)},
              {"geo_precoder", to_string(c.geo_precoder)},
              {"K", c.K},
              {"M", c.M},
              {"N_T", c.N_T},
              {"N_M", c.N_M},
              {"p_max_leo_dbm", c.p_max_leo_dbm},
              {"p_max_geo_dbm", c.p_max_geo_dbm},
              {"noise_ggu_dbm", c.noise_ggu_dbm},
              {"noise_lgu_dbm", c.noise_lgu_dbm},
              {"noise_bandwidth_hz", c.noise_bandwidth_hz},
              {"xi_ggu", c.xi_ggu},
              {"xi_lgu", c.xi_lgu},
              {"mu", c.mu},
              {"p_circuit_w", c.p_circuit_w},
              {"time_slots", c.time_slots},
              {"carrier_freq_hz", c.carrier_freq_hz},
              {"sat_gain_dbi", c.sat_gain_dbi},
              {"user_gain_dbi", c.user_gain_dbi},
              {"leo_altitude_m", c.leo_altitude_m},
              {"geo_altitude_m", c.geo_altitude_m},
              {"doppler_hz", c.doppler_hz},
              {"slot_interval_s", c.slot_interval_s},
              {"rician_factor", c.rician_factor},
              {"jakes_full_vector", c.jakes_full_vector}};
}

json to_json(const PpoConfig& c) {
  return json{{"algorithm", to_string(c.algorithm)},
              {"experts", c.experts},
              {"gate", c.gate == GateKind::softmax ? "softmax" : "logistic"},
              {"clip_start", c.clip_start},
              {"clip_end", c.clip_end},
              {"gamma", c.gamma},
              {"n_step", c.n_step},
              {"lr", c.lr},
              {"batch_size", c.batch_size},
              {"memory_size", c.memory_size},
              {"update_epochs", c.update_epochs},
              {"hidden", c.hidden},
              {"init_log_std", c.init_log_std},
              {"power_logit_offset", c.power_logit_offset},
              {"normalize_advantage", c.normalize_advantage}};
}

json to_json(const RunConfig& c) {
  return json{{"scenario", to_json(c.scenario)},
              {"ppo", to_json(c.ppo)},
              {"seed", c.seed},
              {"episodes", c.episodes},
              {"eval_episodes", c.eval_episodes},
              {"out_dir", c.out_dir},
              {"write_checkpoints", c.write_checkpoints}};
}

ScenarioConfig scenario_from_json(const json& j, const std::string& path) {
  static const std::set<std::string> known = {
      "scenario_kind", "protocol",       "channel_mode",   "objective",       "geo_precoder", "K",
      "M",             "N_T",            "N_M",            "p_max_leo_dbm",   "p_max_geo_dbm",
      "noise_ggu_dbm", "noise_lgu_dbm",  "noise_bandwidth_hz", "xi_ggu",      "xi_lgu",
      "mu",            "p_circuit_w",    "time_slots",     "carrier_freq_hz", "sat_gain_dbi",
      "user_gain_dbi", "leo_altitude_m", "geo_altitude_m", "doppler_hz",      "slot_interval_s",
      "rician_factor", "jakes_full_vector"};
  reject_unknown(j, path, known);
  ScenarioConfig c;
  read_enum(j, path, "scenario_kind", c.scenario_kind, parse_scenario_kind);
  read_enum(j, path, "protocol", c.protocol, parse_protocol);
  read_enum(j, path, "channel_mode", c.channel_mode, parse_channel_mode);
  read_enum(j, path, "objective", c.objective, parse_objective);
  read_enum(j, path, "geo_precoder", c.geo_precoder, parse_geo_precoder);
  read(j, path, "K", c.K);
  read(j, path, "M", c.M);
  if (c.scenario_kind == ScenarioKind::homogeneous && !j.contains("M")) c.M = 0;
  read(j, path, "N_T", c.N_T);
  read(j, path, "N_M", c.N_M);
  read(j, path, "p_max_leo_dbm", c.p_max_leo_dbm);
  read(j, path, "p_max_geo_dbm", c.p_max_geo_dbm);
  read(j, path, "noise_ggu_dbm", c.noise_ggu_dbm);
  read(j, path, "noise_lgu_dbm", c.noise_lgu_dbm);
  read(j, path, "noise_bandwidth_hz", c.noise_bandwidth_hz);
  read(j, path, "xi_ggu", c.xi_ggu);
  read(j, path, "xi_lgu", c.xi_lgu);
  read(j, path, "mu", c.mu);
  read(j, path, "p_circuit_w", c.p_circuit_w);
  read(j, path, "time_slots", c.time_slots);
  read(j, path, "carrier_freq_hz", c.carrier_freq_hz);
  read(j, path, "sat_gain_dbi", c.sat_gain_dbi);
  read(j, path, "user_gain_dbi", c.user_gain_dbi);
  read(j, path, "leo_altitude_m", c.leo_altitude_m);
  read(j, path, "geo_altitude_m", c.geo_altitude_m);
  read(j, path, "doppler_hz", c.doppler_hz);
  read(j, path, "slot_interval_s", c.slot_interval_s);
  read(j, path, "rician_factor", c.rician_factor);
  read(j, path, "jakes_full_vector", c.jakes_full_vector);
  return c;
}

PpoConfig ppo_from_json(const json& j, const std::string& path) {
  static const std::set<std::string> known = {
      "algorithm", "experts",     "gate",       "clip_start",    "clip_end",
      "gamma",     "n_step",      "lr",         "batch_size",    "memory_size",
      "update_epochs", "hidden",  "init_log_std", "power_logit_offset", "normalize_advantage"};
  reject_unknown(j, path, known);
  PpoConfig c;
  read_enum(j, path, "algorithm", c.algorithm, parse_algorithm);
  read(j, path, "experts", c.experts);
  if (c.algorithm == Algorithm::ppo && !j.contains("experts")) c.experts = 1;
  read_enum(j, path, "gate", c.gate, [](std::string_view s) {
    if (s == "softmax") return GateKind::softmax;
    if (s == "logistic") return GateKind::logistic;
    throw ConfigError("unknown gate '" + std::string(s) + "'");
  });
  read(j, path, "clip_start", c.clip_start);
  read(j, path, "clip_end", c.clip_end);
  read(j, path, "gamma", c.gamma);
  read(j, path, "n_step", c.n_step);
  read(j, path, "lr", c.lr);
  read(j, path, "batch_size", c.batch_size);
  read(j, path, "memory_size", c.memory_size);
  read(j, path, "update_epochs", c.update_epochs);
  read(j, path, "hidden", c.hidden);
  read(j, path, "init_log_std", c.init_log_std);
  read(j, path, "power_logit_offset", c.power_logit_offset);
  read(j, path, "normalize_advantage", c.normalize_advantage);
  return c;
}

RunConfig run_config_from_json(const json& j) {
  static const std::set<std::string> known = {"scenario", "ppo",      "seed",
                                              "episodes", "eval_episodes", "out_dir",
                                              "write_checkpoints"};
  reject_unknown(j, "$", known);
  RunConfig c;
  if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"), "scenario");
  if (j.contains("ppo")) c.ppo = ppo_from_json(j.at("ppo"), "ppo");
  read(j, "$", "seed", c.seed);
  read(j, "$", "episodes", c.episodes);
  read(j, "$", "eval_episodes", c.eval_episodes);
  read(j, "$", "out_dir", c.out_dir);
  read(j, "$", "write_checkpoints", c.write_checkpoints);
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file '" + file + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what(), file);
  }
  return run_config_from_json(j);
}

void save_json(const json& j, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write '" + file + "'");
  out << j.dump(2) << '\n';
}

}  // namespace satmoe
