// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace satmoe {

enum class ScenarioKind { homogeneous, heterogeneous };
enum class Protocol { sdma, rsma };
enum class ChannelMode { fixed, time_varying };
enum class Objective { sum_rate, energy_efficiency, power_min };
enum class GeoPrecoder { mrt, zf };

std::string_view to_string(ScenarioKind v);
std::string_view to_string(Protocol v);
std::string_view to_string(ChannelMode v);
std::string_view to_string(Objective v);
std::string_view to_string(GeoPrecoder v);

ScenarioKind parse_scenario_kind(std::string_view s);
Protocol parse_protocol(std::string_view s);
ChannelMode parse_channel_mode(std::string_view s);
/// Accepts the canonical names plus the CLI aliases se / ee / power.
Objective parse_objective(std::string_view s);
GeoPrecoder parse_geo_precoder(std::string_view s);

/// Declarative description of one downlink scenario. Defaults reproduce the
/// heterogeneous LEO+GEO RSMA setting (one LEO, one GEO, two users each).
struct ScenarioConfig {
  ScenarioKind scenario_kind = ScenarioKind::heterogeneous;
  Protocol protocol = Protocol::rsma;
  ChannelMode channel_mode = ChannelMode::time_varying;
  Objective objective = Objective::sum_rate;
  // Fixed GEO beam rule; the GEO budget is split equally across the M beams.
  GeoPrecoder geo_precoder = GeoPrecoder::zf;

  int K = 2;    // LEO ground users
  int M = 2;    // GEO ground users (0 for homogeneous)
  int N_T = 8;  // LEO antennas
  int N_M = 8;  // GEO antennas

  double p_max_leo_dbm = 50.0;
  double p_max_geo_dbm = 50.0;
  // Noise densities in dBm/Hz, integrated over noise_bandwidth_hz.
  double noise_ggu_dbm = -104.0;
  double noise_lgu_dbm = -104.0;
  double noise_bandwidth_hz = 1.0;

  double xi_ggu = 1.0;  // b/s/Hz
  double xi_lgu = 0.1;  // b/s/Hz
  double mu = 1.0;
  double p_circuit_w = 1.0;
  int time_slots = 10;

  double carrier_freq_hz = 4e9;
  double sat_gain_dbi = 35.0;
  double user_gain_dbi = 0.0;
  double leo_altitude_m = 300e3;
  double geo_altitude_m = 4000e3;
  double doppler_hz = 10.0;
  double slot_interval_s = 2e-3;
  double rician_factor = 4.0;
  // Apply the Gauss-Markov recursion to the whole vector (LoS included)
  // instead of only the diffuse component.
  bool jakes_full_vector = false;

  int ggu_count() const { return scenario_kind == ScenarioKind::homogeneous ? 0 : M; }
  int action_dim() const { return 2 * K + 1; }
  int state_dim() const { return 4 * K + ggu_count() + 2; }

  double p_max_leo_w() const;
  double p_max_geo_w() const;
  double noise_ggu_w() const;
  double noise_lgu_w() const;
  /// rho = J0(2 pi f_d T_s)
  double jakes_rho() const;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

enum class Algorithm { moe_ppo, ppo };
std::string_view to_string(Algorithm v);
Algorithm parse_algorithm(std::string_view s);

enum class GateKind { softmax, logistic };

struct PpoConfig {
  Algorithm algorithm = Algorithm::moe_ppo;
  int experts = 3;
  GateKind gate = GateKind::softmax;
  double clip_start = 0.2;
  double clip_end = 0.02;
  double gamma = 0.0;
  int n_step = 4;
  double lr = 3e-4;
  int batch_size = 2048;
  int memory_size = 40960;
  int update_epochs = 10;
  int hidden = 256;
  double init_log_std = -0.5;
  // Fixed centre added to the power logits (raw indices 0..K) of the policy
  // mean, so an untrained policy starts from a low-interference operating point.
  double power_logit_offset = -2.0;
  bool normalize_advantage = true;

  void validate() const;
};

struct RunConfig {
  ScenarioConfig scenario;
  PpoConfig ppo;
  std::uint64_t seed = 1;
  int episodes = 500;
  int eval_episodes = 20;
  std::string out_dir = "runs/default";
  bool write_checkpoints = true;

  void validate() const;
};

/// Laptop-scale training preset: Table-style network/optimizer settings with
/// a rollout buffer and minibatch sized to a few thousand transitions.
PpoConfig desk_scale_ppo();

// JSON (structured text) round-trip. Parsing rejects unknown fields and
// reports the JSON path of the first offending entry.
nlohmann::json to_json(const ScenarioConfig& c);
nlohmann::json to_json(const PpoConfig& c);
nlohmann::json to_json(const RunConfig& c);
ScenarioConfig scenario_from_json(const nlohmann::json& j, const std::string& path = "scenario");
PpoConfig ppo_from_json(const nlohmann::json& j, const std::string& path = "ppo");
RunConfig run_config_from_json(const nlohmann::json& j);

RunConfig load_run_config(const std::string& file);
void save_json(const nlohmann::json& j, const std::string& file);

}  // namespace satmoe
