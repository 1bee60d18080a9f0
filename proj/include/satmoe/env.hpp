// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "satmoe/beamforming.hpp"
#include "satmoe/channel.hpp"
#include "satmoe/network.hpp"

namespace satmoe::env {

using beamforming::RawAction;
using channel::ChannelState;

/// Observation fed to the policy. Entries are already normalized:
///   u            SINRs of the previous slot in dB, clipped to [-60, 60], / 60,
///                laid out [common_1..K, private_1..K, ggu_1..M]
///   prev_action  tanh of the previous raw action (2K+1)
///   prev_reward  previous reward divided by the running max |reward|
struct MdpState {
  std::vector<double> u;
  std::vector<double> prev_action;
  double prev_reward = 0.0;

  std::vector<double> features() const;
  bool operator==(const MdpState&) const = default;
};

/// Everything the closed-form reward oracle computes for one (action, channel).
struct Evaluation {
  network::BeamSolution solution;
  network::SinrReport sinr;
  network::RateReport rates;
  network::FeasibilityReport feasibility;
  double sum_rate = 0.0;
  double energy_efficiency = 0.0;
  double total_power = 0.0;
  double reward = 0.0;
};

/// Deterministic reward of `action` on `ch` under cfg.objective.
Evaluation evaluate_action(const RawAction& action, const ChannelState& ch, const ScenarioConfig& cfg);

/// Channel plus its beam directions, for evaluating many actions on one draw.
struct PreparedChannel {
  PreparedChannel(const ChannelState& ch, const ScenarioConfig& cfg);
  ChannelState ch;
  beamforming::BeamDirections dirs;
  std::vector<CVec> w_geo;
};
Evaluation evaluate_action(const RawAction& action, const PreparedChannel& pc, const ScenarioConfig& cfg);

/// Reward variants on an assembled solution. Each is the objective value
/// gated by the product of the feasibility flags.
double reward_sum_rate(const network::BeamSolution& sol, const ChannelState& ch, const ScenarioConfig& cfg);
double reward_ee(const network::BeamSolution& sol, const ChannelState& ch, const ScenarioConfig& cfg);
double reward_power_min(const network::BeamSolution& sol, const ChannelState& ch, const ScenarioConfig& cfg);

/// u vector of an evaluation, normalized as in MdpState.
std::vector<double> normalized_sinr_features(const network::SinrReport& s, const ScenarioConfig& cfg);

struct StepResult {
  MdpState next_state;
  double reward = 0.0;
  network::FeasibilityReport feasibility;
  Evaluation evaluation;
  bool done = false;
};

/// Episodic environment around the physics: cfg.time_slots steps per episode.
/// Single-threaded; separate instances are independent.
class SatelliteEnv {
 public:
  explicit SatelliteEnv(ScenarioConfig cfg);

  /// Draws fresh channels from `seed` and probes them with the all-zero
  /// action to fill u. prev_action and prev_reward start at zero.
  MdpState reset(std::uint64_t seed);

  /// Evaluates the action on the current channel, then advances the channel.
  /// Throws std::logic_error once the episode is exhausted or before reset.
  StepResult step(const RawAction& action);

  const ChannelState& channels() const { return process_.current(); }
  const ScenarioConfig& config() const { return cfg_; }
  const MdpState& state() const { return state_; }
  int slot() const { return slot_; }
  bool done() const { return slot_ >= cfg_.time_slots; }
  double reward_scale() const { return reward_scale_; }

 private:
  ScenarioConfig cfg_;
  channel::ChannelProcess process_;
  MdpState state_;
  int slot_ = 0;
  bool started_ = false;
  double reward_scale_ = 0.0;
};

}  // namespace satmoe::env
