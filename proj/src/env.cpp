// SPDX-License-Identifier: Apache-2.0
#include "satmoe/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "satmoe/errors.hpp"

namespace satmoe::env {

namespace {

constexpr double kSinrClipDb = 60.0;

double normalized_db(double sinr) {
  const double db = sinr > 0.0 ? 10.0 * std::log10(sinr) : -kSinrClipDb;
  return std::clamp(db, -kSinrClipDb, kSinrClipDb) / kSinrClipDb;
}

}  // namespace

std::vector<double> MdpState::features() const {
  std::vector<double> f;
  f.reserve(u.size() + prev_action.size() + 1);
  f.insert(f.end(), u.begin(), u.end());
  f.insert(f.end(), prev_action.begin(), prev_action.end());
  f.push_back(prev_reward);
  return f;
}

std::vector<double> normalized_sinr_features(const network::SinrReport& s, const ScenarioConfig& cfg) {
  const auto k = static_cast<std::size_t>(cfg.K);
  std::vector<double> u(2 * k + static_cast<std::size_t>(cfg.ggu_count()), 0.0);
  for (std::size_t i = 0; i < s.lgu_common.size(); ++i) u[i] = normalized_db(s.lgu_common[i]);
  for (std::size_t i = 0; i < s.lgu_private.size(); ++i) u[k + i] = normalized_db(s.lgu_private[i]);
  for (std::size_t i = 0; i < s.ggu.size(); ++i) u[2 * k + i] = normalized_db(s.ggu[i]);
  return u;
}

double reward_sum_rate(const network::BeamSolution& sol, const ChannelState& ch, const ScenarioConfig& cfg) {
  const auto r = network::rates(network::sinr(ch, sol, cfg));
  return network::sum_rate_leo(sol, r) * network::check_constraints(sol, r, cfg).gate();
}

double reward_ee(const network::BeamSolution& sol, const ChannelState& ch, const ScenarioConfig& cfg) {
  const auto r = network::rates(network::sinr(ch, sol, cfg));
  return network::energy_efficiency(sol, r, cfg) * network::check_constraints(sol, r, cfg).gate();
}

double reward_power_min(const network::BeamSolution& sol, const ChannelState& ch, const ScenarioConfig& cfg) {
  const auto r = network::rates(network::sinr(ch, sol, cfg));
  return network::check_constraints(sol, r, cfg).gate() / network::total_power(sol, cfg);
}

Evaluation evaluate_action(const RawAction& action, const ChannelState& ch, const ScenarioConfig& cfg) {
  return evaluate_action(action, PreparedChannel(ch, cfg), cfg);
}

PreparedChannel::PreparedChannel(const ChannelState& c, const ScenarioConfig& cfg)
    : ch(c), dirs(beamforming::beam_directions(c)), w_geo(network::geo_beams(c, cfg)) {}

Evaluation evaluate_action(const RawAction& action, const PreparedChannel& pc, const ScenarioConfig& cfg) {
  const ChannelState& ch = pc.ch;
  Evaluation e;
  e.solution = beamforming::assemble_solution(action, ch, cfg, pc.dirs, pc.w_geo);
  e.sinr = network::sinr(ch, e.solution, cfg);
  e.rates = network::rates(e.sinr);
  e.feasibility = network::check_constraints(e.solution, e.rates, cfg);
  e.sum_rate = network::sum_rate_leo(e.solution, e.rates);
  e.total_power = network::total_power(e.solution, cfg);
  e.energy_efficiency = e.sum_rate / e.total_power;
  const double gate = e.feasibility.gate();
  switch (cfg.objective) {
    case Objective::sum_rate: e.reward = e.sum_rate * gate; break;
    case Objective::energy_efficiency: e.reward = e.energy_efficiency * gate; break;
    case Objective::power_min: e.reward = gate / e.total_power; break;
  }
  return e;
}

SatelliteEnv::SatelliteEnv(ScenarioConfig cfg) : cfg_(std::move(cfg)), process_(cfg_) {}

MdpState SatelliteEnv::reset(std::uint64_t seed) {
  process_.reset(seed);
  slot_ = 0;
  started_ = true;
  const auto probe = evaluate_action(RawAction::zeros(cfg_.K), process_.current(), cfg_);
  state_.u = normalized_sinr_features(probe.sinr, cfg_);
  state_.prev_action.assign(static_cast<std::size_t>(cfg_.action_dim()), 0.0);
  state_.prev_reward = 0.0;
  return state_;
}

StepResult SatelliteEnv::step(const RawAction& action) {
  if (!started_) throw std::logic_error("SatelliteEnv::step called before reset");
  if (done()) throw std::logic_error("SatelliteEnv::step called on an exhausted episode");
  if (action.values.size() != static_cast<std::size_t>(cfg_.action_dim()))
    throw DimensionError("SatelliteEnv::step: action must have 2K+1 entries");

  StepResult res;
  try {
    res.evaluation = evaluate_action(action, process_.current(), cfg_);
  } catch (const SingularMatrixError&) {
    slot_ = cfg_.time_slots;  // abort the episode
    throw;
  }
  res.reward = res.evaluation.reward;
  res.feasibility = res.evaluation.feasibility;
  if (!std::isfinite(res.reward)) {
    slot_ = cfg_.time_slots;
    throw NumericalError("SatelliteEnv::step: non-finite reward");
  }
  reward_scale_ = std::max(reward_scale_, std::abs(res.reward));

  ++slot_;
  if (!done()) process_.advance();

  state_.u = normalized_sinr_features(res.evaluation.sinr, cfg_);
  state_.prev_action.resize(action.values.size());
  for (std::size_t i = 0; i < action.values.size(); ++i) state_.prev_action[i] = std::tanh(action.values[i]);
  state_.prev_reward = reward_scale_ > 0.0 ? res.reward / reward_scale_ : 0.0;
  res.next_state = state_;
  res.done = done();
  return res;
}

}  // namespace satmoe::env
