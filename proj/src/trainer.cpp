// SPDX-License-Identifier: Apache-2.0
#include "satmoe/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "satmoe/errors.hpp"

namespace satmoe::train {

std::string metrics_csv_header() {
  return "episode,mean_reward,sum_rate,ee,total_power,feasibility_rate,gate_entropy,kl,clip_fraction";
}

void write_metrics_csv_row(std::ostream& out, const EpisodeMetrics& m) {
  out << m.episode << std::setprecision(17) << ',' << m.mean_reward << ',' << m.sum_rate << ',' << m.ee << ','
      << m.total_power << ',' << m.feasibility_rate << ',' << m.gate_entropy << ',' << m.kl << ','
      << m.clip_fraction << '\n';
}

void write_metrics_csv(const std::string& file, const std::vector<EpisodeMetrics>& rows) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write '" + file + "'");
  out << metrics_csv_header() << '\n';
  for (const auto& r : rows) write_metrics_csv_row(out, r);
}

EpisodeMetrics tail_average(const std::vector<EpisodeMetrics>& rows) {
  EpisodeMetrics avg;
  if (rows.empty()) return avg;
  const std::size_t n = std::max<std::size_t>(1, rows.size() / 10);
  for (std::size_t i = rows.size() - n; i < rows.size(); ++i) {
    const auto& r = rows[i];
    avg.mean_reward += r.mean_reward;
    avg.sum_rate += r.sum_rate;
    avg.ee += r.ee;
    avg.total_power += r.total_power;
    avg.feasibility_rate += r.feasibility_rate;
    avg.gate_entropy += r.gate_entropy;
    avg.kl += r.kl;
    avg.clip_fraction += r.clip_fraction;
  }
  const auto d = static_cast<double>(n);
  avg.episode = rows.back().episode;
  avg.mean_reward /= d;
  avg.sum_rate /= d;
  avg.ee /= d;
  avg.total_power /= d;
  avg.feasibility_rate /= d;
  avg.gate_entropy /= d;
  avg.kl /= d;
  avg.clip_fraction /= d;
  return avg;
}

std::uint64_t episode_seed(std::uint64_t master, int e) {
  return derive_seed(master, "episode", static_cast<std::uint64_t>(e));
}

void EpisodeAccumulator::add(const env::Evaluation& ev, double gate_entropy) {
  ++slots_;
  reward_ += ev.reward;
  sum_rate_ += ev.sum_rate;
  ee_ += ev.energy_efficiency;
  power_ += ev.total_power;
  feasible_ += ev.feasibility.gate();
  entropy_ += gate_entropy;
}

EpisodeMetrics EpisodeAccumulator::finish(int episode, double kl, double clip_fraction) const {
  EpisodeMetrics m;
  m.episode = episode;
  m.kl = kl;
  m.clip_fraction = clip_fraction;
  if (slots_ == 0) return m;
  const auto n = static_cast<double>(slots_);
  m.mean_reward = reward_ / n;
  m.sum_rate = sum_rate_ / n;
  m.ee = ee_ / n;
  m.total_power = power_ / n;
  m.feasibility_rate = feasible_ / n;
  m.gate_entropy = entropy_ / n;
  return m;
}

namespace {

double entropy(const moe::Matrix& gate) {
  if (gate.size() == 0) return 0.0;
  double h = 0.0;
  for (Eigen::Index r = 0; r < gate.rows(); ++r) {
    const double w = gate(r, 0);
    if (w > 0.0) h -= w * std::log(w);
  }
  return h;
}

}  // namespace

Trainer::Trainer(RunConfig cfg) : cfg_(std::move(cfg)), ac_((cfg_.validate(), cfg_.scenario), cfg_.ppo, cfg_.seed) {}

int Trainer::planned_updates() const {
  const int slots = cfg_.scenario.time_slots;
  const int episodes_per_update = (cfg_.ppo.memory_size + slots - 1) / slots;
  return cfg_.episodes / episodes_per_update;
}

std::vector<EpisodeMetrics> Trainer::run(const std::function<void(const EpisodeMetrics&)>& on_episode) {
  const ScenarioConfig& sc = cfg_.scenario;
  env::SatelliteEnv env(sc);
  Rng policy_rng(cfg_.seed, "policy");
  Rng candidate_rng(cfg_.seed, "candidates");
  Rng minibatch_rng(cfg_.seed, "minibatch");
  const bool draw_candidates = ac_.has_gate() && ac_.expert_count() > 1;
  const auto& assign = ac_.assignments();
  const moe::Vector& offset = ac_.mean_offset();
  const int total_updates = planned_updates();
  const moe::RewardOracle oracle = [&sc](const std::vector<double>& a, const channel::ChannelState& ch) {
    return env::evaluate_action(beamforming::RawAction{a}, ch, sc).reward;
  };

  std::vector<EpisodeMetrics> rows;
  std::vector<moe::Transition> buffer;
  double last_kl = 0.0, last_clip = 0.0;
  for (int e = 0; e < cfg_.episodes; ++e) {
    env::MdpState state = env.reset(episode_seed(cfg_.seed, e));
    EpisodeAccumulator acc;
    while (!env.done()) {
      moe::Transition t;
      t.state = state.features();
      const moe::PolicyOutput out = ac_.act(t.state);
      t.mean.assign(out.mean.data(), out.mean.data() + out.mean.rows());
      t.log_std.assign(out.log_std.data(), out.log_std.data() + out.log_std.size());
      auto sample = moe::sample_action(t.mean, t.log_std, ac_.mask(), policy_rng);
      t.action = std::move(sample.action);
      t.log_prob = sample.log_prob;
      if (draw_candidates) {
        for (std::size_t i = 0; i < assign.size(); ++i) {
          std::vector<double> cand = t.action;
          for (std::size_t l = 0; l < assign[i].size(); ++l) {
            const auto d = static_cast<std::size_t>(assign[i][l]);
            cand[d] = offset(static_cast<Eigen::Index>(d)) + out.expert_out[i](static_cast<Eigen::Index>(l), 0) +
                      std::exp(t.log_std[d]) * candidate_rng.normal();
          }
          t.candidates.push_back(std::move(cand));
        }
      }
      t.channel = env.channels();
      const env::StepResult res = env.step(beamforming::RawAction{t.action});
      acc.add(res.evaluation, entropy(out.gate));
      t.reward = res.reward;
      t.done = res.done;
      state = res.next_state;
      t.next_state = state.features();
      buffer.push_back(std::move(t));
    }
    if (static_cast<int>(buffer.size()) >= cfg_.ppo.memory_size) {
      const int idx = static_cast<int>(update_stats_.size());
      const double eps = moe::clip_schedule(cfg_.ppo, idx, total_updates);
      const auto t0 = std::chrono::steady_clock::now();
      const moe::UpdateStats st = moe::ppo_update(ac_, buffer, cfg_.ppo, eps, oracle, minibatch_rng);
      const auto t1 = std::chrono::steady_clock::now();
      update_seconds_.push_back(std::chrono::duration<double>(t1 - t0).count());
      update_stats_.push_back(st);
      last_kl = st.kl;
      last_clip = st.clip_fraction;
      buffer.clear();
    }
    rows.push_back(acc.finish(e, last_kl, last_clip));
    if (on_episode) on_episode(rows.back());
  }
  return rows;
}

std::vector<EpisodeMetrics> evaluate_policy(const moe::ActorCritic& ac, const RunConfig& cfg, int episodes,
                                            std::uint64_t seed) {
  env::SatelliteEnv env(cfg.scenario);
  std::vector<EpisodeMetrics> rows;
  for (int e = 0; e < episodes; ++e) {
    env::MdpState state = env.reset(episode_seed(seed, e));
    EpisodeAccumulator acc;
    while (!env.done()) {
      const moe::PolicyOutput out = ac.act(state.features());
      std::vector<double> a(out.mean.data(), out.mean.data() + out.mean.rows());
      const env::StepResult res = env.step(beamforming::RawAction{a});
      acc.add(res.evaluation, entropy(out.gate));
      state = res.next_state;
    }
    rows.push_back(acc.finish(e, 0.0, 0.0));
  }
  return rows;
}

}  // namespace satmoe::train
