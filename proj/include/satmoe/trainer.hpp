// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "satmoe/config.hpp"
#include "satmoe/env.hpp"
#include "satmoe/moeppo.hpp"

namespace satmoe::train {

/// One row of the per-episode metrics CSV. Rates and powers are slot means.
struct EpisodeMetrics {
  int episode = 0;
  double mean_reward = 0.0;
  double sum_rate = 0.0;
  double ee = 0.0;
  double total_power = 0.0;
  double feasibility_rate = 0.0;
  double gate_entropy = 0.0;
  double kl = 0.0;
  double clip_fraction = 0.0;
};

std::string metrics_csv_header();
void write_metrics_csv_row(std::ostream& out, const EpisodeMetrics& m);
void write_metrics_csv(const std::string& file, const std::vector<EpisodeMetrics>& rows);

/// Averages over the last 10% of episodes (at least one).
EpisodeMetrics tail_average(const std::vector<EpisodeMetrics>& rows);

/// Seed of the channel draw for episode `e`. Shared by every policy so that
/// learners and baselines see identical channel traces.
std::uint64_t episode_seed(std::uint64_t master, int e);

/// Accumulates slot-level outcomes into an EpisodeMetrics row.
class EpisodeAccumulator {
 public:
  void add(const env::Evaluation& ev, double gate_entropy);
  EpisodeMetrics finish(int episode, double kl, double clip_fraction) const;

 private:
  int slots_ = 0;
  double reward_ = 0.0, sum_rate_ = 0.0, ee_ = 0.0, power_ = 0.0, feasible_ = 0.0, entropy_ = 0.0;
};

/// Runs MoE-PPO (or plain PPO) training end to end on one scenario.
/// Single-threaded and deterministic for a given RunConfig.
class Trainer {
 public:
  explicit Trainer(RunConfig cfg);

  /// Trains for cfg.episodes episodes. The callback sees every finished row.
  std::vector<EpisodeMetrics> run(const std::function<void(const EpisodeMetrics&)>& on_episode = {});

  const RunConfig& config() const { return cfg_; }
  moe::ActorCritic& model() { return ac_; }
  const moe::ActorCritic& model() const { return ac_; }
  const std::vector<double>& update_seconds() const { return update_seconds_; }
  const std::vector<moe::UpdateStats>& update_stats() const { return update_stats_; }
  /// Number of PPO updates a full run performs.
  int planned_updates() const;

 private:
  RunConfig cfg_;
  moe::ActorCritic ac_;
  std::vector<double> update_seconds_;
  std::vector<moe::UpdateStats> update_stats_;
};

/// Mean reward etc. of the deterministic (mean-action) policy on fresh episodes.
std::vector<EpisodeMetrics> evaluate_policy(const moe::ActorCritic& ac, const RunConfig& cfg, int episodes,
                                            std::uint64_t seed);

}  // namespace satmoe::train
