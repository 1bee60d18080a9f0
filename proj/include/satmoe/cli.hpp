// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "satmoe/config.hpp"
#include "satmoe/trainer.hpp"

namespace satmoe::cli {

enum class Method { moe_ppo, ppo, greedy, random };
std::string_view to_string(Method m);
Method parse_method(std::string_view s);

/// Seed of the held-out evaluation traces for a run seed. Every method
/// evaluated for the same seed sees the same channels.
std::uint64_t evaluation_seed(std::uint64_t seed);

/// Plain average of every field over the rows.
train::EpisodeMetrics mean_of(const std::vector<train::EpisodeMetrics>& rows);

struct MethodResult {
  Method method = Method::moe_ppo;
  train::EpisodeMetrics eval;        // mean over the evaluation episodes
  train::EpisodeMetrics train_tail;  // last 10% of training (learners only)
  double mean_update_seconds = 0.0;
  int updates = 0;
};

/// Trains the learner described by `cfg` (moe_ppo honours cfg.ppo.experts,
/// ppo forces one actor) or plays a baseline, then evaluates on
/// `eval_episodes` held-out episodes.
MethodResult run_method(Method m, const RunConfig& cfg, int eval_episodes);

/// Evaluates an already trained model.
MethodResult evaluate_trained(const moe::ActorCritic& ac, const RunConfig& cfg, int eval_episodes);

/// Outcome of a training run written to disk.
struct TrainOutcome {
  int episodes_completed = 0;
  bool aborted = false;
  std::string error;
};

/// Trains and writes config.json, metrics.csv, summary.json and checkpoints/
/// under cfg.out_dir. Numerical aborts leave partial artifacts behind.
TrainOutcome train_to_directory(const RunConfig& cfg, std::ostream& log);

/// Entry point of the satmoe tool. Returns the process exit status.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace satmoe::cli
