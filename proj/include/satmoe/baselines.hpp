// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "satmoe/env.hpp"
#include "satmoe/trainer.hpp"

namespace satmoe::baselines {

/// Discretization searched by the greedy policy, in raw-action units.
struct GreedyGrid {
  std::vector<double> power_levels{-3.0, -1.5, 0.0, 1.5, 3.0};
  std::vector<double> rate_levels{-3.0, 0.0, 3.0};
};

/// Exhaustive search over the grid for the largest immediate reward on `ch`.
/// SDMA searches only the private powers (the other entries stay 0). Ties
/// keep the first grid point in odometer order.
beamforming::RawAction greedy_action(const channel::ChannelState& ch, const ScenarioConfig& cfg,
                                     const GreedyGrid& grid = {});

/// i.i.d. uniform raw action in [-bound, bound].
beamforming::RawAction random_action(int k, Rng& rng, double bound = 3.0);

enum class Kind { greedy, random };

/// Plays `episodes` episodes on the same channel traces the trainer uses for
/// `seed` and reports the usual per-episode rows.
std::vector<train::EpisodeMetrics> run_baseline(Kind kind, const ScenarioConfig& cfg, std::uint64_t seed,
                                                int episodes, const GreedyGrid& grid = {});

}  // namespace satmoe::baselines
