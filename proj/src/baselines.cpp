// SPDX-License-Identifier: Apache-2.0
#include "satmoe/baselines.hpp"

namespace satmoe::baselines {

beamforming::RawAction greedy_action(const channel::ChannelState& ch, const ScenarioConfig& cfg,
                                     const GreedyGrid& grid) {
  const int k = cfg.K;
  const env::PreparedChannel pc(ch, cfg);
  // Searched dimensions and the level list each one walks through.
  std::vector<int> dims;
  std::vector<const std::vector<double>*> levels;
  const int powers = cfg.protocol == Protocol::rsma ? k + 1 : k;
  for (int d = 0; d < powers; ++d) {
    dims.push_back(d);
    levels.push_back(&grid.power_levels);
  }
  if (cfg.protocol == Protocol::rsma)
    for (int d = k + 1; d < 2 * k + 1; ++d) {
      dims.push_back(d);
      levels.push_back(&grid.rate_levels);
    }
  for (const auto* l : levels)
    if (l->empty()) return beamforming::RawAction::zeros(k);

  std::vector<std::size_t> idx(dims.size(), 0);
  beamforming::RawAction cur = beamforming::RawAction::zeros(k);
  beamforming::RawAction best = cur;
  double best_reward = -1.0;
  while (true) {
    for (std::size_t j = 0; j < dims.size(); ++j) cur.values[static_cast<std::size_t>(dims[j])] = (*levels[j])[idx[j]];
    const double r = env::evaluate_action(cur, pc, cfg).reward;
    if (r > best_reward) {
      best_reward = r;
      best = cur;
    }
    std::size_t j = 0;
    while (j < dims.size() && ++idx[j] == levels[j]->size()) idx[j++] = 0;
    if (j == dims.size()) break;
  }
  return best;
}

beamforming::RawAction random_action(int k, Rng& rng, double bound) {
  beamforming::RawAction a = beamforming::RawAction::zeros(k);
  for (auto& v : a.values) v = rng.uniform(-bound, bound);
  return a;
}

std::vector<train::EpisodeMetrics> run_baseline(Kind kind, const ScenarioConfig& cfg, std::uint64_t seed,
                                                int episodes, const GreedyGrid& grid) {
  env::SatelliteEnv env(cfg);
  Rng rng(seed, "random");
  std::vector<train::EpisodeMetrics> rows;
  for (int e = 0; e < episodes; ++e) {
    env.reset(train::episode_seed(seed, e));
    train::EpisodeAccumulator acc;
    while (!env.done()) {
      const auto a = kind == Kind::greedy ? greedy_action(env.channels(), cfg, grid) : random_action(cfg.K, rng);
      const auto res = env.step(a);
      acc.add(res.evaluation, 0.0);
    }
    rows.push_back(acc.finish(e, 0.0, 0.0));
  }
  return rows;
}

}  // namespace satmoe::baselines
