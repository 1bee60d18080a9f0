// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "satmoe/channel.hpp"
#include "satmoe/config.hpp"
#include "satmoe/neural.hpp"
#include "satmoe/rng.hpp"

namespace satmoe::moe {

using nn::Matrix;
using nn::Vector;

/// Raw-action indices owned by each expert for I experts and K LGUs.
///   I=1      everything
///   I=2      beam powers [0, K] | common rates
///   I=3      private powers | common power | common rates
///   I=2K+1   one index each
/// Any other I throws ConfigError.
std::vector<std::vector<int>> expert_assignments(int experts, int k);

/// Dimensions that influence the reward: all of them for RSMA, only the
/// private powers for SDMA. Inactive dimensions are excluded from densities.
std::vector<char> active_mask(const ScenarioConfig& cfg);

/// A = r + gamma * V_old(s') - V_old(s).
double advantage(double reward, double value_next, double value, double gamma);

/// min(rho * A, clip(rho, 1 - eps, 1 + eps) * A).
double clipped_objective(double ratio, double adv, double eps);

/// Diagonal Gaussian log-density over the dimensions where mask != 0.
double gaussian_log_prob(std::span<const double> x, std::span<const double> mean,
                         std::span<const double> log_std, std::span<const char> mask);

struct Sample {
  std::vector<double> action;
  double log_prob = 0.0;
};

/// Draws one value per dimension (inactive ones included, so the RNG stream
/// does not depend on the protocol) and scores it on the active ones.
Sample sample_action(std::span<const double> mean, std::span<const double> log_std,
                     std::span<const char> mask, Rng& rng);

/// KL(old || new) between diagonal Gaussians over the active dimensions.
double gaussian_kl(std::span<const double> mean_old, std::span<const double> log_std_old,
                   std::span<const double> mean_new, std::span<const double> log_std_new,
                   std::span<const char> mask);

/// Softmax over each column.
Matrix softmax_columns(const Matrix& logits);

struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  std::vector<double> mean;     // behaviour-policy mean
  std::vector<double> log_std;  // behaviour-policy log std
  double log_prob = 0.0;
  double reward = 0.0;
  bool done = false;
  std::vector<double> next_state;
  // Channel the action was applied to, for counterfactual scoring.
  channel::ChannelState channel;
  // One full candidate action per expert (empty when I = 1 or plain PPO).
  std::vector<std::vector<double>> candidates;
};

/// Policy output on a batch of states (one column per sample).
struct PolicyOutput {
  Matrix mean;     // action_dim x B
  Vector log_std;  // action_dim
  Matrix gate;     // I x B (empty for plain PPO)
  std::vector<Matrix> expert_out;  // per expert: slice x B
};

/// Gradients of every actor parameter group.
struct ActorGradients {
  std::vector<nn::Gradients> experts;
  std::vector<Vector> log_std;
  std::optional<nn::Gradients> gate;
};

struct ActorLoss {
  double loss = 0.0;
  double clip_fraction = 0.0;
  ActorGradients grads;
};

struct UpdateStats {
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double kl = 0.0;
  double clip_fraction = 0.0;
  double clip_eps = 0.0;
  int bp_max_steps = 0;
  int bp_max_skipped = 0;
};

/// Closed-form reward of a raw action on a stored channel.
using RewardOracle = std::function<double(const std::vector<double>& action, const channel::ChannelState& ch)>;

/// Actor (experts + optional gate) and critic with their optimizers.
/// Algorithm::ppo builds a single actor network with no gate; the mixture
/// path with I = 1 computes exactly the same numbers.
class ActorCritic {
 public:
  ActorCritic(const ScenarioConfig& scenario, const PpoConfig& ppo, std::uint64_t seed);

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  int expert_count() const { return static_cast<int>(experts_.size()); }
  bool has_gate() const { return gate_.has_value(); }
  const std::vector<std::vector<int>>& assignments() const { return assign_; }
  const std::vector<char>& mask() const { return mask_; }
  const Vector& mean_offset() const { return offset_; }

  PolicyOutput forward(const Matrix& states) const;
  double value(std::span<const double> state) const;
  Vector values(const Matrix& states) const;

  /// Mean action, gate weights and per-expert candidate means for one state.
  PolicyOutput act(std::span<const double> state) const;

  /// Negative mean clipped surrogate over the batch and its gradients.
  ActorLoss actor_loss(const Matrix& states, const Matrix& actions, const Vector& old_log_prob,
                       const Vector& adv, double eps) const;
  /// Mean squared error to the targets and its gradients.
  std::pair<double, nn::Gradients> critic_loss(const Matrix& states, const Vector& targets) const;
  /// Mean -log w_{winner}(s) over the batch and its gate gradients.
  std::pair<double, nn::Gradients> gate_bp_loss(const Matrix& states, const std::vector<int>& winners) const;

  void apply_actor(const ActorGradients& g);
  void apply_critic(const nn::Gradients& g);
  void apply_gate_bp(const nn::Gradients& g);

  std::vector<nn::Mlp>& experts() { return experts_; }
  std::vector<Vector>& log_std() { return log_std_; }
  std::optional<nn::Mlp>& gate() { return gate_; }
  nn::Mlp& critic() { return critic_; }
  const std::vector<nn::Mlp>& experts() const { return experts_; }
  const std::optional<nn::Mlp>& gate() const { return gate_; }
  const nn::Mlp& critic() const { return critic_; }

  nlohmann::json to_json() const;
  void load_json(const nlohmann::json& j);

 private:
  Vector combined_log_std() const;

  PpoConfig ppo_;
  GateKind gate_kind_;
  int k_;
  int state_dim_;
  int action_dim_;
  std::vector<std::vector<int>> assign_;
  std::vector<int> owner_;  // dimension -> expert
  std::vector<int> local_;  // dimension -> index inside the owner's slice
  std::vector<char> mask_;
  Vector offset_;  // fixed centre of the raw action mean

  std::vector<nn::Mlp> experts_;
  std::vector<Vector> log_std_;
  std::optional<nn::Mlp> gate_;
  nn::Mlp critic_;

  std::vector<nn::Adam> expert_opt_;
  std::vector<nn::Adam> log_std_opt_;
  nn::Adam gate_opt_;
  nn::Adam gate_bp_opt_;
  nn::Adam critic_opt_;
};

/// Index of the candidate with the largest reward. Ties go to the lowest index.
/// V_old(s) is common to every candidate, so the advantage argmax equals the
/// reward argmax.
int best_candidate(const std::vector<double>& rewards);

/// One PPO update over a frozen buffer of whole episodes. The first half of
/// the epochs runs the clipped surrogate and critic regression; the second
/// half also interleaves a gate step toward the counterfactual best expert.
/// Throws NumericalError (parameters untouched for the failing step) when a
/// loss or gradient turns non-finite.
UpdateStats ppo_update(ActorCritic& ac, const std::vector<Transition>& buffer, const PpoConfig& cfg,
                       double eps, const RewardOracle& oracle, Rng& rng);

/// Critic targets: n-step discounted returns bootstrapped from V_old, cut at
/// episode ends. Equal to the rewards when gamma = 0.
std::vector<double> value_targets(const std::vector<Transition>& buffer, const std::vector<double>& v_old,
                                  const std::vector<double>& v_next, double gamma, int n_step);

/// Linear clip schedule from start to end over `total` updates.
double clip_schedule(const PpoConfig& cfg, int update_index, int total_updates);

}  // namespace satmoe::moe
