// SPDX-License-Identifier: Apache-2.0
#include "satmoe/moeppo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "satmoe/errors.hpp"

namespace satmoe::moe {

using nlohmann::json;

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 ln(2 pi)

Matrix to_matrix(const std::vector<const std::vector<double>*>& cols, int rows) {
  Matrix m(rows, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (static_cast<int>(cols[c]->size()) != rows) throw DimensionError("batch entry has the wrong length");
    for (int r = 0; r < rows; ++r) m(r, static_cast<Eigen::Index>(c)) = (*cols[c])[static_cast<std::size_t>(r)];
  }
  return m;
}

std::vector<Eigen::Map<Matrix>> vector_view(Vector& v) {
  std::vector<Eigen::Map<Matrix>> out;
  out.emplace_back(v.data(), v.size(), 1);
  return out;
}

}  // namespace

std::vector<std::vector<int>> expert_assignments(int experts, int k) {
  if (k < 1) throw ConfigError("must be >= 1", "scenario.K");
  const int dim = 2 * k + 1;
  auto range = [](int lo, int hi) {
    std::vector<int> r(static_cast<std::size_t>(hi - lo));
    std::iota(r.begin(), r.end(), lo);
    return r;
  };
  if (experts == 1) return {range(0, dim)};
  if (experts == 2) return {range(0, k + 1), range(k + 1, dim)};
  if (experts == 3) return {range(0, k), range(k, k + 1), range(k + 1, dim)};
  if (experts == dim) {
    std::vector<std::vector<int>> out;
    for (int d = 0; d < dim; ++d) out.push_back({d});
    return out;
  }
  throw ConfigError("supported expert counts are 1, 2, 3 and 2K+1 (=" + std::to_string(dim) + ")",
                    "ppo.experts");
}

std::vector<char> active_mask(const ScenarioConfig& cfg) {
  std::vector<char> m(static_cast<std::size_t>(cfg.action_dim()), 1);
  if (cfg.protocol == Protocol::sdma)
    for (std::size_t d = static_cast<std::size_t>(cfg.K); d < m.size(); ++d) m[d] = 0;
  return m;
}

double advantage(double reward, double value_next, double value, double gamma) {
  return reward + gamma * value_next - value;
}

double clipped_objective(double ratio, double adv, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * adv, clipped * adv);
}

double gaussian_log_prob(std::span<const double> x, std::span<const double> mean,
                         std::span<const double> log_std, std::span<const char> mask) {
  if (x.size() != mean.size() || x.size() != log_std.size() || x.size() != mask.size())
    throw DimensionError("gaussian_log_prob: length mismatch");
  double lp = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    if (!mask[d]) continue;
    const double z = (x[d] - mean[d]) / std::exp(log_std[d]);
    lp += -0.5 * z * z - log_std[d] - kHalfLog2Pi;
  }
  return lp;
}

Sample sample_action(std::span<const double> mean, std::span<const double> log_std,
                     std::span<const char> mask, Rng& rng) {
  if (mean.size() != log_std.size()) throw DimensionError("sample_action: length mismatch");
  Sample s;
  s.action.resize(mean.size());
  for (std::size_t d = 0; d < mean.size(); ++d) s.action[d] = mean[d] + std::exp(log_std[d]) * rng.normal();
  s.log_prob = gaussian_log_prob(s.action, mean, log_std, mask);
  return s;
}

double gaussian_kl(std::span<const double> mean_old, std::span<const double> log_std_old,
                   std::span<const double> mean_new, std::span<const double> log_std_new,
                   std::span<const char> mask) {
  double kl = 0.0;
  for (std::size_t d = 0; d < mean_old.size(); ++d) {
    if (!mask[d]) continue;
    const double var_old = std::exp(2.0 * log_std_old[d]);
    const double var_new = std::exp(2.0 * log_std_new[d]);
    const double diff = mean_old[d] - mean_new[d];
    kl += log_std_new[d] - log_std_old[d] + (var_old + diff * diff) / (2.0 * var_new) - 0.5;
  }
  return kl;
}

Matrix softmax_columns(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double mx = logits.col(c).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      out(r, c) = std::exp(logits(r, c) - mx);
      sum += out(r, c);
    }
    out.col(c) /= sum;
  }
  return out;
}

// ---------------------------------------------------------------------------

ActorCritic::ActorCritic(const ScenarioConfig& scenario, const PpoConfig& ppo, std::uint64_t seed)
    : ppo_(ppo),
      gate_kind_(ppo.gate),
      k_(scenario.K),
      state_dim_(scenario.state_dim()),
      action_dim_(scenario.action_dim()),
      mask_(active_mask(scenario)) {
  ppo.validate();
  const int experts = ppo.algorithm == Algorithm::ppo ? 1 : ppo.experts;
  assign_ = expert_assignments(experts, k_);
  offset_ = Vector::Zero(action_dim_);
  offset_.head(k_ + 1).setConstant(ppo.power_logit_offset);
  owner_.assign(static_cast<std::size_t>(action_dim_), -1);
  local_.assign(static_cast<std::size_t>(action_dim_), -1);
  for (std::size_t i = 0; i < assign_.size(); ++i)
    for (std::size_t l = 0; l < assign_[i].size(); ++l) {
      owner_[static_cast<std::size_t>(assign_[i][l])] = static_cast<int>(i);
      local_[static_cast<std::size_t>(assign_[i][l])] = static_cast<int>(l);
    }

  const nn::AdamConfig adam{ppo.lr};
  for (std::size_t i = 0; i < assign_.size(); ++i) {
    Rng rng(seed, "expert", i);
    const int out = static_cast<int>(assign_[i].size());
    experts_.emplace_back(std::vector<int>{state_dim_, ppo.hidden, ppo.hidden, out}, nn::Activation::identity,
                          0.01, rng);
    log_std_.push_back(Vector::Constant(out, ppo.init_log_std));
    expert_opt_.emplace_back(adam);
    log_std_opt_.emplace_back(adam);
  }
  if (ppo.algorithm == Algorithm::moe_ppo) {
    Rng rng(seed, "gate");
    gate_.emplace(std::vector<int>{state_dim_, ppo.hidden, ppo.hidden, experts}, nn::Activation::identity, 0.01,
                  rng);
  }
  Rng crng(seed, "critic");
  critic_ = nn::Mlp({state_dim_, ppo.hidden, ppo.hidden, 1}, nn::Activation::identity, 1.0, crng);
  gate_opt_ = nn::Adam(adam);
  gate_bp_opt_ = nn::Adam(adam);
  critic_opt_ = nn::Adam(adam);
}

Vector ActorCritic::combined_log_std() const {
  Vector ls(action_dim_);
  for (int d = 0; d < action_dim_; ++d) ls(d) = log_std_[static_cast<std::size_t>(owner_[d])](local_[d]);
  return ls;
}

PolicyOutput ActorCritic::forward(const Matrix& states) const {
  PolicyOutput out;
  const Eigen::Index b = states.cols();
  for (const auto& e : experts_) out.expert_out.push_back(e.forward(states));
  out.log_std = combined_log_std();
  out.mean.resize(action_dim_, b);
  if (!gate_) {
    out.mean = out.expert_out.front();
    out.mean.colwise() += offset_;
    return out;
  }
  const Matrix logits = gate_->forward(states);
  out.gate = gate_kind_ == GateKind::softmax ? softmax_columns(logits)
                                             : Matrix((1.0 + (-logits.array()).exp()).inverse());
  for (int d = 0; d < action_dim_; ++d) {
    const auto i = static_cast<std::size_t>(owner_[d]);
    out.mean.row(d) = out.gate.row(static_cast<Eigen::Index>(i)).cwiseProduct(out.expert_out[i].row(local_[d]));
  }
  out.mean.colwise() += offset_;
  return out;
}

PolicyOutput ActorCritic::act(std::span<const double> state) const {
  Matrix s(state_dim_, 1);
  if (static_cast<int>(state.size()) != state_dim_) throw DimensionError("act: state has the wrong length");
  for (int r = 0; r < state_dim_; ++r) s(r, 0) = state[static_cast<std::size_t>(r)];
  return forward(s);
}

double ActorCritic::value(std::span<const double> state) const {
  Vector s(state_dim_);
  if (static_cast<int>(state.size()) != state_dim_) throw DimensionError("value: state has the wrong length");
  for (int r = 0; r < state_dim_; ++r) s(r) = state[static_cast<std::size_t>(r)];
  return critic_.forward(s)(0);
}

Vector ActorCritic::values(const Matrix& states) const { return critic_.forward(states).row(0).transpose(); }

ActorLoss ActorCritic::actor_loss(const Matrix& states, const Matrix& actions, const Vector& old_log_prob,
                                  const Vector& adv, double eps) const {
  const Eigen::Index b = states.cols();
  if (actions.rows() != action_dim_ || actions.cols() != b || old_log_prob.size() != b || adv.size() != b)
    throw DimensionError("actor_loss: batch shape mismatch");

  std::vector<nn::ForwardCache> ecache(experts_.size());
  std::vector<Matrix> eout;
  for (std::size_t i = 0; i < experts_.size(); ++i) eout.push_back(experts_[i].forward(states, &ecache[i]));
  nn::ForwardCache gcache;
  Matrix w;
  if (gate_) {
    const Matrix logits = gate_->forward(states, &gcache);
    w = gate_kind_ == GateKind::softmax ? softmax_columns(logits)
                                        : Matrix((1.0 + (-logits.array()).exp()).inverse());
  }
  const Vector ls = combined_log_std();

  Matrix mean(action_dim_, b);
  for (int d = 0; d < action_dim_; ++d) {
    const auto i = static_cast<std::size_t>(owner_[d]);
    if (gate_)
      mean.row(d) = w.row(static_cast<Eigen::Index>(i)).cwiseProduct(eout[i].row(local_[d]));
    else
      mean.row(d) = eout[i].row(local_[d]);
  }
  mean.colwise() += offset_;

  ActorLoss res;
  Matrix g_mean = Matrix::Zero(action_dim_, b);
  Vector g_ls = Vector::Zero(action_dim_);
  int clipped = 0;
  for (Eigen::Index c = 0; c < b; ++c) {
    double lp = 0.0;
    for (int d = 0; d < action_dim_; ++d) {
      if (!mask_[static_cast<std::size_t>(d)]) continue;
      const double z = (actions(d, c) - mean(d, c)) / std::exp(ls(d));
      lp += -0.5 * z * z - ls(d) - kHalfLog2Pi;
    }
    const double ratio = std::exp(lp - old_log_prob(c));
    const double a = adv(c);
    const double obj = clipped_objective(ratio, a, eps);
    res.loss -= obj / static_cast<double>(b);
    if (std::abs(ratio - 1.0) > eps) ++clipped;
    // d obj / d lp is ratio * A on the unclipped branch, zero on the clipped one.
    const double unclipped = ratio * a;
    if (!(unclipped <= std::clamp(ratio, 1.0 - eps, 1.0 + eps) * a)) continue;
    const double g_lp = -unclipped / static_cast<double>(b);
    for (int d = 0; d < action_dim_; ++d) {
      if (!mask_[static_cast<std::size_t>(d)]) continue;
      const double sd = std::exp(ls(d));
      const double z = (actions(d, c) - mean(d, c)) / sd;
      g_mean(d, c) += g_lp * z / sd;
      g_ls(d) += g_lp * (z * z - 1.0);
    }
  }
  res.clip_fraction = b > 0 ? static_cast<double>(clipped) / static_cast<double>(b) : 0.0;
  if (!std::isfinite(res.loss)) throw NumericalError("actor loss is not finite");

  Matrix g_w;
  if (gate_) g_w = Matrix::Zero(w.rows(), b);
  for (std::size_t i = 0; i < experts_.size(); ++i) {
    Matrix g_e(static_cast<Eigen::Index>(assign_[i].size()), b);
    for (std::size_t l = 0; l < assign_[i].size(); ++l) {
      const int d = assign_[i][l];
      const auto li = static_cast<Eigen::Index>(l);
      if (gate_) {
        const auto ii = static_cast<Eigen::Index>(i);
        g_e.row(li) = g_mean.row(d).cwiseProduct(w.row(ii));
        g_w.row(ii) += g_mean.row(d).cwiseProduct(eout[i].row(li));
      } else {
        g_e.row(li) = g_mean.row(d);
      }
    }
    res.grads.experts.push_back(experts_[i].backward(ecache[i], g_e));
    Vector gl(static_cast<Eigen::Index>(assign_[i].size()));
    for (std::size_t l = 0; l < assign_[i].size(); ++l) gl(static_cast<Eigen::Index>(l)) = g_ls(assign_[i][l]);
    res.grads.log_std.push_back(std::move(gl));
  }
  if (gate_) {
    Matrix g_logits(w.rows(), b);
    if (gate_kind_ == GateKind::softmax) {
      for (Eigen::Index c = 0; c < b; ++c) {
        const double dot = w.col(c).dot(g_w.col(c));
        g_logits.col(c) = w.col(c).cwiseProduct(g_w.col(c) - Vector::Constant(w.rows(), dot));
      }
    } else {
      g_logits = g_w.cwiseProduct(w.cwiseProduct((1.0 - w.array()).matrix()));
    }
    res.grads.gate = gate_->backward(gcache, g_logits);
  }
  return res;
}

std::pair<double, nn::Gradients> ActorCritic::critic_loss(const Matrix& states, const Vector& targets) const {
  if (targets.size() != states.cols()) throw DimensionError("critic_loss: batch shape mismatch");
  nn::ForwardCache cache;
  const Matrix v = critic_.forward(states, &cache);
  const auto b = static_cast<double>(states.cols());
  const Matrix diff = v - targets.transpose();
  const double loss = diff.squaredNorm() / b;
  if (!std::isfinite(loss)) throw NumericalError("critic loss is not finite");
  return {loss, critic_.backward(cache, 2.0 * diff / b)};
}

std::pair<double, nn::Gradients> ActorCritic::gate_bp_loss(const Matrix& states,
                                                           const std::vector<int>& winners) const {
  if (!gate_) throw std::logic_error("gate_bp_loss: no gate network");
  if (static_cast<Eigen::Index>(winners.size()) != states.cols())
    throw DimensionError("gate_bp_loss: batch shape mismatch");
  nn::ForwardCache cache;
  const Matrix logits = gate_->forward(states, &cache);
  const Matrix w = gate_kind_ == GateKind::softmax ? softmax_columns(logits)
                                                   : Matrix((1.0 + (-logits.array()).exp()).inverse());
  const auto b = static_cast<double>(states.cols());
  const bool softmax = gate_kind_ == GateKind::softmax;
  // Softmax: (w - onehot) / B. Logistic gates are independent, so only the
  // winner's logit moves, by -(1 - w_win) / B.
  Matrix g = softmax ? Matrix(w / b) : Matrix(Matrix::Zero(w.rows(), w.cols()));
  double loss = 0.0;
  for (Eigen::Index c = 0; c < states.cols(); ++c) {
    const auto win = static_cast<Eigen::Index>(winners[static_cast<std::size_t>(c)]);
    g(win, c) -= softmax ? 1.0 / b : (1.0 - w(win, c)) / b;
    loss -= std::log(w(win, c)) / b;
  }
  if (!std::isfinite(loss)) throw NumericalError("gate loss is not finite");
  return {loss, gate_->backward(cache, g)};
}

void ActorCritic::apply_actor(const ActorGradients& g) {
  if (g.experts.size() != experts_.size()) throw DimensionError("apply_actor: expert count mismatch");
  for (std::size_t i = 0; i < experts_.size(); ++i) {
    if (!g.log_std[i].allFinite()) throw NumericalError("non-finite log-std gradient");
    expert_opt_[i].step(experts_[i].parameter_views(), nn::flatten(g.experts[i]));
    log_std_opt_[i].step(vector_view(log_std_[i]), {Matrix(g.log_std[i])});
  }
  if (gate_ && g.gate) gate_opt_.step(gate_->parameter_views(), nn::flatten(*g.gate));
}

void ActorCritic::apply_critic(const nn::Gradients& g) {
  critic_opt_.step(critic_.parameter_views(), nn::flatten(g));
}

void ActorCritic::apply_gate_bp(const nn::Gradients& g) {
  if (!gate_) throw std::logic_error("apply_gate_bp: no gate network");
  gate_bp_opt_.step(gate_->parameter_views(), nn::flatten(g));
}

json ActorCritic::to_json() const {
  json j{{"format", "satmoe-actor-critic"}, {"version", 1}, {"assignments", assign_}};
  j["experts"] = json::array();
  j["log_std"] = json::array();
  for (std::size_t i = 0; i < experts_.size(); ++i) {
    j["experts"].push_back(experts_[i].to_json());
    j["log_std"].push_back(std::vector<double>(log_std_[i].data(), log_std_[i].data() + log_std_[i].size()));
  }
  j["gate"] = gate_ ? gate_->to_json() : json(nullptr);
  j["critic"] = critic_.to_json();
  return j;
}

void ActorCritic::load_json(const json& j) {
  if (j.value("format", "") != "satmoe-actor-critic") throw std::invalid_argument("not an actor-critic checkpoint");
  if (j.at("assignments").get<std::vector<std::vector<int>>>() != assign_)
    throw std::invalid_argument("checkpoint expert assignment does not match the configuration");
  std::vector<nn::Mlp> experts;
  std::vector<Vector> log_std;
  for (std::size_t i = 0; i < assign_.size(); ++i) {
    experts.push_back(nn::Mlp::from_json(j.at("experts").at(i)));
    const auto ls = j.at("log_std").at(i).get<std::vector<double>>();
    if (ls.size() != assign_[i].size() || experts.back().input_size() != state_dim_ ||
        experts.back().output_size() != static_cast<int>(assign_[i].size()))
      throw DimensionError("checkpoint expert shape does not match the configuration");
    log_std.push_back(Eigen::Map<const Vector>(ls.data(), static_cast<Eigen::Index>(ls.size())));
  }
  nn::Mlp critic = nn::Mlp::from_json(j.at("critic"));
  if (critic.input_size() != state_dim_ || critic.output_size() != 1)
    throw DimensionError("checkpoint critic shape does not match the configuration");
  if (gate_) {
    if (j.at("gate").is_null()) throw std::invalid_argument("checkpoint has no gate network");
    gate_ = nn::Mlp::from_json(j.at("gate"));
  }
  experts_ = std::move(experts);
  log_std_ = std::move(log_std);
  critic_ = std::move(critic);
}

// ---------------------------------------------------------------------------

int best_candidate(const std::vector<double>& rewards) {
  int best = 0;
  for (std::size_t i = 1; i < rewards.size(); ++i)
    if (rewards[i] > rewards[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

std::vector<double> value_targets(const std::vector<Transition>& buffer, const std::vector<double>& v_old,
                                  const std::vector<double>& v_next, double gamma, int n_step) {
  std::vector<double> out(buffer.size());
  if (gamma == 0.0) {
    for (std::size_t t = 0; t < buffer.size(); ++t) out[t] = buffer[t].reward;
    return out;
  }
  for (std::size_t t = 0; t < buffer.size(); ++t) {
    double g = 0.0;
    double disc = 1.0;
    std::size_t j = t;
    bool ended = false;
    for (int n = 0; n < n_step; ++n, ++j) {
      g += disc * buffer[j].reward;
      disc *= gamma;
      if (buffer[j].done) {
        ended = true;
        break;
      }
      if (j + 1 >= buffer.size()) {
        g += disc * v_next[j];
        ended = true;
        break;
      }
    }
    if (!ended) g += disc * v_old[j];
    out[t] = g;
  }
  return out;
}

double clip_schedule(const PpoConfig& cfg, int update_index, int total_updates) {
  if (total_updates <= 1) return cfg.clip_start;
  const double f = std::clamp(static_cast<double>(update_index) / static_cast<double>(total_updates - 1), 0.0, 1.0);
  return cfg.clip_start + f * (cfg.clip_end - cfg.clip_start);
}

UpdateStats ppo_update(ActorCritic& ac, const std::vector<Transition>& buffer, const PpoConfig& cfg, double eps,
                       const RewardOracle& oracle, Rng& rng) {
  UpdateStats stats;
  stats.clip_eps = eps;
  const std::size_t n = buffer.size();
  if (n == 0) return stats;

  std::vector<const std::vector<double>*> s_cols, a_cols, ns_cols;
  for (const auto& t : buffer) {
    s_cols.push_back(&t.state);
    a_cols.push_back(&t.action);
    ns_cols.push_back(&t.next_state);
  }
  const Matrix states = to_matrix(s_cols, ac.state_dim());
  const Matrix actions = to_matrix(a_cols, ac.action_dim());
  const Vector v_old_vec = ac.values(states);
  const Vector v_next_vec = cfg.gamma == 0.0 ? Vector::Zero(static_cast<Eigen::Index>(n))
                                             : ac.values(to_matrix(ns_cols, ac.state_dim()));
  std::vector<double> v_old(v_old_vec.data(), v_old_vec.data() + n);
  std::vector<double> v_next(n);
  Vector adv(static_cast<Eigen::Index>(n));
  Vector old_lp(static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < n; ++t) {
    v_next[t] = buffer[t].done ? 0.0 : v_next_vec(static_cast<Eigen::Index>(t));
    adv(static_cast<Eigen::Index>(t)) = advantage(buffer[t].reward, v_next[t], v_old[t], cfg.gamma);
    old_lp(static_cast<Eigen::Index>(t)) = buffer[t].log_prob;
  }
  const auto tv = value_targets(buffer, v_old, v_next, cfg.gamma, cfg.n_step);
  const Vector targets = Eigen::Map<const Vector>(tv.data(), static_cast<Eigen::Index>(n));
  if (cfg.normalize_advantage && n > 1) {
    const double mean = adv.mean();
    const double sd = std::sqrt((adv.array() - mean).square().sum() / static_cast<double>(n));
    adv = sd > 1e-12 ? Vector((adv.array() - mean) / sd) : Vector(adv.array() - mean);
  }

  // Counterfactual winners; candidates were drawn at rollout time.
  std::vector<int> winner(n, -1);
  const bool bp = ac.has_gate() && ac.expert_count() > 1;
  if (bp) {
    for (std::size_t t = 0; t < n; ++t) {
      const auto& cand = buffer[t].candidates;
      if (static_cast<int>(cand.size()) != ac.expert_count() || !oracle) {
        ++stats.bp_max_skipped;
        continue;
      }
      std::vector<double> r;
      for (const auto& a : cand) r.push_back(oracle(a, buffer[t].channel));
      winner[t] = best_candidate(r);
    }
  }

  std::vector<int> bp_winners;
  std::vector<Eigen::Index> bp_idx;
  for (std::size_t t = 0; t < n; ++t)
    if (winner[t] >= 0) {
      bp_winners.push_back(winner[t]);
      bp_idx.push_back(static_cast<Eigen::Index>(t));
    }
  Matrix bp_states(ac.state_dim(), static_cast<Eigen::Index>(bp_idx.size()));
  for (std::size_t c = 0; c < bp_idx.size(); ++c) bp_states.col(static_cast<Eigen::Index>(c)) = states.col(bp_idx[c]);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto mb = static_cast<std::size_t>(cfg.batch_size);
  int minibatches = 0;
  double actor_sum = 0.0, critic_sum = 0.0, clip_sum = 0.0;
  for (int epoch = 0; epoch < cfg.update_epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.next_u64() % (i + 1)]);
    const bool second_phase = bp && epoch >= cfg.update_epochs / 2;
    for (std::size_t start = 0; start < n; start += mb) {
      const std::size_t end = std::min(n, start + mb);
      const auto cnt = static_cast<Eigen::Index>(end - start);
      Matrix s(ac.state_dim(), cnt), a(ac.action_dim(), cnt);
      Vector lp(cnt), ad(cnt), tg(cnt);
      for (Eigen::Index c = 0; c < cnt; ++c) {
        const auto idx = order[start + static_cast<std::size_t>(c)];
        s.col(c) = states.col(static_cast<Eigen::Index>(idx));
        a.col(c) = actions.col(static_cast<Eigen::Index>(idx));
        lp(c) = old_lp(static_cast<Eigen::Index>(idx));
        ad(c) = adv(static_cast<Eigen::Index>(idx));
        tg(c) = targets(static_cast<Eigen::Index>(idx));
      }
      const ActorLoss al = ac.actor_loss(s, a, lp, ad, eps);
      ac.apply_actor(al.grads);
      const auto [closs, cgrad] = ac.critic_loss(s, tg);
      ac.apply_critic(cgrad);
      actor_sum += al.loss;
      critic_sum += closs;
      clip_sum += al.clip_fraction;
      ++minibatches;
    }
    if (second_phase && bp_states.cols() > 0) {
      // One full-buffer gate step toward the counterfactual winners.
      const auto gate_step = ac.gate_bp_loss(bp_states, bp_winners);
      ac.apply_gate_bp(gate_step.second);
      ++stats.bp_max_steps;
    }
  }
  stats.actor_loss = actor_sum / minibatches;
  stats.critic_loss = critic_sum / minibatches;
  stats.clip_fraction = clip_sum / minibatches;

  const PolicyOutput after = ac.forward(states);
  double kl = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const Vector mcol = after.mean.col(static_cast<Eigen::Index>(t));
    kl += gaussian_kl(buffer[t].mean, buffer[t].log_std, std::span<const double>(mcol.data(), mcol.size()),
                      std::span<const double>(after.log_std.data(), after.log_std.size()), ac.mask());
  }
  stats.kl = kl / static_cast<double>(n);
  if (!std::isfinite(stats.kl)) throw NumericalError("policy KL is not finite after the update");
  return stats;
}

}  // namespace satmoe::moe
