// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../support/gradcheck.hpp"
#include "satmoe/errors.hpp"
#include "satmoe/moeppo.hpp"

using namespace satmoe;
using namespace satmoe::moe;

TEST_CASE("expert assignments partition the action") {
  CHECK(expert_assignments(1, 2) == std::vector<std::vector<int>>{{0, 1, 2, 3, 4}});
  CHECK(expert_assignments(2, 2) == std::vector<std::vector<int>>{{0, 1, 2}, {3, 4}});
  CHECK(expert_assignments(3, 2) == std::vector<std::vector<int>>{{0, 1}, {2}, {3, 4}});
  CHECK(expert_assignments(5, 2).size() == 5);
  CHECK(expert_assignments(7, 3)[6] == std::vector<int>{6});
  CHECK_THROWS_AS(expert_assignments(4, 2), ConfigError);
  CHECK_THROWS_AS(expert_assignments(1, 0), ConfigError);
}

TEST_CASE("SDMA masks the common dimensions") {
  ScenarioConfig cfg;
  CHECK(active_mask(cfg) == std::vector<char>{1, 1, 1, 1, 1});
  cfg.protocol = Protocol::sdma;
  CHECK(active_mask(cfg) == std::vector<char>{1, 1, 0, 0, 0});
}

TEST_CASE("clipped surrogate on both sides of the trust region") {
  CHECK(clipped_objective(1.5, 2.0, 0.2) == doctest::Approx(2.4));
  CHECK(clipped_objective(1.5, -2.0, 0.2) == doctest::Approx(-3.0));
  CHECK(clipped_objective(0.5, 2.0, 0.2) == doctest::Approx(1.0));
  CHECK(clipped_objective(0.5, -2.0, 0.2) == doctest::Approx(-1.6));
  CHECK(clipped_objective(1.1, 1.0, 0.2) == doctest::Approx(1.1));
  CHECK(advantage(1.0, 2.0, 0.5, 0.0) == 0.5);
  CHECK(advantage(1.0, 2.0, 0.5, 0.5) == 1.5);
}

TEST_CASE("Gaussian density, sampling and KL") {
  const std::vector<double> x{0.3, -1.0}, m{0.0, 0.0}, ls{std::log(2.0), 0.0};
  const std::vector<char> both{1, 1}, first{1, 0};
  const double expect1 = -0.5 * 0.15 * 0.15 - std::log(2.0) - 0.5 * std::log(2 * std::numbers::pi);
  const double expect2 = -0.5 - 0.5 * std::log(2 * std::numbers::pi);
  CHECK(gaussian_log_prob(x, m, ls, both) == doctest::Approx(expect1 + expect2).epsilon(1e-14));
  CHECK(gaussian_log_prob(x, m, ls, first) == doctest::Approx(expect1).epsilon(1e-14));
  CHECK_THROWS_AS(gaussian_log_prob(x, std::vector<double>{0.0}, ls, both), DimensionError);

  CHECK(gaussian_kl(m, ls, m, ls, both) == doctest::Approx(0.0));
  // KL(N(0,1) || N(1,1)) = 1/2.
  CHECK(gaussian_kl(std::vector<double>{0.0}, std::vector<double>{0.0}, std::vector<double>{1.0},
                    std::vector<double>{0.0}, std::vector<char>{1}) == doctest::Approx(0.5));

  // Inactive dimensions still consume the stream.
  Rng a(3), b(3);
  const auto s1 = sample_action(m, ls, first, a);
  const auto s2 = sample_action(m, ls, both, b);
  CHECK(s1.action == s2.action);
  CHECK(s1.log_prob == doctest::Approx(gaussian_log_prob(s1.action, m, ls, first)));
}

TEST_CASE("softmax columns sum to one and tolerate large logits") {
  Matrix l(3, 2);
  l << 1000.0, 0.0, 1000.0, 0.0, -1000.0, 0.0;
  const Matrix w = softmax_columns(l);
  CHECK(w(0, 0) == doctest::Approx(0.5));
  CHECK(w(2, 0) == 0.0);
  CHECK(w.col(1).sum() == doctest::Approx(1.0));
  CHECK(w(1, 1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("best candidate keeps the lowest index on ties") {
  CHECK(best_candidate({1.0, 3.0, 3.0}) == 1);
  CHECK(best_candidate({0.0, 0.0, 0.0}) == 0);
  CHECK(best_candidate({-1.0, -0.5}) == 1);
}

TEST_CASE("value targets and clip schedule") {
  std::vector<Transition> buf(5);
  for (int i = 0; i < 5; ++i) buf[i].reward = i + 1.0;
  buf[2].done = true;
  const std::vector<double> v_old{10, 20, 30, 40, 50}, v_next{20, 30, 0, 50, 60};
  CHECK(value_targets(buf, v_old, v_next, 0.0, 4) == std::vector<double>{1, 2, 3, 4, 5});
  const auto t = value_targets(buf, v_old, v_next, 0.5, 2);
  CHECK(t[0] == doctest::Approx(1 + 0.5 * 2 + 0.25 * 30));
  CHECK(t[1] == doctest::Approx(2 + 0.5 * 3));  // cut at the episode end
  CHECK(t[2] == doctest::Approx(3));
  CHECK(t[3] == doctest::Approx(4 + 0.5 * 5 + 0.25 * 60));  // bootstrapped at the buffer end

  PpoConfig p;
  CHECK(clip_schedule(p, 0, 10) == doctest::Approx(0.2));
  CHECK(clip_schedule(p, 9, 10) == doctest::Approx(0.02));
  CHECK(clip_schedule(p, 1, 1) == doctest::Approx(0.2));
}

TEST_CASE("MoE mean is offset plus gate-weighted expert outputs") {
  ScenarioConfig sc;
  PpoConfig pc;
  pc.hidden = 8;
  ActorCritic ac(sc, pc, 3);
  CHECK(ac.expert_count() == 3);
  CHECK(ac.has_gate());
  const std::vector<double> s(static_cast<std::size_t>(ac.state_dim()), 0.2);
  const auto out = ac.act(s);
  CHECK(out.gate.col(0).sum() == doctest::Approx(1.0));
  for (int d = 0; d < 5; ++d) {
    const int owner = d < 2 ? 0 : d == 2 ? 1 : 2;
    const int local = d < 2 ? d : d == 2 ? 0 : d - 3;
    const double off = d <= 2 ? pc.power_logit_offset : 0.0;
    CHECK(out.mean(d, 0) == doctest::Approx(off + out.gate(owner, 0) * out.expert_out[owner](local, 0)));
  }
  CHECK_THROWS_AS(ac.act(std::vector<double>(3, 0.0)), DimensionError);
}

TEST_CASE("plain PPO and single-expert MoE agree") {
  ScenarioConfig sc;
  PpoConfig a;
  a.hidden = 8;
  a.experts = 1;
  PpoConfig b = a;
  b.algorithm = Algorithm::ppo;
  ActorCritic m(sc, a, 11), p(sc, b, 11);
  CHECK_FALSE(p.has_gate());
  Matrix s = Matrix::Random(m.state_dim(), 4);
  // With one expert the softmax weight is exactly 1.
  CHECK(m.forward(s).mean == p.forward(s).mean);
  CHECK(m.values(s) == p.values(s));
}

TEST_CASE("actor, gate and critic gradients match finite differences") {
  for (auto proto : {Protocol::rsma, Protocol::sdma}) {
    for (auto gate : {GateKind::softmax, GateKind::logistic}) {
      auto ac = gradcheck::make_model(3, proto, gate);
      const auto batch = gradcheck::make_batch(ac);
      const auto r = gradcheck::run(ac, batch);
      CHECK(r.experts < 1e-4);
      CHECK(r.log_std < 1e-4);
      CHECK(r.gate < 1e-4);
      CHECK(r.gate_bp < 1e-4);
      CHECK(r.critic < 1e-5);
    }
  }
  auto plain = gradcheck::make_model(1, Protocol::rsma, GateKind::softmax, Algorithm::ppo);
  const auto r = gradcheck::run(plain, gradcheck::make_batch(plain));
  CHECK(r.experts < 1e-4);
  CHECK(r.log_std < 1e-4);
}

TEST_CASE("checkpoint round trip restores the policy") {
  ScenarioConfig sc;
  PpoConfig pc;
  pc.hidden = 8;
  ActorCritic a(sc, pc, 1), b(sc, pc, 2);
  const Matrix s = Matrix::Random(a.state_dim(), 3);
  CHECK_FALSE(a.forward(s).mean == b.forward(s).mean);
  b.load_json(a.to_json());
  CHECK(a.forward(s).mean == b.forward(s).mean);
  CHECK(a.values(s) == b.values(s));
  PpoConfig other = pc;
  other.experts = 2;
  ActorCritic c(sc, other, 1);
  CHECK_THROWS(c.load_json(a.to_json()));
}

TEST_CASE("an update moves the policy and reports its statistics") {
  ScenarioConfig sc;
  PpoConfig pc;
  pc.hidden = 8;
  pc.batch_size = 8;
  pc.update_epochs = 4;
  ActorCritic ac(sc, pc, 5);
  Rng rng(9);
  channel::ChannelProcess proc(sc);
  std::vector<Transition> buf;
  for (int i = 0; i < 20; ++i) {
    proc.reset(static_cast<std::uint64_t>(i));
    Transition t;
    t.state.assign(static_cast<std::size_t>(ac.state_dim()), 0.1 * i);
    const auto out = ac.act(t.state);
    t.mean.assign(out.mean.data(), out.mean.data() + 5);
    t.log_std.assign(out.log_std.data(), out.log_std.data() + 5);
    const auto smp = sample_action(t.mean, t.log_std, ac.mask(), rng);
    t.action = smp.action;
    t.log_prob = smp.log_prob;
    t.reward = t.action[0];
    t.done = (i % 10) == 9;
    t.next_state = t.state;
    t.channel = proc.current();
    t.candidates = {t.action, t.action, t.action};
    buf.push_back(t);
  }
  int calls = 0;
  const RewardOracle oracle = [&](const std::vector<double>& a, const channel::ChannelState&) {
    ++calls;
    return a[0];
  };
  const Matrix before = ac.forward(Matrix::Constant(ac.state_dim(), 1, 0.3)).mean;
  const auto st = ppo_update(ac, buf, pc, 0.2, oracle, rng);
  CHECK(calls == 60);
  CHECK(st.bp_max_steps == 2);
  CHECK(st.bp_max_skipped == 0);
  CHECK(st.kl >= 0.0);
  CHECK(std::isfinite(st.actor_loss));
  CHECK_FALSE(ac.forward(Matrix::Constant(ac.state_dim(), 1, 0.3)).mean == before);
  const Matrix g = ac.forward(Matrix::Random(ac.state_dim(), 16)).gate;
  for (int c = 0; c < g.cols(); ++c) {
    CHECK(g.col(c).sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g.col(c).minCoeff() > 0.0);
  }
}

TEST_CASE("two experts with gate weights 0.7 and 0.3") {
  ScenarioConfig sc;
  PpoConfig pc;
  pc.hidden = 8;
  pc.experts = 2;
  ActorCritic ac(sc, pc, 4);
  auto& head = ac.gate()->mutable_layers().back();
  head.weight.setZero();
  head.bias << std::log(0.7), std::log(0.3);
  const std::vector<double> s(static_cast<std::size_t>(ac.state_dim()), -0.4);
  const auto out = ac.act(s);
  CHECK(std::abs(out.gate(0, 0) - 0.7) < 1e-12);
  CHECK(std::abs(out.gate(1, 0) - 0.3) < 1e-12);
  // Expert 0 owns the K+1 power logits, expert 1 the K common rates.
  for (int d = 0; d < 5; ++d) {
    const double want = d <= 2 ? pc.power_logit_offset + 0.7 * out.expert_out[0](d, 0)
                               : 0.3 * out.expert_out[1](d - 3, 0);
    CHECK(std::abs(out.mean(d, 0) - want) < 1e-12);
  }
}

TEST_CASE("first epoch surrogate equals the mean advantage") {
  for (auto proto : {Protocol::rsma, Protocol::sdma}) {
    auto ac = gradcheck::make_model(3, proto, GateKind::softmax);
    auto batch = gradcheck::make_batch(ac);
    const auto out = ac.forward(batch.states);
    for (int c = 0; c < batch.states.cols(); ++c) {
      const Vector m = out.mean.col(c), a = batch.actions.col(c);
      batch.old_log_prob(c) = gaussian_log_prob(std::span<const double>(a.data(), a.size()),
                                                std::span<const double>(m.data(), m.size()),
                                                std::span<const double>(out.log_std.data(), out.log_std.size()),
                                                ac.mask());
    }
    const auto l = ac.actor_loss(batch.states, batch.actions, batch.old_log_prob, batch.adv, 0.2);
    CHECK(std::abs(l.loss + batch.adv.mean()) < 1e-12);
    CHECK(l.clip_fraction == 0.0);
  }
}

TEST_CASE("gate converges to an expert that always wins") {
  ScenarioConfig sc;
  PpoConfig pc;
  pc.hidden = 16;
  ActorCritic ac(sc, pc, 8);
  Rng rng(2);
  Matrix states(ac.state_dim(), 32);
  for (int i = 0; i < states.size(); ++i) states.data()[i] = rng.uniform(-1.0, 1.0);
  const std::vector<int> winners(32, 2);
  double first = 0.0, last = 0.0;
  for (int step = 0; step < 2000; ++step) {
    const auto [loss, g] = ac.gate_bp_loss(states, winners);
    if (step == 0) first = loss;
    last = loss;
    ac.apply_gate_bp(g);
  }
  CHECK(last < first);
  const Matrix w = ac.forward(states).gate;
  CHECK(w.row(2).minCoeff() > 0.95);
}

TEST_CASE("an infeasible candidate never wins while a feasible one exists") {
  Rng rng(6);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> r(3);
    int feasible = -1;
    for (int i = 0; i < 3; ++i) {
      r[static_cast<std::size_t>(i)] = rng.uniform(0.0, 1.0) < 0.5 ? 0.0 : rng.uniform(0.1, 5.0);
      if (r[static_cast<std::size_t>(i)] > 0.0) feasible = i;
    }
    const int w = best_candidate(r);
    if (feasible >= 0) CHECK(r[static_cast<std::size_t>(w)] > 0.0);
    else CHECK(w == 0);
  }
}
