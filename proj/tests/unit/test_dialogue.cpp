// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "satmoe/dialogue.hpp"

using namespace satmoe;
using namespace satmoe::dialogue;

namespace {

struct Fixture {
  kb::StubEmbedding provider;
  kb::KnowledgeBase kb = kb::KnowledgeBase::load(kb::default_kb_dir(), provider);
  kb::TemplateGenerator gen;
};

}  // namespace

TEST_CASE("role assignment detection") {
  CHECK(is_role_assignment("You are a satellite network planner."));
  CHECK(is_role_assignment("  act as my assistant"));
  CHECK_FALSE(is_role_assignment("The users are served by one satellite"));
  CHECK_FALSE(is_role_assignment(""));
}

TEST_CASE("a scripted session assembles and revises the configuration") {
  Fixture f;
  ConfigureSession s(f.kb, f.provider, f.gen);
  CHECK_FALSE(s.complete());
  CHECK(s.missing_aspects().size() == 4);

  CHECK(s.handle("You are a network design assistant.").kind == TurnKind::role);
  CHECK(s.role_assigned());
  CHECK(s.handle("   ").kind == TurnKind::reprompt);
  CHECK(s.transcript().size() == 1);

  auto t = s.handle("A single standalone LEO satellite serves the users alone");
  CHECK(t.kind == TurnKind::applied);
  CHECK(t.aspect == "scenario");
  t = s.handle("Use rate splitting with a common stream decoded by every user");
  CHECK(t.aspect == "access_protocol");
  t = s.handle("The channel fades over time with Doppler correlation between slots");
  CHECK(t.aspect == "channel_model");
  t = s.handle("Maximize the sum rate of the users");
  CHECK(t.aspect == "optimization_goal");
  CHECK(t.complete);
  CHECK(s.complete());

  const auto cfg = s.config();
  CHECK(cfg.scenario_kind == ScenarioKind::homogeneous);
  CHECK(cfg.M == 0);
  CHECK(cfg.protocol == Protocol::rsma);
  CHECK(cfg.channel_mode == ChannelMode::time_varying);
  CHECK(cfg.objective == Objective::sum_rate);

  // Revising one aspect leaves the others alone.
  t = s.handle("Make the channel static, it never changes during the episode");
  CHECK(t.kind == TurnKind::applied);
  CHECK(t.aspect == "channel_model");
  const auto revised = s.config();
  CHECK(revised.channel_mode == ChannelMode::fixed);
  CHECK(revised.protocol == Protocol::rsma);
  CHECK(revised.scenario_kind == ScenarioKind::homogeneous);
}

TEST_CASE("unrelated input is reported as unresolved") {
  Fixture f;
  ConfigureSession s(f.kb, f.provider, f.gen);
  CHECK(s.handle("the and of").kind == TurnKind::unresolved);
  CHECK(s.missing_aspects().size() == 4);
}

TEST_CASE("a tight margin triggers a clarification question") {
  Fixture f;
  // A huge gap forces every query through the question path.
  ConfigureSession s(f.kb, f.provider, f.gen, ScenarioConfig{}, 10.0);
  auto t = s.handle("rate splitting common stream");
  REQUIRE(t.kind == TurnKind::disambiguate);
  CHECK(t.reply.find("1)") != std::string::npos);
  t = s.handle("1");
  CHECK(t.kind == TurnKind::applied);
  CHECK(s.fragments().size() == 1);
}
