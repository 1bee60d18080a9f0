// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "satmoe/config.hpp"
#include "satmoe/kbrouter.hpp"

namespace satmoe::dialogue {

enum class TurnKind { reprompt, role, applied, rejected, disambiguate, unresolved };

struct TurnOutput {
  TurnKind kind = TurnKind::reprompt;
  std::string reply;
  std::string aspect;           // block key touched by this turn, if any
  nlohmann::json fragment;      // fragment applied or proposed
  std::vector<int> provenance;  // supporting chunk ids
  std::string note;             // generator fallback notice
  bool complete = false;        // every aspect has a fragment
};

/// Turn-based configure loop. Each non-empty line is routed through the
/// knowledge base; the generated fragment replaces the fragment of the
/// routed aspect only. When the best two routes are closer than
/// `ambiguity_gap` the session asks which one was meant instead of guessing.
class ConfigureSession {
 public:
  ConfigureSession(const kb::KnowledgeBase& kb, const kb::EmbeddingProvider& provider, const kb::Generator& generator,
                   ScenarioConfig base = {}, double ambiguity_gap = 0.02, int k = 5);

  TurnOutput handle(std::string_view line);

  bool complete() const;
  bool role_assigned() const { return role_assigned_; }
  /// Aspects (block keys) that still lack a fragment, in knowledge-base order.
  std::vector<std::string> missing_aspects() const;
  /// Base scenario with every fragment merged in; throws ConfigError when invalid.
  ScenarioConfig config() const;
  const std::map<std::string, nlohmann::json>& fragments() const { return fragments_; }
  const std::vector<std::string>& transcript() const { return transcript_; }

 private:
  struct Candidate {
    int block = 0;
    int sub = 0;
  };
  TurnOutput apply(std::string_view query, int block, int sub, const std::vector<kb::ScoredChunk>& chunks);
  nlohmann::json merged() const;

  const kb::KnowledgeBase& kb_;
  const kb::EmbeddingProvider& provider_;
  const kb::Generator& generator_;
  ScenarioConfig base_;
  double gap_;
  int k_;
  bool role_assigned_ = false;
  std::map<std::string, nlohmann::json> fragments_;
  std::vector<std::string> transcript_;
  std::vector<Candidate> pending_;
  std::string pending_query_;
};

/// True for lines that assign the assistant a role ("you are ...", "act as ...").
bool is_role_assignment(std::string_view line);

}  // namespace satmoe::dialogue
