// SPDX-License-Identifier: Apache-2.0
#include "satmoe/dialogue.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "satmoe/errors.hpp"

namespace satmoe::dialogue {

using nlohmann::json;

bool is_role_assignment(std::string_view line) {
  std::string s;
  for (char c : line) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const auto start = s.find_first_not_of(" \t");
  if (start == std::string::npos) return false;
  s = s.substr(start);
  for (const char* p : {"you are ", "you're ", "act as ", "your role ", "assume the role", "play the role"})
    if (s.rfind(p, 0) == 0) return true;
  return false;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Indices of the two smallest distances, best first (ties to the lower index).
std::pair<int, int> best_two(const std::vector<double>& d) {
  std::vector<int> idx(d.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });
  return {idx[0], idx.size() > 1 ? idx[1] : idx[0]};
}

}  // namespace

ConfigureSession::ConfigureSession(const kb::KnowledgeBase& kb, const kb::EmbeddingProvider& provider,
                                   const kb::Generator& generator, ScenarioConfig base, double ambiguity_gap, int k)
    : kb_(kb), provider_(provider), generator_(generator), base_(std::move(base)), gap_(ambiguity_gap), k_(k) {
  base_.validate();
}

bool ConfigureSession::complete() const { return missing_aspects().empty(); }

std::vector<std::string> ConfigureSession::missing_aspects() const {
  std::vector<std::string> out;
  for (const auto& b : kb_.blocks())
    if (!fragments_.contains(b.key)) out.push_back(b.key);
  return out;
}

json ConfigureSession::merged() const {
  json j = to_json(base_);
  // Knowledge-base order, so a later aspect never silently overrides an earlier one.
  for (const auto& b : kb_.blocks()) {
    const auto it = fragments_.find(b.key);
    if (it != fragments_.end()) j.merge_patch(it->second);
  }
  return j;
}

ScenarioConfig ConfigureSession::config() const {
  ScenarioConfig c = scenario_from_json(merged());
  c.validate();
  return c;
}

TurnOutput ConfigureSession::apply(std::string_view query, int block, int sub,
                                   const std::vector<kb::ScoredChunk>& chunks) {
  kb::RouteResult r;
  r.block = block;
  r.sub_block = sub;
  r.chunks = chunks;
  const kb::Answer ans = kb::generate_answer(query, kb_, r, generator_);
  const auto& b = kb_.blocks()[static_cast<std::size_t>(block)];
  TurnOutput out;
  out.aspect = b.key;
  out.fragment = ans.fragment;
  out.provenance = ans.provenance;
  out.note = ans.note;

  // Check against the config without the old fragment of this aspect.
  json others = to_json(base_);
  for (const auto& ob : kb_.blocks()) {
    if (ob.key == b.key) continue;
    const auto it = fragments_.find(ob.key);
    if (it != fragments_.end()) others.merge_patch(it->second);
  }
  std::string why;
  if (!kb::fragment_consistent(ans.fragment, b.key, others, &why)) {
    out.kind = TurnKind::rejected;
    out.reply = "The retrieved fragment for " + b.key + " was rejected: " + why;
    out.complete = complete();
    return out;
  }
  const bool revision = fragments_.contains(b.key);
  fragments_[b.key] = ans.fragment;
  out.kind = TurnKind::applied;
  std::string cites;
  for (int id : ans.provenance) cites += (cites.empty() ? "" : ", ") + std::to_string(id);
  out.reply = std::string(revision ? "Updated " : "Set ") + b.key + " -> " + ans.fragment.dump() + " (chunks " + cites +
              ")";
  out.complete = complete();
  if (out.complete)
    out.reply += ". All aspects are set.";
  else {
    std::string miss;
    for (const auto& m : missing_aspects()) miss += (miss.empty() ? "" : ", ") + m;
    out.reply += ". Still open: " + miss + ".";
  }
  return out;
}

TurnOutput ConfigureSession::handle(std::string_view raw) {
  const std::string line = trim(raw);
  TurnOutput out;
  if (line.empty()) {
    out.kind = TurnKind::reprompt;
    out.reply = "Please describe a requirement (scenario, access protocol, channel model or optimization goal).";
    out.complete = complete();
    return out;
  }
  transcript_.push_back(line);

  if (!pending_.empty()) {
    // Answer to a disambiguation question: "1", "2" or the sub-block key.
    std::vector<Candidate> cands;
    cands.swap(pending_);
    const std::string query = pending_query_;
    int pick = -1;
    if (line == "1" || line == "2") pick = line[0] - '1';
    for (std::size_t i = 0; i < cands.size() && pick < 0; ++i)
      if (line == kb_.sub_block(cands[i].block, cands[i].sub).key) pick = static_cast<int>(i);
    if (pick >= 0 && pick < static_cast<int>(cands.size())) {
      const Candidate c = cands[static_cast<std::size_t>(pick)];
      const auto q = provider_.embed(query);
      return apply(query, c.block, c.sub, kb::retrieve(kb_, q, c.block, c.sub, k_));
    }
    // Anything else is treated as a fresh requirement.
  }

  if (is_role_assignment(line)) {
    role_assigned_ = true;
    out.kind = TurnKind::role;
    out.reply = "Understood. Describe the network and I will assemble the configuration.";
    out.complete = complete();
    return out;
  }

  kb::RouteResult r;
  try {
    r = kb::route(line, kb_, provider_, k_);
  } catch (const DomainError&) {
    out.kind = TurnKind::unresolved;
    out.reply = "I could not relate that to any aspect of the model. Could you rephrase it?";
    out.complete = complete();
    return out;
  }

  const auto [b1, b2] = best_two(r.block_distances);
  if (b1 != b2 && r.block_distances[b2] - r.block_distances[b1] < gap_) {
    for (int b : {b1, b2}) {
      const auto& blk = kb_.blocks()[static_cast<std::size_t>(b)];
      std::vector<double> d;
      const auto q = provider_.embed(line);
      for (const auto& s : blk.subs) d.push_back(kb::cosine_distance(q, s.embedding));
      pending_.push_back({b, best_two(d).first});
    }
  } else {
    const auto [s1, s2] = best_two(r.sub_distances);
    if (s1 != s2 && r.sub_distances[s2] - r.sub_distances[s1] < gap_) pending_ = {{r.block, s1}, {r.block, s2}};
  }
  if (!pending_.empty()) {
    pending_query_ = line;
    out.kind = TurnKind::disambiguate;
    out.reply = "That could mean 1) " + kb_.sub_block(pending_[0].block, pending_[0].sub).key + " or 2) " +
                kb_.sub_block(pending_[1].block, pending_[1].sub).key + ". Which one?";
    out.aspect = kb_.blocks()[static_cast<std::size_t>(pending_[0].block)].key;
    out.complete = complete();
    return out;
  }
  return apply(line, r.block, r.sub_block, r.chunks);
}

}  // namespace satmoe::dialogue
