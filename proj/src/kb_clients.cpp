// SPDX-License-Identifier: Apache-2.0
#include "satmoe/kb_clients.hpp"

#include <cmath>
#include <cstdlib>

#include <httplib.h>

namespace satmoe::kb {

using nlohmann::json;

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return (v && *v) ? std::string(v) : std::move(fallback);
}

std::string api_key(const ServiceSettings& s) {
  const char* v = std::getenv(s.api_key_env.c_str());
  if (!v || !*v) throw ProviderError("environment variable " + s.api_key_env + " is not set", false);
  return v;
}

json post_json(const ServiceSettings& s, const std::string& path, const json& body) {
  if (s.base_url.empty()) throw ProviderError("no service URL configured (SATMOE_SERVICE_URL)", false);
  httplib::Client cli(s.base_url);
  const auto secs = static_cast<time_t>(s.timeout_s);
  const auto usecs = static_cast<time_t>((s.timeout_s - static_cast<double>(secs)) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  const httplib::Headers headers = {{"Authorization", "Bearer " + api_key(s)}};
  const auto res = cli.Post(path, headers, body.dump(), "application/json");
  if (!res) throw ProviderError("request to " + s.base_url + path + " failed: " + httplib::to_string(res.error()), true);
  if (res->status != 200) {
    const bool retry = res->status == 429 || res->status >= 500;
    throw ProviderError("service returned HTTP " + std::to_string(res->status), retry);
  }
  try {
    return json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw ProviderError(std::string("malformed service response: ") + e.what(), false);
  }
}

}  // namespace

ServiceSettings service_settings_from_env() {
  ServiceSettings s;
  s.base_url = env_or("SATMOE_SERVICE_URL", "");
  s.embedding_model = env_or("SATMOE_EMBEDDING_MODEL", "text-embedding-3-small");
  s.generation_model = env_or("SATMOE_GENERATION_MODEL", "gpt-4o-mini");
  s.dimension = std::atoi(env_or("SATMOE_EMBEDDING_DIM", "1536").c_str());
  if (s.dimension < 1) s.dimension = 1536;
  return s;
}

HttpEmbedding::HttpEmbedding(ServiceSettings s) : s_(std::move(s)) {}

std::vector<double> HttpEmbedding::embed(std::string_view text) const {
  const json body = {{"model", s_.embedding_model}, {"input", std::string(text)}};
  const json res = post_json(s_, s_.embedding_path, body);
  std::vector<double> v;
  try {
    v = res.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ProviderError(std::string("embedding response lacks data[0].embedding: ") + e.what(), false);
  }
  if (static_cast<int>(v.size()) != s_.dimension)
    throw ProviderError("embedding has length " + std::to_string(v.size()) + ", expected " +
                            std::to_string(s_.dimension),
                        false);
  return v;
}

HttpGenerator::HttpGenerator(ServiceSettings s) : s_(std::move(s)) {}

Generation HttpGenerator::generate(std::string_view query, const KnowledgeBase& kb, const Chunk& chunk) const {
  const SubBlock& sb = kb.sub_block(chunk.block, chunk.sub_block);
  const std::string system =
      "You translate satellite network requirements into configuration fragments. Reply with one JSON object "
      "using only these fields and values: " +
      sb.fragment.dump();
  const std::string user = "Requirement: " + std::string(query) + "\n\nReference:\n" + chunk.text;
  const json body = {{"model", s_.generation_model},
                     {"temperature", 0},
                     {"logprobs", true},
                     {"messages", json::array({{{"role", "system"}, {"content", system}},
                                               {{"role", "user"}, {"content", user}}})}};
  const json res = post_json(s_, s_.generation_path, body);
  Generation g;
  try {
    const json& choice = res.at("choices").at(0);
    g.text = choice.at("message").at("content").get<std::string>();
    if (choice.contains("logprobs") && choice["logprobs"].is_object() && choice["logprobs"].contains("content"))
      for (const auto& t : choice["logprobs"]["content"]) g.token_probs.push_back(std::exp(t.at("logprob").get<double>()));
  } catch (const json::exception& e) {
    throw ProviderError(std::string("generation response malformed: ") + e.what(), false);
  }
  if (g.token_probs.empty()) g.token_probs.push_back(1.0);
  // Normalize whitespace so equal fragments marginalize together.
  try {
    g.text = json::parse(g.text).dump();
  } catch (const json::parse_error&) {
  }
  return g;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const std::string& kind) {
  if (kind == "stub") return std::make_unique<StubEmbedding>();
  if (kind == "external") return std::make_unique<HttpEmbedding>(service_settings_from_env());
  throw std::invalid_argument("unknown provider '" + kind + "' (expected stub or external)");
}

std::unique_ptr<Generator> make_generator(const std::string& kind) {
  if (kind == "stub") return std::make_unique<TemplateGenerator>();
  if (kind == "external") return std::make_unique<HttpGenerator>(service_settings_from_env());
  throw std::invalid_argument("unknown provider '" + kind + "' (expected stub or external)");
}

}  // namespace satmoe::kb
