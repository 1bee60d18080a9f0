// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>

#include "satmoe/kbrouter.hpp"

namespace satmoe::kb {

/// Connection settings for an OpenAI-compatible HTTP service. The API key is
/// never part of the settings; it is read from `api_key_env` at call time.
struct ServiceSettings {
  std::string base_url;           // e.g. "https://api.example.com"
  std::string embedding_path = "/v1/embeddings";
  std::string generation_path = "/v1/chat/completions";
  std::string embedding_model;
  std::string generation_model;
  int dimension = 1536;
  double timeout_s = 10.0;
  std::string api_key_env = "SATMOE_EMBEDDING_API_KEY";
};

/// Settings from SATMOE_SERVICE_URL / SATMOE_EMBEDDING_MODEL /
/// SATMOE_GENERATION_MODEL / SATMOE_EMBEDDING_DIM, with the defaults above.
ServiceSettings service_settings_from_env();

/// POST {"model", "input"} -> {"data": [{"embedding": [...]}]}.
/// Every failure (timeout, HTTP status, malformed body, wrong length) raises
/// ProviderError; timeouts and 5xx/429 are marked retryable.
class HttpEmbedding final : public EmbeddingProvider {
 public:
  explicit HttpEmbedding(ServiceSettings s);
  std::vector<double> embed(std::string_view text) const override;
  int dimension() const override { return s_.dimension; }
  std::string name() const override { return "http:" + s_.embedding_model; }

 private:
  ServiceSettings s_;
};

/// Chat-completion generator asked to return a JSON config fragment. Token
/// probabilities come from the response's logprobs when present, otherwise
/// the sequence is treated as certain.
class HttpGenerator final : public Generator {
 public:
  explicit HttpGenerator(ServiceSettings s);
  Generation generate(std::string_view query, const KnowledgeBase& kb, const Chunk& chunk) const override;
  std::string name() const override { return "http:" + s_.generation_model; }

 private:
  ServiceSettings s_;
};

/// "stub" -> StubEmbedding; "external" -> HttpEmbedding from the environment.
std::unique_ptr<EmbeddingProvider> make_embedding_provider(const std::string& kind);
/// "stub" -> TemplateGenerator; "external" -> HttpGenerator from the environment.
std::unique_ptr<Generator> make_generator(const std::string& kind);

}  // namespace satmoe::kb
