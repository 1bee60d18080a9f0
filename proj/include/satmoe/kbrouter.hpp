// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace satmoe::kb {

/// Failure of an embedding or generation backend.
class ProviderError : public std::runtime_error {
 public:
  ProviderError(const std::string& what, bool retryable) : std::runtime_error(what), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

/// 1 - a.b / (|a| |b|). Throws DimensionError on length mismatch and
/// DomainError when either vector is all-zero.
double cosine_distance(std::span<const double> a, std::span<const double> b);

/// Lower-cased alphanumeric word tokens (whitespace split, punctuation trimmed).
std::vector<std::string> normalize_tokens(std::string_view text);
/// Raw whitespace-separated tokens.
std::vector<std::string> whitespace_tokens(std::string_view text);

struct TokenWindow {
  int begin = 0;
  int count = 0;
};

/// Sliding windows of `chunk_size` tokens advancing by chunk_size - overlap.
/// The last window may be short. Throws std::invalid_argument unless
/// chunk_size > overlap >= 0.
std::vector<TokenWindow> chunk_windows(int token_count, int chunk_size, int overlap);
/// Chunk texts (tokens re-joined with single spaces). Empty text -> empty list.
std::vector<std::string> chunk_document(std::string_view text, int chunk_size, int overlap);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<double> embed(std::string_view text) const = 0;
  virtual int dimension() const = 0;
  virtual std::string name() const = 0;
};

/// Deterministic hashed bag of words: each normalized non-stopword token adds
/// 1 to bucket fnv1a(token) mod dim; the result is L2-normalized. Text with
/// no usable tokens maps to the zero vector.
class StubEmbedding final : public EmbeddingProvider {
 public:
  explicit StubEmbedding(int dim = 256);
  std::vector<double> embed(std::string_view text) const override;
  int dimension() const override { return dim_; }
  std::string name() const override { return "stub"; }

 private:
  int dim_;
};

/// Multiplies another provider's vectors by a constant (scale-invariance checks).
class ScaledEmbedding final : public EmbeddingProvider {
 public:
  ScaledEmbedding(const EmbeddingProvider& inner, double scale) : inner_(inner), scale_(scale) {}
  std::vector<double> embed(std::string_view text) const override;
  int dimension() const override { return inner_.dimension(); }
  std::string name() const override { return inner_.name() + "*scaled"; }

 private:
  const EmbeddingProvider& inner_;
  double scale_;
};

struct Chunk {
  int id = 0;
  int block = 0;
  int sub_block = 0;
  std::string source;  // file name relative to the knowledge-base directory
  int token_begin = 0;
  int token_count = 0;
  std::string text;
  std::vector<double> embedding;
};

struct SubBlock {
  std::string key;
  std::string label;
  nlohmann::json fragment;  // ScenarioConfig fields this sub-block sets
  std::vector<std::string> files;
  std::vector<double> embedding;
  std::vector<int> chunk_ids;
};

struct Block {
  std::string key;
  std::string label;
  std::vector<double> embedding;
  std::vector<SubBlock> subs;
};

struct ChunkOptions {
  int chunk_size = 500;
  int overlap = 0;
};

/// Immutable after construction; safe to share between threads.
class KnowledgeBase {
 public:
  /// Reads `dir`/manifest.json and the text files it lists.
  static KnowledgeBase load(const std::string& dir, const EmbeddingProvider& provider, ChunkOptions opts = {});
  /// Builds from an in-memory manifest; `texts` maps file name -> content.
  static KnowledgeBase build(const nlohmann::json& manifest,
                             const std::vector<std::pair<std::string, std::string>>& texts,
                             const EmbeddingProvider& provider, ChunkOptions opts = {});

  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<Chunk>& chunks() const { return chunks_; }
  const ChunkOptions& options() const { return opts_; }
  const SubBlock& sub_block(int block, int sub) const;
  /// Drops the given chunks (used to build RR = 0 controls).
  KnowledgeBase without_chunks(const std::vector<int>& ids) const;

 private:
  std::vector<Block> blocks_;
  std::vector<Chunk> chunks_;
  ChunkOptions opts_;
};

struct ScoredChunk {
  int chunk_id = 0;
  double inner_product = 0.0;
  double score = 0.0;  // softmax over the returned set
};

/// Top-k chunks of one sub-block by inner product with the query embedding,
/// highest first (ties by chunk id); scores are exp(ip) normalized over the
/// returned set.
std::vector<ScoredChunk> retrieve(const KnowledgeBase& kb, std::span<const double> query, int block, int sub,
                                  int k);

struct RouteResult {
  int block = 0;
  int sub_block = 0;
  std::vector<double> block_distances;  // layer 1, one per block
  std::vector<double> sub_distances;    // layer 2, within the chosen block
  std::vector<ScoredChunk> chunks;
  /// Smallest gap between the winner and the runner-up at either layer.
  double margin() const;
};

/// Layer 1 picks the nearest block label, layer 2 the nearest sub-block label
/// inside it (cosine distance, ties to the lowest index), then retrieves the
/// top-k chunks of that sub-block. Provider failures surface as ProviderError.
RouteResult route(std::string_view query, const KnowledgeBase& kb, const EmbeddingProvider& provider, int k = 5);

// ---------------------------------------------------------------------------
// Generation

struct Generation {
  std::string text;
  std::vector<double> token_probs;  // p(m_i | q, z, m_<i) for each output token
};

class Generator {
 public:
  virtual ~Generator() = default;
  virtual Generation generate(std::string_view query, const KnowledgeBase& kb, const Chunk& chunk) const = 0;
  virtual std::string name() const = 0;
};

/// Emits the routed sub-block's config fragment as compact JSON with one-hot
/// token probabilities. No network access.
class TemplateGenerator final : public Generator {
 public:
  Generation generate(std::string_view query, const KnowledgeBase& kb, const Chunk& chunk) const override;
  std::string name() const override { return "template"; }
};

struct Answer {
  std::string text;
  nlohmann::json fragment;     // parsed config fragment (null if the text is not JSON)
  double probability = 0.0;    // marginal sequence probability
  std::vector<int> provenance; // chunk ids that support the answer
  std::string note;            // e.g. fallback notice
};

/// Sequence-level marginalization over the retrieved chunks:
/// p(m|q) = sum_z p(z|q) prod_i p(m_i|q,z,m_<i). Returns the candidate text with
/// the largest marginal. If `generator` throws ProviderError the template
/// generator is used instead and the fallback is recorded in `note`.
Answer generate_answer(std::string_view query, const KnowledgeBase& kb, const RouteResult& routed,
                       const Generator& generator);

/// True when every key of `fragment` belongs to the aspect of `block` and the
/// fragment merged into `base` yields a valid ScenarioConfig. `why` receives
/// the first problem found.
bool fragment_consistent(const nlohmann::json& fragment, const std::string& block_key, const nlohmann::json& base,
                         std::string* why = nullptr);

// ---------------------------------------------------------------------------
// Retrieval-rate evaluation

struct EvalQuery {
  std::string query;
  std::string block;      // expected block key
  std::string sub_block;  // expected sub-block key
  std::string gold_file;
  std::string gold_phrase;  // must occur verbatim (token-wise) in gold_file
};

std::vector<EvalQuery> load_eval_corpus(const std::string& file);

struct EvalOutcome {
  std::size_t queries = 0;
  std::size_t routed_correctly = 0;
  std::size_t retrieved = 0;
  double routing_accuracy() const;
  double retrieval_rate() const;
};

/// A query counts as retrieved when one of its top-k chunks comes from the
/// gold file and overlaps the gold phrase's token span. Throws DomainError on
/// an empty corpus.
EvalOutcome evaluate_corpus(const KnowledgeBase& kb, const EmbeddingProvider& provider,
                            const std::vector<EvalQuery>& corpus, int k);
double retrieval_rate(const KnowledgeBase& kb, const EmbeddingProvider& provider,
                      const std::vector<EvalQuery>& corpus, int k);

struct RrCell {
  int chunk_size = 0;
  int k = 0;
  double rr = 0.0;
  double routing_accuracy = 0.0;
};

/// RR over the full chunk_size x k grid; rebuilds the knowledge base per size.
std::vector<RrCell> rr_sweep(const std::string& kb_dir, const EmbeddingProvider& provider,
                             const std::vector<EvalQuery>& corpus, const std::vector<int>& sizes,
                             const std::vector<int>& ks, int overlap = 0);

/// Default knowledge-base directory shipped with the sources.
std::string default_kb_dir();

}  // namespace satmoe::kb
