// SPDX-License-Identifier: Apache-2.0
#include "satmoe/kbrouter.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "satmoe/config.hpp"
#include "satmoe/errors.hpp"

namespace satmoe::kb {

using nlohmann::json;

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("cosine_distance: length mismatch");
  if (a.empty()) throw DomainError("cosine_distance: empty vectors");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw DomainError("cosine_distance: zero vector");
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return 1.0 - std::clamp(c, -1.0, 1.0);
}

std::vector<std::string> whitespace_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::vector<std::string> normalize_tokens(std::string_view text) {
  std::string clean(text);
  for (char& c : clean) {
    const auto u = static_cast<unsigned char>(c);
    c = std::isalnum(u) ? static_cast<char>(std::tolower(u)) : ' ';
  }
  return whitespace_tokens(clean);
}

std::vector<TokenWindow> chunk_windows(int token_count, int chunk_size, int overlap) {
  if (overlap < 0 || chunk_size <= overlap) throw std::invalid_argument("chunking needs chunk_size > overlap >= 0");
  std::vector<TokenWindow> out;
  const int step = chunk_size - overlap;
  for (int begin = 0; begin < token_count; begin += step) {
    out.push_back({begin, std::min(chunk_size, token_count - begin)});
    if (begin + chunk_size >= token_count) break;
  }
  return out;
}

std::vector<std::string> chunk_document(std::string_view text, int chunk_size, int overlap) {
  const auto tokens = whitespace_tokens(text);
  std::vector<std::string> out;
  for (const auto& w : chunk_windows(static_cast<int>(tokens.size()), chunk_size, overlap)) {
    std::string s;
    for (int i = w.begin; i < w.begin + w.count; ++i) {
      if (i > w.begin) s += ' ';
      s += tokens[static_cast<std::size_t>(i)];
    }
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Embeddings

namespace {

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "a",    "an",   "and",  "are",  "as",   "at",   "be",   "by",    "can",  "do",    "for",  "from",
      "has",  "have", "i",    "if",   "in",   "into", "is",   "it",    "its",  "me",    "my",   "of",
      "on",   "or",   "our",  "so",   "that", "the",  "their", "then", "there", "these", "this", "to",
      "us",   "was",  "we",   "what", "when", "which", "while", "who", "will", "with",  "would", "you",
      "your", "want", "please", "should", "let", "lets", "use", "using", "set", "make", "model", "like"};
  return words;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

StubEmbedding::StubEmbedding(int dim) : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("StubEmbedding: dimension must be >= 1");
}

std::vector<double> StubEmbedding::embed(std::string_view text) const {
  std::vector<double> v(static_cast<std::size_t>(dim_), 0.0);
  const auto& stop = stopwords();
  for (const auto& tok : normalize_tokens(text)) {
    if (stop.contains(tok)) continue;
    v[fnv1a(tok) % static_cast<std::uint64_t>(dim_)] += 1.0;
  }
  double n = 0.0;
  for (double x : v) n += x * x;
  if (n > 0.0) {
    n = std::sqrt(n);
    for (double& x : v) x /= n;
  }
  return v;
}

std::vector<double> ScaledEmbedding::embed(std::string_view text) const {
  auto v = inner_.embed(text);
  for (double& x : v) x *= scale_;
  return v;
}

// ---------------------------------------------------------------------------
// Knowledge base

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> embed_checked(const EmbeddingProvider& p, std::string_view text) {
  auto v = p.embed(text);
  if (static_cast<int>(v.size()) != p.dimension())
    throw ProviderError("embedding provider '" + p.name() + "' returned a vector of the wrong length", false);
  return v;
}

}  // namespace

KnowledgeBase KnowledgeBase::build(const json& manifest, const std::vector<std::pair<std::string, std::string>>& texts,
                                   const EmbeddingProvider& provider, ChunkOptions opts) {
  // Validate the window arithmetic up front so an empty manifest still rejects bad options.
  (void)chunk_windows(0, opts.chunk_size, opts.overlap);
  std::unordered_map<std::string, const std::string*> by_name;
  for (const auto& [name, text] : texts) by_name[name] = &text;

  KnowledgeBase kb;
  kb.opts_ = opts;
  const json& blocks = manifest.at("blocks");
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const json& jb = blocks[bi];
    Block b;
    b.key = jb.at("key").get<std::string>();
    b.label = jb.at("label").get<std::string>();
    b.embedding = embed_checked(provider, b.label);
    const json& subs = jb.at("sub_blocks");
    for (std::size_t si = 0; si < subs.size(); ++si) {
      const json& js = subs[si];
      SubBlock s;
      s.key = js.at("key").get<std::string>();
      s.label = js.at("label").get<std::string>();
      s.fragment = js.at("fragment");
      s.files = js.at("files").get<std::vector<std::string>>();
      s.embedding = embed_checked(provider, s.label);
      for (const auto& file : s.files) {
        const auto it = by_name.find(file);
        if (it == by_name.end()) throw std::runtime_error("knowledge base file '" + file + "' is missing");
        const auto tokens = whitespace_tokens(*it->second);
        for (const auto& w : chunk_windows(static_cast<int>(tokens.size()), opts.chunk_size, opts.overlap)) {
          Chunk c;
          c.id = static_cast<int>(kb.chunks_.size());
          c.block = static_cast<int>(bi);
          c.sub_block = static_cast<int>(si);
          c.source = file;
          c.token_begin = w.begin;
          c.token_count = w.count;
          for (int i = w.begin; i < w.begin + w.count; ++i) {
            if (i > w.begin) c.text += ' ';
            c.text += tokens[static_cast<std::size_t>(i)];
          }
          c.embedding = embed_checked(provider, c.text);
          s.chunk_ids.push_back(c.id);
          kb.chunks_.push_back(std::move(c));
        }
      }
      b.subs.push_back(std::move(s));
    }
    kb.blocks_.push_back(std::move(b));
  }
  return kb;
}

KnowledgeBase KnowledgeBase::load(const std::string& dir, const EmbeddingProvider& provider, ChunkOptions opts) {
  const json manifest = json::parse(read_file(dir + "/manifest.json"));
  std::vector<std::pair<std::string, std::string>> texts;
  for (const auto& b : manifest.at("blocks"))
    for (const auto& s : b.at("sub_blocks"))
      for (const auto& f : s.at("files")) {
        const auto name = f.get<std::string>();
        texts.emplace_back(name, read_file(dir + "/" + name));
      }
  return build(manifest, texts, provider, opts);
}

const SubBlock& KnowledgeBase::sub_block(int block, int sub) const {
  return blocks_.at(static_cast<std::size_t>(block)).subs.at(static_cast<std::size_t>(sub));
}

KnowledgeBase KnowledgeBase::without_chunks(const std::vector<int>& ids) const {
  const std::set<int> drop(ids.begin(), ids.end());
  KnowledgeBase kb = *this;
  kb.chunks_.clear();
  std::vector<int> remap(chunks_.size(), -1);
  for (const auto& c : chunks_) {
    if (drop.contains(c.id)) continue;
    Chunk copy = c;
    copy.id = static_cast<int>(kb.chunks_.size());
    remap[static_cast<std::size_t>(c.id)] = copy.id;
    kb.chunks_.push_back(std::move(copy));
  }
  for (auto& b : kb.blocks_)
    for (auto& s : b.subs) {
      std::vector<int> kept;
      for (int id : s.chunk_ids)
        if (remap[static_cast<std::size_t>(id)] >= 0) kept.push_back(remap[static_cast<std::size_t>(id)]);
      s.chunk_ids = std::move(kept);
    }
  return kb;
}

// ---------------------------------------------------------------------------
// Routing and retrieval

std::vector<ScoredChunk> retrieve(const KnowledgeBase& kb, std::span<const double> query, int block, int sub, int k) {
  if (k < 1) throw std::invalid_argument("retrieve: k must be >= 1");
  const SubBlock& s = kb.sub_block(block, sub);
  std::vector<ScoredChunk> all;
  all.reserve(s.chunk_ids.size());
  for (int id : s.chunk_ids) {
    const auto& e = kb.chunks()[static_cast<std::size_t>(id)].embedding;
    if (e.size() != query.size()) throw DimensionError("retrieve: embedding length mismatch");
    ScoredChunk c;
    c.chunk_id = id;
    c.inner_product = std::inner_product(e.begin(), e.end(), query.begin(), 0.0);
    all.push_back(c);
  }
  std::stable_sort(all.begin(), all.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
    if (a.inner_product != b.inner_product) return a.inner_product > b.inner_product;
    return a.chunk_id < b.chunk_id;
  });
  if (all.size() > static_cast<std::size_t>(k)) all.resize(static_cast<std::size_t>(k));
  if (all.empty()) return all;
  const double top = all.front().inner_product;
  double z = 0.0;
  for (auto& c : all) z += (c.score = std::exp(c.inner_product - top));
  for (auto& c : all) c.score /= z;
  return all;
}

namespace {

int argmin(const std::vector<double>& d) {
  int best = 0;
  for (std::size_t i = 1; i < d.size(); ++i)
    if (d[i] < d[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

double gap(const std::vector<double>& d) {
  if (d.size() < 2) return std::numeric_limits<double>::infinity();
  std::vector<double> s = d;
  std::sort(s.begin(), s.end());
  return s[1] - s[0];
}

}  // namespace

double RouteResult::margin() const { return std::min(gap(block_distances), gap(sub_distances)); }

RouteResult route(std::string_view query, const KnowledgeBase& kb, const EmbeddingProvider& provider, int k) {
  if (kb.blocks().empty()) throw std::invalid_argument("route: empty knowledge base");
  const auto q = embed_checked(provider, query);
  RouteResult r;
  for (const auto& b : kb.blocks()) r.block_distances.push_back(cosine_distance(q, b.embedding));
  r.block = argmin(r.block_distances);
  for (const auto& s : kb.blocks()[static_cast<std::size_t>(r.block)].subs)
    r.sub_distances.push_back(cosine_distance(q, s.embedding));
  r.sub_block = argmin(r.sub_distances);
  r.chunks = retrieve(kb, q, r.block, r.sub_block, k);
  return r;
}

// ---------------------------------------------------------------------------
// Generation

Generation TemplateGenerator::generate(std::string_view, const KnowledgeBase& kb, const Chunk& chunk) const {
  Generation g;
  g.text = kb.sub_block(chunk.block, chunk.sub_block).fragment.dump();
  // Deterministic output: every emitted token has probability one.
  g.token_probs.assign(std::max<std::size_t>(1, whitespace_tokens(g.text).size()), 1.0);
  return g;
}

Answer generate_answer(std::string_view query, const KnowledgeBase& kb, const RouteResult& routed,
                       const Generator& generator) {
  Answer ans;
  if (routed.chunks.empty()) {
    ans.fragment = kb.sub_block(routed.block, routed.sub_block).fragment;
    ans.text = ans.fragment.dump();
    ans.note = "no chunks retrieved; fragment taken from sub-block metadata";
    return ans;
  }
  const TemplateGenerator fallback;
  std::vector<std::string> order;
  std::unordered_map<std::string, double> marginal;
  std::unordered_map<std::string, std::vector<int>> support;
  for (const auto& sc : routed.chunks) {
    const Chunk& chunk = kb.chunks()[static_cast<std::size_t>(sc.chunk_id)];
    Generation g;
    try {
      g = generator.generate(query, kb, chunk);
    } catch (const ProviderError& e) {
      g = fallback.generate(query, kb, chunk);
      if (ans.note.empty()) ans.note = std::string("generator '") + generator.name() +
                                       "' failed (" + e.what() + "); used the template generator";
    }
    double p = sc.score;
    for (double t : g.token_probs) p *= t;
    if (!marginal.contains(g.text)) order.push_back(g.text);
    marginal[g.text] += p;
    support[g.text].push_back(sc.chunk_id);
  }
  std::string best = order.front();
  for (const auto& t : order)
    if (marginal[t] > marginal[best]) best = t;
  ans.text = best;
  ans.probability = marginal[best];
  ans.provenance = support[best];
  try {
    const json j = json::parse(best);
    ans.fragment = j.is_object() ? j : json();
  } catch (const json::parse_error&) {
    ans.fragment = json();
  }
  return ans;
}

namespace {

const std::set<std::string>& aspect_fields(const std::string& block_key) {
  static const std::unordered_map<std::string, std::set<std::string>> fields = {
      {"scenario", {"scenario_kind", "M", "N_M", "geo_altitude_m", "p_max_geo_dbm"}},
      {"access_protocol", {"protocol"}},
      {"channel_model", {"channel_mode", "rician_factor", "doppler_hz", "slot_interval_s", "jakes_full_vector"}},
      {"optimization_goal", {"objective", "mu", "p_circuit_w"}},
  };
  static const std::set<std::string> none;
  const auto it = fields.find(block_key);
  return it == fields.end() ? none : it->second;
}

}  // namespace

bool fragment_consistent(const json& fragment, const std::string& block_key, const json& base, std::string* why) {
  auto fail = [why](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  if (!fragment.is_object() || fragment.empty()) return fail("fragment is not a non-empty object");
  const auto& allowed = aspect_fields(block_key);
  if (allowed.empty()) return fail("unknown aspect '" + block_key + "'");
  for (const auto& [key, value] : fragment.items())
    if (!allowed.contains(key)) return fail("field '" + key + "' does not belong to aspect '" + block_key + "'");
  json merged = base.is_object() ? base : json::object();
  merged.merge_patch(fragment);
  try {
    scenario_from_json(merged).validate();
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  return true;
}

// ---------------------------------------------------------------------------
// Retrieval rate

std::vector<EvalQuery> load_eval_corpus(const std::string& file) {
  const json j = json::parse(read_file(file));
  std::vector<EvalQuery> out;
  for (const auto& e : j.at("queries")) {
    EvalQuery q;
    q.query = e.at("query").get<std::string>();
    q.block = e.at("block").get<std::string>();
    q.sub_block = e.at("sub_block").get<std::string>();
    q.gold_file = e.at("gold_file").get<std::string>();
    q.gold_phrase = e.at("gold_phrase").get<std::string>();
    out.push_back(std::move(q));
  }
  return out;
}

double EvalOutcome::routing_accuracy() const {
  return queries == 0 ? 0.0 : static_cast<double>(routed_correctly) / static_cast<double>(queries);
}
double EvalOutcome::retrieval_rate() const {
  return queries == 0 ? 0.0 : static_cast<double>(retrieved) / static_cast<double>(queries);
}

namespace {

// Whitespace token with surrounding punctuation removed, lower-cased.
std::string bare(const std::string& tok) {
  std::size_t b = 0, e = tok.size();
  while (b < e && !std::isalnum(static_cast<unsigned char>(tok[b]))) ++b;
  while (e > b && !std::isalnum(static_cast<unsigned char>(tok[e - 1]))) --e;
  std::string out = tok.substr(b, e - b);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Token span [begin, end) of the phrase inside the source file's token stream,
// recovered from the chunks of that file. Punctuation and case are ignored.
std::pair<int, int> locate_phrase(const KnowledgeBase& kb, const std::string& file, const std::string& phrase) {
  std::vector<std::string> stream;
  for (const auto& c : kb.chunks()) {
    if (c.source != file) continue;
    const auto toks = whitespace_tokens(c.text);
    const auto end = static_cast<std::size_t>(c.token_begin) + toks.size();
    if (stream.size() < end) stream.resize(end);
    for (std::size_t i = 0; i < toks.size(); ++i) stream[static_cast<std::size_t>(c.token_begin) + i] = bare(toks[i]);
  }
  std::vector<std::string> needle;
  for (const auto& t : whitespace_tokens(phrase)) needle.push_back(bare(t));
  if (needle.empty() || stream.size() < needle.size()) return {-1, -1};
  for (std::size_t i = 0; i + needle.size() <= stream.size(); ++i)
    if (std::equal(needle.begin(), needle.end(), stream.begin() + static_cast<std::ptrdiff_t>(i)))
      return {static_cast<int>(i), static_cast<int>(i + needle.size())};
  return {-1, -1};
}

}  // namespace

EvalOutcome evaluate_corpus(const KnowledgeBase& kb, const EmbeddingProvider& provider,
                            const std::vector<EvalQuery>& corpus, int k) {
  if (corpus.empty()) throw DomainError("retrieval_rate: empty evaluation corpus");
  EvalOutcome out;
  out.queries = corpus.size();
  for (const auto& q : corpus) {
    const RouteResult r = route(q.query, kb, provider, k);
    const Block& b = kb.blocks()[static_cast<std::size_t>(r.block)];
    if (b.key == q.block && b.subs[static_cast<std::size_t>(r.sub_block)].key == q.sub_block) ++out.routed_correctly;
    const auto [lo, hi] = locate_phrase(kb, q.gold_file, q.gold_phrase);
    if (lo < 0) continue;  // gold span no longer in the knowledge base
    for (const auto& sc : r.chunks) {
      const Chunk& c = kb.chunks()[static_cast<std::size_t>(sc.chunk_id)];
      if (c.source == q.gold_file && c.token_begin < hi && lo < c.token_begin + c.token_count) {
        ++out.retrieved;
        break;
      }
    }
  }
  return out;
}

double retrieval_rate(const KnowledgeBase& kb, const EmbeddingProvider& provider, const std::vector<EvalQuery>& corpus,
                      int k) {
  return evaluate_corpus(kb, provider, corpus, k).retrieval_rate();
}

std::vector<RrCell> rr_sweep(const std::string& kb_dir, const EmbeddingProvider& provider,
                             const std::vector<EvalQuery>& corpus, const std::vector<int>& sizes,
                             const std::vector<int>& ks, int overlap) {
  std::vector<RrCell> out;
  for (int size : sizes) {
    const KnowledgeBase kb = KnowledgeBase::load(kb_dir, provider, {size, overlap});
    for (int k : ks) {
      const EvalOutcome o = evaluate_corpus(kb, provider, corpus, k);
      out.push_back({size, k, o.retrieval_rate(), o.routing_accuracy()});
    }
  }
  return out;
}

std::string default_kb_dir() {
#ifdef SATMOE_DATA_DIR
  return std::string(SATMOE_DATA_DIR) + "/kb";
#else
  return "data/kb";
#endif
}

}  // namespace satmoe::kb
