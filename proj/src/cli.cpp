// SPDX-License-Identifier: Apache-2.0
#include "satmoe/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "satmoe/baselines.hpp"
#include "satmoe/dialogue.hpp"
#include "satmoe/errors.hpp"
#include "satmoe/kb_clients.hpp"
#include "satmoe/kbrouter.hpp"
#include "satmoe/neural.hpp"

namespace satmoe::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Method m) {
  switch (m) {
    case Method::moe_ppo: return "moe_ppo";
    case Method::ppo: return "ppo";
    case Method::greedy: return "greedy";
    case Method::random: return "random";
  }
  return "moe_ppo";
}

Method parse_method(std::string_view s) {
  if (s == "moe_ppo" || s == "moe") return Method::moe_ppo;
  if (s == "ppo") return Method::ppo;
  if (s == "greedy") return Method::greedy;
  if (s == "random") return Method::random;
  throw ConfigError("unknown method '" + std::string(s) + "'", "method");
}

std::uint64_t evaluation_seed(std::uint64_t seed) { return derive_seed(seed, "evaluation"); }

train::EpisodeMetrics mean_of(const std::vector<train::EpisodeMetrics>& rows) {
  train::EpisodeMetrics m;
  if (rows.empty()) return m;
  for (const auto& r : rows) {
    m.mean_reward += r.mean_reward;
    m.sum_rate += r.sum_rate;
    m.ee += r.ee;
    m.total_power += r.total_power;
    m.feasibility_rate += r.feasibility_rate;
    m.gate_entropy += r.gate_entropy;
    m.kl += r.kl;
    m.clip_fraction += r.clip_fraction;
  }
  const auto n = static_cast<double>(rows.size());
  m.episode = rows.back().episode;
  m.mean_reward /= n;
  m.sum_rate /= n;
  m.ee /= n;
  m.total_power /= n;
  m.feasibility_rate /= n;
  m.gate_entropy /= n;
  m.kl /= n;
  m.clip_fraction /= n;
  return m;
}

MethodResult evaluate_trained(const moe::ActorCritic& ac, const RunConfig& cfg, int eval_episodes) {
  MethodResult r;
  r.method = ac.has_gate() ? Method::moe_ppo : Method::ppo;
  r.eval = mean_of(train::evaluate_policy(ac, cfg, eval_episodes, evaluation_seed(cfg.seed)));
  return r;
}

MethodResult run_method(Method m, const RunConfig& cfg_in, int eval_episodes) {
  RunConfig cfg = cfg_in;
  MethodResult r;
  r.method = m;
  const std::uint64_t eval_seed = evaluation_seed(cfg.seed);
  if (m == Method::greedy || m == Method::random) {
    const auto kind = m == Method::greedy ? baselines::Kind::greedy : baselines::Kind::random;
    r.eval = mean_of(baselines::run_baseline(kind, cfg.scenario, eval_seed, eval_episodes));
    return r;
  }
  if (m == Method::ppo) {
    cfg.ppo.algorithm = Algorithm::ppo;
    cfg.ppo.experts = 1;
  } else {
    cfg.ppo.algorithm = Algorithm::moe_ppo;
  }
  train::Trainer t(cfg);
  const auto rows = t.run();
  r.train_tail = train::tail_average(rows);
  r.eval = mean_of(train::evaluate_policy(t.model(), cfg, eval_episodes, eval_seed));
  const auto& secs = t.update_seconds();
  r.updates = static_cast<int>(secs.size());
  if (!secs.empty()) r.mean_update_seconds = std::accumulate(secs.begin(), secs.end(), 0.0) / secs.size();
  return r;
}

namespace {

json metrics_json(const train::EpisodeMetrics& m) {
  return json{{"mean_reward", m.mean_reward},   {"sum_rate", m.sum_rate},
              {"ee", m.ee},                     {"total_power", m.total_power},
              {"feasibility_rate", m.feasibility_rate}, {"gate_entropy", m.gate_entropy},
              {"kl", m.kl},                     {"clip_fraction", m.clip_fraction}};
}

void write_checkpoints(const moe::ActorCritic& ac, const fs::path& dir) {
  fs::create_directories(dir);
  nn::save_checkpoint(ac.to_json(), (dir / "actor_critic.json").string());
  for (int i = 0; i < ac.expert_count(); ++i)
    nn::save_checkpoint(ac.experts()[static_cast<std::size_t>(i)].to_json(),
                        (dir / ("expert_" + std::to_string(i) + ".json")).string());
  if (ac.gate()) nn::save_checkpoint(ac.gate()->to_json(), (dir / "gate.json").string());
  nn::save_checkpoint(ac.critic().to_json(), (dir / "critic.json").string());
}

}  // namespace

TrainOutcome train_to_directory(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  save_json(to_json(cfg), (dir / "config.json").string());

  TrainOutcome outcome;
  std::ofstream csv(dir / "metrics.csv");
  if (!csv) throw std::runtime_error("cannot write " + (dir / "metrics.csv").string());
  csv << train::metrics_csv_header() << '\n';
  std::vector<train::EpisodeMetrics> rows;
  train::Trainer trainer(cfg);
  const int every = std::max(1, cfg.episodes / 10);
  try {
    trainer.run([&](const train::EpisodeMetrics& m) {
      train::write_metrics_csv_row(csv, m);
      rows.push_back(m);
      if ((m.episode + 1) % every == 0)
        log << "episode " << m.episode + 1 << "/" << cfg.episodes << "  reward " << m.mean_reward << "  feasible "
            << m.feasibility_rate << '\n';
    });
  } catch (const NumericalError& e) {
    outcome.aborted = true;
    outcome.error = e.what();
    log << "training aborted: " << e.what() << '\n';
  }
  csv.flush();
  outcome.episodes_completed = static_cast<int>(rows.size());

  json summary;
  summary["status"] = outcome.aborted ? "aborted" : "completed";
  if (outcome.aborted) summary["error"] = outcome.error;
  summary["algorithm"] = std::string(to_string(cfg.ppo.algorithm));
  summary["experts"] = cfg.ppo.experts;
  summary["seed"] = cfg.seed;
  summary["episodes_requested"] = cfg.episodes;
  summary["episodes_completed"] = outcome.episodes_completed;
  summary["final"] = metrics_json(train::tail_average(rows));
  const auto& secs = trainer.update_seconds();
  summary["updates"] = secs.size();
  summary["mean_update_seconds"] =
      secs.empty() ? 0.0 : std::accumulate(secs.begin(), secs.end(), 0.0) / static_cast<double>(secs.size());
  if (!outcome.aborted && cfg.eval_episodes > 0) {
    const auto ev = train::evaluate_policy(trainer.model(), cfg, cfg.eval_episodes, evaluation_seed(cfg.seed));
    summary["evaluation"] = metrics_json(mean_of(ev));
    summary["evaluation"]["episodes"] = cfg.eval_episodes;
  }
  save_json(summary, (dir / "summary.json").string());
  if (cfg.write_checkpoints) write_checkpoints(trainer.model(), dir / "checkpoints");
  return outcome;
}

// ---------------------------------------------------------------------------
// Command line

namespace {

struct CommonRunFlags {
  std::string config;
  std::string preset;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int experts = 0;
  std::string algorithm;
  std::string protocol;
  std::string objective;
  std::string scenario;
  std::string channel;
  int episodes = -1;
  int nt = 0;
  int k = 0;
  std::string out;
};

void add_run_flags(CLI::App* app, CommonRunFlags& f) {
  app->add_option("--config", f.config, "RunConfig JSON file");
  app->add_option("--preset", f.preset, "PPO hyperparameter preset when no config file is given (desk|table)")
      ->check(CLI::IsMember({"desk", "table"}));
  app->add_option("--seed", f.seed, "Master seed")->each([&f](const std::string&) { f.seed_set = true; });
  app->add_option("--experts", f.experts, "Number of experts I");
  app->add_option("--algorithm", f.algorithm, "moe_ppo or ppo");
  app->add_option("--protocol", f.protocol, "rsma or sdma");
  app->add_option("--objective", f.objective, "se, ee or power");
  app->add_option("--scenario", f.scenario, "homogeneous or heterogeneous");
  app->add_option("--channel", f.channel, "fixed or time_varying");
  app->add_option("--episodes", f.episodes, "Training episodes");
  app->add_option("--nt", f.nt, "LEO antenna count N_T");
  app->add_option("--k", f.k, "LEO user count K");
  app->add_option("--out", f.out, "Output directory");
}

RunConfig build_run_config(const CommonRunFlags& f) {
  RunConfig cfg;
  if (!f.config.empty()) {
    cfg = load_run_config(f.config);
    if (f.preset == "desk") cfg.ppo = desk_scale_ppo();
  } else if (f.preset != "table") {
    cfg.ppo = desk_scale_ppo();
  }
  if (f.seed_set) cfg.seed = f.seed;
  if (!f.algorithm.empty()) cfg.ppo.algorithm = parse_algorithm(f.algorithm);
  if (f.experts > 0) cfg.ppo.experts = f.experts;
  if (cfg.ppo.algorithm == Algorithm::ppo) cfg.ppo.experts = 1;
  if (!f.protocol.empty()) cfg.scenario.protocol = parse_protocol(f.protocol);
  if (!f.objective.empty()) cfg.scenario.objective = parse_objective(f.objective);
  if (!f.scenario.empty()) {
    cfg.scenario.scenario_kind = parse_scenario_kind(f.scenario);
    if (cfg.scenario.scenario_kind == ScenarioKind::homogeneous) cfg.scenario.M = 0;
  }
  if (!f.channel.empty()) cfg.scenario.channel_mode = parse_channel_mode(f.channel);
  if (f.episodes >= 0) cfg.episodes = f.episodes;
  if (f.nt > 0) cfg.scenario.N_T = f.nt;
  if (f.k > 0) cfg.scenario.K = f.k;
  if (!f.out.empty()) cfg.out_dir = f.out;
  cfg.validate();
  return cfg;
}

std::unique_ptr<moe::ActorCritic> load_trained(const std::string& run_dir, RunConfig* cfg_out) {
  const fs::path dir(run_dir);
  const fs::path cfg_file = dir / "config.json";
  const fs::path ckpt = dir / "checkpoints" / "actor_critic.json";
  if (!fs::exists(cfg_file)) throw std::runtime_error("missing run config: " + cfg_file.string());
  if (!fs::exists(ckpt)) throw std::runtime_error("missing checkpoint: " + ckpt.string());
  RunConfig cfg = load_run_config(cfg_file.string());
  auto ac = std::make_unique<moe::ActorCritic>(cfg.scenario, cfg.ppo, cfg.seed);
  ac->load_json(nn::load_checkpoint(ckpt.string()));
  if (cfg_out) *cfg_out = cfg;
  return ac;
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(prec) << v;
  return ss.str();
}

int cmd_train(const CommonRunFlags& f, std::ostream& out) {
  const RunConfig cfg = build_run_config(f);
  const TrainOutcome o = train_to_directory(cfg, out);
  out << "wrote " << cfg.out_dir << " (" << o.episodes_completed << "/" << cfg.episodes << " episodes)\n";
  return o.aborted ? 3 : 0;
}

int cmd_eval(const std::string& run_dir, int episodes, std::ostream& out) {
  RunConfig cfg;
  const auto ac = load_trained(run_dir, &cfg);
  const MethodResult r = evaluate_trained(*ac, cfg, episodes);
  out << "method " << to_string(r.method) << "  episodes " << episodes << "  mean_reward " << fmt(r.eval.mean_reward)
      << "  sum_rate " << fmt(r.eval.sum_rate) << "  ee " << fmt(r.eval.ee) << "  feasibility "
      << fmt(r.eval.feasibility_rate) << '\n';
  return 0;
}

struct BenchFlags {
  std::vector<std::string> methods{"moe_ppo", "ppo", "greedy", "random"};
  std::vector<std::uint64_t> seeds{1};
  std::vector<int> nts;
  std::vector<int> ks;
  std::vector<std::string> protocols;
  std::vector<std::string> objectives;
  int eval_episodes = 20;
  std::string moe_checkpoint;
  std::string ppo_checkpoint;
};

int cmd_bench(const CommonRunFlags& f, const BenchFlags& b, std::ostream& out) {
  const RunConfig base = build_run_config(f);
  std::vector<Method> methods;
  for (const auto& m : b.methods) methods.push_back(parse_method(m));
  std::unique_ptr<moe::ActorCritic> moe_model, ppo_model;
  RunConfig moe_cfg, ppo_cfg;
  if (!b.moe_checkpoint.empty()) moe_model = load_trained(b.moe_checkpoint, &moe_cfg);
  if (!b.ppo_checkpoint.empty()) ppo_model = load_trained(b.ppo_checkpoint, &ppo_cfg);

  const std::vector<int> nts = b.nts.empty() ? std::vector<int>{base.scenario.N_T} : b.nts;
  const std::vector<int> ks = b.ks.empty() ? std::vector<int>{base.scenario.K} : b.ks;
  const std::vector<std::string> protos =
      b.protocols.empty() ? std::vector<std::string>{std::string(to_string(base.scenario.protocol))} : b.protocols;
  const std::vector<std::string> objs =
      b.objectives.empty() ? std::vector<std::string>{std::string(to_string(base.scenario.objective))} : b.objectives;

  const fs::path dir(base.out_dir);
  fs::create_directories(dir);
  std::ofstream csv(dir / "bench.csv");
  csv << "seed,protocol,objective,K,N_T,method,mean_reward,sum_rate,ee,total_power,feasibility_rate,"
         "mean_update_seconds\n";
  csv << std::setprecision(17);
  for (std::uint64_t seed : b.seeds)
    for (const auto& proto : protos)
      for (const auto& obj : objs)
        for (int k : ks)
          for (int nt : nts) {
            RunConfig cfg = base;
            cfg.seed = seed;
            cfg.scenario.protocol = parse_protocol(proto);
            cfg.scenario.objective = parse_objective(obj);
            cfg.scenario.K = k;
            cfg.scenario.N_T = nt;
            cfg.validate();
            std::vector<MethodResult> results;
            for (Method m : methods) {
              const moe::ActorCritic* fixed = m == Method::moe_ppo ? moe_model.get()
                                              : m == Method::ppo   ? ppo_model.get()
                                                                   : nullptr;
              MethodResult r;
              if (fixed) {
                RunConfig ecfg = cfg;
                ecfg.ppo = m == Method::moe_ppo ? moe_cfg.ppo : ppo_cfg.ppo;
                r = evaluate_trained(*fixed, ecfg, b.eval_episodes);
                r.method = m;
              } else {
                r = run_method(m, cfg, b.eval_episodes);
              }
              results.push_back(r);
              csv << seed << ',' << proto << ',' << to_string(cfg.scenario.objective) << ',' << k << ',' << nt << ','
                  << to_string(m) << ',' << r.eval.mean_reward << ',' << r.eval.sum_rate << ',' << r.eval.ee << ','
                  << r.eval.total_power << ',' << r.eval.feasibility_rate << ',' << r.mean_update_seconds << '\n';
            }
            std::vector<std::size_t> order(results.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
              return results[a].eval.mean_reward > results[c].eval.mean_reward;
            });
            out << "seed " << seed << "  " << proto << "  " << to_string(cfg.scenario.objective) << "  K=" << k
                << "  N_T=" << nt << '\n';
            int rank = 1;
            for (std::size_t i : order)
              out << "  " << rank++ << ". " << std::left << std::setw(8) << to_string(results[i].method) << std::right
                  << "  reward " << fmt(results[i].eval.mean_reward) << "  sum_rate " << fmt(results[i].eval.sum_rate)
                  << "  feasible " << fmt(results[i].eval.feasibility_rate, 3) << '\n';
          }
  out << "wrote " << (dir / "bench.csv").string() << '\n';
  return 0;
}

struct KbFlags {
  std::string kb = kb::default_kb_dir();
  std::string provider = "stub";
  int k = 5;
  int chunk_size = 500;
  int overlap = 0;
};

void add_kb_flags(CLI::App* app, KbFlags& f) {
  app->add_option("--kb", f.kb, "Knowledge-base directory");
  app->add_option("--provider", f.provider, "Embedding/generation provider")->check(CLI::IsMember({"stub", "external"}));
  app->add_option("--top-k", f.k, "Chunks retrieved per query");
  app->add_option("--chunk-size", f.chunk_size, "Chunk size in tokens");
  app->add_option("--overlap", f.overlap, "Chunk overlap in tokens");
}

int cmd_route(const KbFlags& f, const std::string& query, bool as_json, std::ostream& out) {
  const auto provider = kb::make_embedding_provider(f.provider);
  const auto base = kb::KnowledgeBase::load(f.kb, *provider, {f.chunk_size, f.overlap});
  const kb::RouteResult r = kb::route(query, base, *provider, f.k);
  const auto& blk = base.blocks()[static_cast<std::size_t>(r.block)];
  const auto& sub = blk.subs[static_cast<std::size_t>(r.sub_block)];
  if (as_json) {
    json j{{"block", blk.key},
           {"sub_block", sub.key},
           {"block_distances", r.block_distances},
           {"sub_distances", r.sub_distances},
           {"block_distance", r.block_distances[static_cast<std::size_t>(r.block)]},
           {"sub_distance", r.sub_distances[static_cast<std::size_t>(r.sub_block)]}};
    j["chunks"] = json::array();
    for (const auto& c : r.chunks) {
      const auto& ch = base.chunks()[static_cast<std::size_t>(c.chunk_id)];
      j["chunks"].push_back({{"id", c.chunk_id}, {"source", ch.source}, {"score", c.score}});
    }
    out << j.dump(2) << '\n';
    return 0;
  }
  out << "layer 1: " << blk.key << "  distance " << fmt(r.block_distances[static_cast<std::size_t>(r.block)], 6)
      << '\n';
  for (std::size_t i = 0; i < base.blocks().size(); ++i)
    out << "    " << base.blocks()[i].key << "  " << fmt(r.block_distances[i], 6) << '\n';
  out << "layer 2: " << sub.key << "  distance " << fmt(r.sub_distances[static_cast<std::size_t>(r.sub_block)], 6)
      << '\n';
  for (const auto& c : r.chunks) {
    const auto& ch = base.chunks()[static_cast<std::size_t>(c.chunk_id)];
    out << "  chunk " << c.chunk_id << "  " << ch.source << " [" << ch.token_begin << ", "
        << ch.token_begin + ch.token_count << ")  score " << fmt(c.score) << '\n';
  }
  return 0;
}

int cmd_rr(const KbFlags& f, const std::string& corpus_file, const std::vector<int>& sizes,
           const std::vector<int>& ks, const std::string& csv_file, std::ostream& out) {
  const auto provider = kb::make_embedding_provider(f.provider);
  const auto corpus = kb::load_eval_corpus(corpus_file);
  const auto grid = kb::rr_sweep(f.kb, *provider, corpus, sizes, ks, f.overlap);
  std::ostringstream body;
  body << "chunk_size,k,rr,routing_accuracy\n" << std::setprecision(17);
  for (const auto& c : grid) body << c.chunk_size << ',' << c.k << ',' << c.rr << ',' << c.routing_accuracy << '\n';
  if (!csv_file.empty()) {
    if (const auto parent = fs::path(csv_file).parent_path(); !parent.empty()) fs::create_directories(parent);
    std::ofstream(csv_file) << body.str();
  }
  out << "chunk_size   k   RR      routing\n";
  for (const auto& c : grid)
    out << std::setw(10) << c.chunk_size << std::setw(4) << c.k << "   " << fmt(c.rr, 3) << "   "
        << fmt(c.routing_accuracy, 3) << '\n';
  return 0;
}

int cmd_configure(const KbFlags& f, const std::string& script, const std::string& out_file, double gap,
                  std::istream& in, std::ostream& out) {
  const auto provider = kb::make_embedding_provider(f.provider);
  const auto generator = kb::make_generator(f.provider);
  const auto base = kb::KnowledgeBase::load(f.kb, *provider, {f.chunk_size, f.overlap});
  dialogue::ConfigureSession session(base, *provider, *generator, ScenarioConfig{}, gap, f.k);
  std::ifstream script_in;
  std::istream* src = &in;
  if (!script.empty()) {
    script_in.open(script);
    if (!script_in) throw std::runtime_error("cannot read script '" + script + "'");
    src = &script_in;
  }
  std::string line;
  out << "describe the network; 'done' finishes\n";
  while (std::getline(*src, line)) {
    if (line == "done" || line == "quit" || line == "exit") break;
    const auto t = session.handle(line);
    out << "> " << line << '\n' << t.reply << '\n';
    if (!t.note.empty()) out << "  note: " << t.note << '\n';
  }
  if (!session.complete()) {
    std::string miss;
    for (const auto& m : session.missing_aspects()) miss += (miss.empty() ? "" : ", ") + m;
    out << "configuration incomplete; missing: " << miss << '\n';
    return 1;
  }
  RunConfig cfg;
  cfg.ppo = desk_scale_ppo();
  cfg.scenario = session.config();
  cfg.validate();
  if (const auto parent = fs::path(out_file).parent_path(); !parent.empty()) fs::create_directories(parent);
  save_json(to_json(cfg), out_file);
  out << "wrote " << out_file << '\n';
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"satmoe: LEO/GEO downlink resource allocation with MoE-PPO and a retrieval-based configurator"};
  app.require_subcommand(1);

  CommonRunFlags train_flags;
  auto* train = app.add_subcommand("train", "Train MoE-PPO or PPO and write metrics, summary and checkpoints");
  add_run_flags(train, train_flags);

  CommonRunFlags bench_flags;
  BenchFlags bench_opts;
  auto* bench = app.add_subcommand("bench", "Compare MoE-PPO, PPO, greedy and random on shared channel traces");
  add_run_flags(bench, bench_flags);
  bench->add_option("--methods", bench_opts.methods, "Methods to compare")->delimiter(',');
  bench->add_option("--seeds", bench_opts.seeds, "Seeds")->delimiter(',');
  bench->add_option("--nt-sweep", bench_opts.nts, "LEO antenna counts")->delimiter(',');
  bench->add_option("--k-sweep", bench_opts.ks, "LEO user counts")->delimiter(',');
  bench->add_option("--protocols", bench_opts.protocols, "Protocols")->delimiter(',');
  bench->add_option("--objectives", bench_opts.objectives, "Objectives")->delimiter(',');
  bench->add_option("--eval-episodes", bench_opts.eval_episodes, "Held-out evaluation episodes");
  bench->add_option("--moe-checkpoint", bench_opts.moe_checkpoint, "Trained MoE-PPO run directory");
  bench->add_option("--ppo-checkpoint", bench_opts.ppo_checkpoint, "Trained PPO run directory");

  std::string eval_run;
  int eval_episodes = 20;
  auto* eval = app.add_subcommand("eval", "Evaluate a trained run on held-out episodes");
  eval->add_option("--run", eval_run, "Run directory written by train")->required();
  eval->add_option("--episodes", eval_episodes, "Evaluation episodes");

  KbFlags cfg_kb;
  std::string script, cfg_out = "configured.json";
  double gap = 0.02;
  auto* configure = app.add_subcommand("configure", "Build a scenario config through a turn-based dialogue");
  add_kb_flags(configure, cfg_kb);
  configure->add_option("--script", script, "Read turns from a file instead of stdin");
  configure->add_option("--out", cfg_out, "Config file to write");
  configure->add_option("--gap", gap, "Distance gap below which the router asks for clarification");

  KbFlags route_kb;
  std::string query;
  bool as_json = false;
  auto* routec = app.add_subcommand("route", "Route one query and show the retrieved chunks");
  add_kb_flags(routec, route_kb);
  routec->add_option("--query", query, "Query text")->required();
  routec->add_flag("--json", as_json, "Machine-readable output");

  KbFlags rr_kb;
  std::string corpus = kb::default_kb_dir() + "/eval_queries.json", rr_csv;
  std::vector<int> sizes{100, 500, 2000}, ks{1, 5, 20};
  auto* rr = app.add_subcommand("rr", "Retrieval-rate sweep over chunk size and top-k");
  add_kb_flags(rr, rr_kb);
  rr->add_option("--corpus", corpus, "Evaluation queries");
  rr->add_option("--sizes", sizes, "Chunk sizes")->delimiter(',');
  rr->add_option("--ks", ks, "Top-k values")->delimiter(',');
  rr->add_option("--csv", rr_csv, "CSV output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*train) return cmd_train(train_flags, out);
    if (*bench) return cmd_bench(bench_flags, bench_opts, out);
    if (*eval) return cmd_eval(eval_run, eval_episodes, out);
    if (*configure) return cmd_configure(cfg_kb, script, cfg_out, gap, in, out);
    if (*routec) return cmd_route(route_kb, query, as_json, out);
    if (*rr) return cmd_rr(rr_kb, corpus, sizes, ks, rr_csv, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const kb::ProviderError& e) {
    err << "provider error" << (e.retryable() ? " (retryable)" : "") << ": " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace satmoe::cli
