// SPDX-License-Identifier: Apache-2.0
// Thin pybind11 layer. Structured values cross the boundary as JSON text;
// the Python package converts them to dicts.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "satmoe/baselines.hpp"
#include "satmoe/channel.hpp"
#include "satmoe/cli.hpp"
#include "satmoe/config.hpp"
#include "satmoe/env.hpp"
#include "satmoe/errors.hpp"
#include "satmoe/kbrouter.hpp"
#include "satmoe/moeppo.hpp"
#include "satmoe/trainer.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

json metrics_json(const satmoe::train::EpisodeMetrics& m) {
  return json{{"episode", m.episode},       {"mean_reward", m.mean_reward},
              {"sum_rate", m.sum_rate},     {"ee", m.ee},
              {"total_power", m.total_power}, {"feasibility_rate", m.feasibility_rate},
              {"gate_entropy", m.gate_entropy}, {"kl", m.kl},
              {"clip_fraction", m.clip_fraction}};
}

std::string evaluate(const std::string& scenario_json, const std::vector<double>& action, std::uint64_t seed) {
  const auto cfg = satmoe::scenario_from_json(json::parse(scenario_json));
  cfg.validate();
  satmoe::channel::ChannelProcess proc(cfg);
  proc.reset(seed);
  const auto ev = satmoe::env::evaluate_action(satmoe::beamforming::RawAction{action}, proc.current(), cfg);
  const auto& f = ev.feasibility;
  return json{{"reward", ev.reward},
              {"sum_rate", ev.sum_rate},
              {"energy_efficiency", ev.energy_efficiency},
              {"total_power", ev.total_power},
              {"feasible", f.all()},
              {"flags", {{"power", f.power}, {"common", f.common}, {"leo", f.leo}, {"geo", f.geo}}}}
      .dump();
}

std::string train(const std::string& run_config_json) {
  const auto cfg = satmoe::run_config_from_json(json::parse(run_config_json));
  satmoe::train::Trainer t(cfg);
  json rows = json::array();
  for (const auto& r : t.run()) rows.push_back(metrics_json(r));
  return rows.dump();
}

std::string bench_method(const std::string& method, const std::string& run_config_json, int eval_episodes) {
  const auto cfg = satmoe::run_config_from_json(json::parse(run_config_json));
  const auto r = satmoe::cli::run_method(satmoe::cli::parse_method(method), cfg, eval_episodes);
  json j = metrics_json(r.eval);
  j["mean_update_seconds"] = r.mean_update_seconds;
  return j.dump();
}

std::string route(const std::string& query, const std::string& kb_dir, int k, int chunk_size) {
  const satmoe::kb::StubEmbedding provider;
  const auto kb = satmoe::kb::KnowledgeBase::load(kb_dir.empty() ? satmoe::kb::default_kb_dir() : kb_dir, provider,
                                                  {chunk_size, 0});
  const auto r = satmoe::kb::route(query, kb, provider, k);
  const auto& b = kb.blocks()[static_cast<std::size_t>(r.block)];
  json chunks = json::array();
  for (const auto& c : r.chunks) chunks.push_back({{"id", c.chunk_id}, {"score", c.score}});
  return json{{"block", b.key},
              {"sub_block", b.subs[static_cast<std::size_t>(r.sub_block)].key},
              {"block_distances", r.block_distances},
              {"sub_distances", r.sub_distances},
              {"chunks", chunks}}
      .dump();
}

double retrieval_rate(const std::string& kb_dir, const std::string& corpus_file, int chunk_size, int k) {
  const satmoe::kb::StubEmbedding provider;
  const std::string dir = kb_dir.empty() ? satmoe::kb::default_kb_dir() : kb_dir;
  const auto kb = satmoe::kb::KnowledgeBase::load(dir, provider, {chunk_size, 0});
  const auto corpus = satmoe::kb::load_eval_corpus(corpus_file.empty() ? dir + "/eval_queries.json" : corpus_file);
  return satmoe::kb::retrieval_rate(kb, provider, corpus, k);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "satmoe native core";

  py::register_exception<satmoe::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<satmoe::DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<satmoe::DimensionError>(m, "DimensionError", PyExc_ValueError);

  m.def("default_run_config", [] { return satmoe::to_json(satmoe::RunConfig{}).dump(); });
  m.def("desk_scale_ppo", [] { return satmoe::to_json(satmoe::desk_scale_ppo()).dump(); });
  m.def("validate_run_config",
        [](const std::string& s) { return satmoe::to_json(satmoe::run_config_from_json(json::parse(s))).dump(); });
  m.def("evaluate_action", &evaluate, py::arg("scenario"), py::arg("action"), py::arg("seed"));
  m.def("train", &train, py::arg("run_config"), py::call_guard<py::gil_scoped_release>());
  m.def("bench_method", &bench_method, py::arg("method"), py::arg("run_config"), py::arg("eval_episodes"),
        py::call_guard<py::gil_scoped_release>());
  m.def("clipped_objective", &satmoe::moe::clipped_objective, py::arg("ratio"), py::arg("advantage"), py::arg("eps"));
  m.def("expert_assignments", &satmoe::moe::expert_assignments, py::arg("experts"), py::arg("k"));
  m.def("cosine_distance", [](const std::vector<double>& a, const std::vector<double>& b) {
    return satmoe::kb::cosine_distance(a, b);
  });
  m.def("chunk_document", &satmoe::kb::chunk_document, py::arg("text"), py::arg("chunk_size"),
        py::arg("overlap") = 0);
  m.def("stub_embed", [](const std::string& text, int dim) { return satmoe::kb::StubEmbedding(dim).embed(text); },
        py::arg("text"), py::arg("dim") = 256);
  m.def("route", &route, py::arg("query"), py::arg("kb_dir") = "", py::arg("k") = 5, py::arg("chunk_size") = 500);
  m.def("retrieval_rate", &retrieval_rate, py::arg("kb_dir") = "", py::arg("corpus") = "",
        py::arg("chunk_size") = 500, py::arg("k") = 5);
  m.def("default_kb_dir", &satmoe::kb::default_kb_dir);
}
