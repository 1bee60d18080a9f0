// SPDX-License-Identifier: Apache-2.0
#include "satmoe/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "satmoe/errors.hpp"

namespace satmoe::channel {

namespace {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace

double path_amplitude(const LinkGeometry& geom) {
  const double gs = db_to_linear(geom.sat_gain_dbi);
  const double gk = db_to_linear(geom.user_gain_dbi);
  const double fs = kSpeedOfLight / (4.0 * std::numbers::pi * geom.carrier_freq_hz * geom.distance_m);
  return std::sqrt(gs * gk * fs * fs);
}

CVec draw_rician(int n_antennas, double rician_factor, Rng& rng) {
  const double los = std::sqrt(rician_factor / (rician_factor + 1.0));
  const double nlos = std::sqrt(1.0 / (rician_factor + 1.0));
  CVec g(static_cast<std::size_t>(n_antennas));
  for (auto& v : g) v = los + nlos * rng.complex_normal();
  return g;
}

SmallScaleState jakes_step(const SmallScaleState& state, Rng& rng) {
  SmallScaleState next = state;
  if (state.rho == 1.0) return next;
  const double k = state.rician_factor;
  const double los = std::sqrt(k / (k + 1.0));
  const double nlos = std::sqrt(1.0 / (k + 1.0));
  const double innov = std::sqrt(1.0 - state.rho * state.rho);
  for (auto& v : next.g) {
    if (state.full_vector) {
      // e has the full Rician distribution, mean included.
      v = state.rho * v + innov * (los + nlos * rng.complex_normal());
    } else {
      const cplx diffuse = v - los;
      v = los + state.rho * diffuse + innov * nlos * rng.complex_normal();
    }
  }
  return next;
}

LinkGeometry leo_geometry(const ScenarioConfig& cfg) {
  return {cfg.carrier_freq_hz, cfg.leo_altitude_m, cfg.sat_gain_dbi, cfg.user_gain_dbi};
}

LinkGeometry geo_geometry(const ScenarioConfig& cfg) {
  return {cfg.carrier_freq_hz, cfg.geo_altitude_m, cfg.sat_gain_dbi, cfg.user_gain_dbi};
}

ChannelState assemble_channels(const ScenarioConfig& cfg, const SmallScaleSet& s) {
  const auto m = static_cast<std::size_t>(cfg.ggu_count());
  const auto k = static_cast<std::size_t>(cfg.K);
  const bool hetero = cfg.scenario_kind == ScenarioKind::heterogeneous;
  auto check = [](const std::vector<SmallScaleState>& v, std::size_t count, int len,
                  const char* what) {
    if (v.size() != count)
      throw ConfigError("expected " + std::to_string(count) + " links, got " +
                        std::to_string(v.size()), what);
    for (const auto& st : v)
      if (st.g.size() != static_cast<std::size_t>(len))
        throw ConfigError("antenna count mismatch", what);
  };
  check(s.geo_ggu, m, cfg.N_M, "channel.geo_ggu");
  check(s.geo_lgu, hetero ? k : 0, cfg.N_M, "channel.geo_lgu");
  check(s.leo_ggu, m, cfg.N_T, "channel.leo_ggu");
  check(s.leo_lgu, k, cfg.N_T, "channel.leo_lgu");

  const double a_leo = path_amplitude(leo_geometry(cfg));
  const double a_geo = path_amplitude(geo_geometry(cfg));
  auto scale = [](const std::vector<SmallScaleState>& in, double a) {
    std::vector<CVec> out;
    out.reserve(in.size());
    for (const auto& st : in) {
      CVec h = st.g;
      for (auto& v : h) v *= a;
      out.push_back(std::move(h));
    }
    return out;
  };
  ChannelState ch;
  ch.geo_ggu = scale(s.geo_ggu, a_geo);
  ch.geo_lgu = scale(s.geo_lgu, a_geo);
  ch.leo_ggu = scale(s.leo_ggu, a_leo);
  ch.leo_lgu = scale(s.leo_lgu, a_leo);
  return ch;
}

ChannelProcess::ChannelProcess(ScenarioConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

void ChannelProcess::reset(std::uint64_t seed) {
  links_.clear();
  const int m = cfg_.ggu_count();
  const int k = cfg_.K;
  const bool hetero = cfg_.scenario_kind == ScenarioKind::heterogeneous;
  const double rho = cfg_.channel_mode == ChannelMode::fixed ? 1.0 : cfg_.jakes_rho();
  auto add = [&](const char* tag, int count, int antennas) {
    for (int i = 0; i < count; ++i) {
      Rng rng(seed, tag, static_cast<std::uint64_t>(i));
      SmallScaleState st{draw_rician(antennas, cfg_.rician_factor, rng), cfg_.rician_factor, rho,
                         cfg_.jakes_full_vector};
      links_.push_back({std::move(st), std::move(rng)});
    }
  };
  add("geo_ggu", m, cfg_.N_M);
  add("geo_lgu", hetero ? k : 0, cfg_.N_M);
  add("leo_ggu", m, cfg_.N_T);
  add("leo_lgu", k, cfg_.N_T);
  rebuild();
}

void ChannelProcess::advance() {
  if (cfg_.channel_mode == ChannelMode::fixed) return;
  for (auto& link : links_) link.state = jakes_step(link.state, link.rng);
  rebuild();
}

void ChannelProcess::rebuild() {
  const auto m = static_cast<std::size_t>(cfg_.ggu_count());
  const auto k = static_cast<std::size_t>(cfg_.K);
  const bool hetero = cfg_.scenario_kind == ScenarioKind::heterogeneous;
  small_ = {};
  std::size_t idx = 0;
  auto take = [&](std::vector<SmallScaleState>& dst, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) dst.push_back(links_[idx++].state);
  };
  take(small_.geo_ggu, m);
  take(small_.geo_lgu, hetero ? k : 0);
  take(small_.leo_ggu, m);
  take(small_.leo_lgu, k);
  current_ = assemble_channels(cfg_, small_);
}

}  // namespace satmoe::channel
