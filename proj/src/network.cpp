// SPDX-License-Identifier: Apache-2.0
#include "satmoe/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "satmoe/errors.hpp"

namespace satmoe::network {

namespace {

double gain(const CVec& h, const CVec& w) { return std::norm(hermitian_inner(h, w)); }

void check_dims(const ChannelState& ch, const BeamSolution& sol, const ScenarioConfig& cfg) {
  const auto k = static_cast<std::size_t>(cfg.K);
  const auto m = static_cast<std::size_t>(cfg.ggu_count());
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError("dimension mismatch", what);
  };
  require(ch.leo_lgu.size() == k, "channel.leo_lgu");
  require(ch.leo_ggu.size() == m, "channel.leo_ggu");
  require(ch.geo_ggu.size() == m, "channel.geo_ggu");
  require(m == 0 ? ch.geo_lgu.size() <= k : ch.geo_lgu.size() == k, "channel.geo_lgu");
  require(sol.w_private.size() == k, "solution.w_private");
  require(sol.w_geo.size() == m, "solution.w_geo");
  for (const auto& w : sol.w_private) require(w.size() == static_cast<std::size_t>(cfg.N_T), "solution.w_private");
  if (sol.w_common) require(sol.w_common->size() == static_cast<std::size_t>(cfg.N_T), "solution.w_common");
  if (sol.c_common) require(sol.c_common->size() == k, "solution.c_common");
}

// Interference at GGU m from the GEO beams of the other GGUs and every LEO beam.
double ggu_interference(const ChannelState& ch, const BeamSolution& sol, std::size_t m) {
  double acc = 0.0;
  for (std::size_t j = 0; j < sol.w_geo.size(); ++j)
    if (j != m) acc += gain(ch.geo_ggu[m], sol.w_geo[j]);
  for (const auto& w : sol.w_private) acc += gain(ch.leo_ggu[m], w);
  if (sol.w_common) acc += gain(ch.leo_ggu[m], *sol.w_common);
  return acc;
}

double geo_leak_to_lgu(const ChannelState& ch, const BeamSolution& sol, std::size_t k) {
  double acc = 0.0;
  if (ch.geo_lgu.empty()) return acc;
  for (const auto& w : sol.w_geo) acc += gain(ch.geo_lgu[k], w);
  return acc;
}

}  // namespace

std::vector<CVec> geo_beams(const ChannelState& ch, const ScenarioConfig& cfg) {
  std::vector<CVec> beams;
  const auto m = ch.geo_ggu.size();
  if (m == 0) return beams;
  const double amp = std::sqrt(cfg.p_max_geo_w() / static_cast<double>(m));
  std::vector<CVec> dirs;
  if (cfg.geo_precoder == GeoPrecoder::zf) {
    const CMat v = right_pseudo_inverse(CMat::from_hermitian_rows(ch.geo_ggu));
    for (std::size_t j = 0; j < m; ++j) dirs.push_back(v.column(j));
  } else {
    dirs = ch.geo_ggu;
  }
  for (auto& d : dirs) {
    const double n = std::sqrt(norm2(d));
    for (auto& x : d) x = n > 0.0 ? amp * x / n : cplx{0.0, 0.0};
    beams.push_back(std::move(d));
  }
  return beams;
}

SinrReport sinr_sdma(const ChannelState& ch, const BeamSolution& sol, const ScenarioConfig& cfg) {
  check_dims(ch, sol, cfg);
  const double na = cfg.noise_ggu_w();
  const double nb = cfg.noise_lgu_w();
  SinrReport out;
  for (std::size_t m = 0; m < sol.w_geo.size(); ++m) {
    double interf = 0.0;
    for (std::size_t j = 0; j < sol.w_geo.size(); ++j)
      if (j != m) interf += gain(ch.geo_ggu[m], sol.w_geo[j]);
    for (const auto& w : sol.w_private) interf += gain(ch.leo_ggu[m], w);
    out.ggu.push_back(gain(ch.geo_ggu[m], sol.w_geo[m]) / (interf + na));
  }
  for (std::size_t k = 0; k < sol.w_private.size(); ++k) {
    double interf = geo_leak_to_lgu(ch, sol, k);
    for (std::size_t j = 0; j < sol.w_private.size(); ++j)
      if (j != k) interf += gain(ch.leo_lgu[k], sol.w_private[j]);
    out.lgu_private.push_back(gain(ch.leo_lgu[k], sol.w_private[k]) / (interf + nb));
  }
  return out;
}

SinrReport sinr_rsma(const ChannelState& ch, const BeamSolution& sol, const ScenarioConfig& cfg) {
  check_dims(ch, sol, cfg);
  if (!sol.w_common) throw ConfigError("RSMA solution requires a common beam", "solution.w_common");
  const double na = cfg.noise_ggu_w();
  const double nb = cfg.noise_lgu_w();
  SinrReport out;
  for (std::size_t m = 0; m < sol.w_geo.size(); ++m)
    out.ggu.push_back(gain(ch.geo_ggu[m], sol.w_geo[m]) / (ggu_interference(ch, sol, m) + na));
  for (std::size_t k = 0; k < sol.w_private.size(); ++k) {
    const double geo = geo_leak_to_lgu(ch, sol, k);
    double all_private = 0.0;
    double other_private = 0.0;
    for (std::size_t j = 0; j < sol.w_private.size(); ++j) {
      const double g = gain(ch.leo_lgu[k], sol.w_private[j]);
      all_private += g;
      if (j != k) other_private += g;
    }
    out.lgu_common.push_back(gain(ch.leo_lgu[k], *sol.w_common) / (all_private + geo + nb));
    out.lgu_private.push_back(gain(ch.leo_lgu[k], sol.w_private[k]) / (other_private + geo + nb));
  }
  return out;
}

SinrReport sinr(const ChannelState& ch, const BeamSolution& sol, const ScenarioConfig& cfg) {
  return sol.is_rsma() ? sinr_rsma(ch, sol, cfg) : sinr_sdma(ch, sol, cfg);
}

RateReport rates(const SinrReport& s) {
  auto log_rates = [](const std::vector<double>& v) {
    std::vector<double> r;
    r.reserve(v.size());
    for (double g : v) r.push_back(std::log2(1.0 + g));
    return r;
  };
  RateReport r{log_rates(s.ggu), log_rates(s.lgu_common), log_rates(s.lgu_private), 0.0};
  if (!r.lgu_common.empty()) r.common_cap = *std::min_element(r.lgu_common.begin(), r.lgu_common.end());
  return r;
}

std::vector<double> lgu_rates(const BeamSolution& sol, const RateReport& r) {
  std::vector<double> out = r.lgu_private;
  if (sol.c_common)
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += (*sol.c_common)[k];
  return out;
}

double sum_rate_leo(const BeamSolution& sol, const RateReport& r) {
  double acc = 0.0;
  for (double v : lgu_rates(sol, r)) acc += v;
  return acc;
}

double radiated_power(const BeamSolution& sol) {
  double p = sol.w_common ? norm2(*sol.w_common) : 0.0;
  for (const auto& w : sol.w_private) p += norm2(w);
  return p;
}

double total_power(const BeamSolution& sol, const ScenarioConfig& cfg) {
  return cfg.mu * radiated_power(sol) + cfg.p_circuit_w;
}

double energy_efficiency(const BeamSolution& sol, const RateReport& r, const ScenarioConfig& cfg) {
  return sum_rate_leo(sol, r) / total_power(sol, cfg);
}

FeasibilityReport check_constraints(const BeamSolution& sol, const RateReport& r,
                                    const ScenarioConfig& cfg) {
  FeasibilityReport f;
  f.power = radiated_power(sol) <= cfg.p_max_leo_w();
  if (sol.c_common) {
    double sum_c = 0.0;
    f.nonnegative = true;
    for (double c : *sol.c_common) {
      sum_c += c;
      f.nonnegative = f.nonnegative && c >= 0.0;
    }
    f.common = sum_c <= r.common_cap;
  } else {
    f.common = true;
    f.nonnegative = true;
  }
  f.leo = true;
  for (double v : lgu_rates(sol, r)) f.leo = f.leo && v >= cfg.xi_lgu;
  f.geo = true;
  for (double v : r.ggu) f.geo = f.geo && v >= cfg.xi_ggu;
  return f;
}

FeasibilityReport check_constraints(const BeamSolution& sol, const ChannelState& ch,
                                    const ScenarioConfig& cfg) {
  return check_constraints(sol, rates(sinr(ch, sol, cfg)), cfg);
}

}  // namespace satmoe::network
