// SPDX-License-Identifier: Apache-2.0
// Independent reference computations shared by the unit and acceptance tests.
// Everything here is written with scalar loops and std::complex only, so it
// does not share code paths with the library under test.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "satmoe/channel.hpp"
#include "satmoe/config.hpp"
#include "satmoe/network.hpp"
#include "satmoe/rng.hpp"

namespace oracle {

using cx = std::complex<double>;
using vec = std::vector<cx>;

// |h^H w|^2 written out term by term.
inline double gain(const vec& h, const vec& w) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    // conj(h) * w
    re += h[i].real() * w[i].real() + h[i].imag() * w[i].imag();
    im += h[i].real() * w[i].imag() - h[i].imag() * w[i].real();
  }
  return re * re + im * im;
}

inline double sq(const vec& w) {
  double s = 0.0;
  for (const auto& x : w) s += x.real() * x.real() + x.imag() * x.imag();
  return s;
}

struct Physics {
  std::vector<double> ggu, lgu_common, lgu_private;
  std::vector<double> r_ggu, r_common, r_private;
  double cap = 0.0;
  double sum_rate = 0.0;
  double radiated = 0.0;
  double total_power = 0.0;
  double ee = 0.0;
  bool power = false, common = false, leo = false, geo = false;
  double reward_sum_rate = 0.0, reward_ee = 0.0, reward_power = 0.0;
};

// Enumerates every signal and interference term of the downlink model.
inline Physics physics(const satmoe::channel::ChannelState& ch, const satmoe::network::BeamSolution& sol,
                       const satmoe::ScenarioConfig& cfg) {
  Physics p;
  const std::size_t K = ch.leo_lgu.size(), M = ch.geo_ggu.size();
  const bool rsma = sol.w_common.has_value();
  const double na = std::pow(10.0, (cfg.noise_ggu_dbm - 30.0) / 10.0) * cfg.noise_bandwidth_hz;
  const double nb = std::pow(10.0, (cfg.noise_lgu_dbm - 30.0) / 10.0) * cfg.noise_bandwidth_hz;
  for (std::size_t m = 0; m < M; ++m) {
    double intf = na;
    for (std::size_t m2 = 0; m2 < M; ++m2)
      if (m2 != m) intf += gain(ch.geo_ggu[m], sol.w_geo[m2]);
    for (std::size_t k = 0; k < K; ++k) intf += gain(ch.leo_ggu[m], sol.w_private[k]);
    if (rsma) intf += gain(ch.leo_ggu[m], *sol.w_common);
    p.ggu.push_back(gain(ch.geo_ggu[m], sol.w_geo[m]) / intf);
  }
  for (std::size_t k = 0; k < K; ++k) {
    double geo_leak = 0.0;
    if (!ch.geo_lgu.empty())
      for (std::size_t m = 0; m < M; ++m) geo_leak += gain(ch.geo_lgu[k], sol.w_geo[m]);
    double others = 0.0, all = 0.0;
    for (std::size_t k2 = 0; k2 < K; ++k2) {
      const double g = gain(ch.leo_lgu[k], sol.w_private[k2]);
      all += g;
      if (k2 != k) others += g;
    }
    p.lgu_private.push_back(gain(ch.leo_lgu[k], sol.w_private[k]) / (others + geo_leak + nb));
    if (rsma) p.lgu_common.push_back(gain(ch.leo_lgu[k], *sol.w_common) / (all + geo_leak + nb));
  }
  for (double g : p.ggu) p.r_ggu.push_back(std::log2(1.0 + g));
  for (double g : p.lgu_private) p.r_private.push_back(std::log2(1.0 + g));
  for (double g : p.lgu_common) p.r_common.push_back(std::log2(1.0 + g));
  if (rsma) {
    p.cap = p.r_common.empty() ? 0.0 : p.r_common[0];
    for (double r : p.r_common) p.cap = std::min(p.cap, r);
  }

  p.radiated = rsma ? sq(*sol.w_common) : 0.0;
  for (const auto& w : sol.w_private) p.radiated += sq(w);
  p.total_power = cfg.mu * p.radiated + cfg.p_circuit_w;

  p.leo = true;
  double csum = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double ck = rsma ? (*sol.c_common)[k] : 0.0;
    csum += ck;
    const double rk = ck + p.r_private[k];
    p.sum_rate += rk;
    if (!(rk >= cfg.xi_lgu)) p.leo = false;
  }
  p.common = !rsma || csum <= p.cap;
  p.power = p.radiated <= std::pow(10.0, (cfg.p_max_leo_dbm - 30.0) / 10.0);
  p.geo = true;
  for (double r : p.r_ggu)
    if (!(r >= cfg.xi_ggu)) p.geo = false;
  p.ee = p.sum_rate / p.total_power;
  const double gate = (p.power && p.common && p.leo && p.geo) ? 1.0 : 0.0;
  p.reward_sum_rate = gate * p.sum_rate;
  p.reward_ee = gate * p.ee;
  p.reward_power = gate / p.total_power;
  return p;
}

// Lag-1 autocorrelation of the diffuse part and mean power of an ensemble of
// Jakes chains. Chains start from the stationary distribution.
struct JakesStats {
  double lag1 = 0.0;           // Re sum conj(d_t) d_{t+1} / sum |d_t|^2
  double power_first = 0.0;    // mean |g|^2 over the first window
  double power_last = 0.0;     // mean |g|^2 over the last window
  double power_all = 0.0;      // mean |g|^2 over every step
};

inline JakesStats jakes_statistics(int chains, int antennas, long steps, double kappa, double rho,
                                   std::uint64_t seed) {
  const double los = std::sqrt(kappa / (kappa + 1.0));
  const long window = std::max(1L, steps / 10);
  double num = 0.0, den = 0.0, first = 0.0, last = 0.0, all = 0.0;
  long n_first = 0, n_last = 0, n_all = 0;
  for (int c = 0; c < chains; ++c) {
    satmoe::Rng rng(seed, "jakes-chain", static_cast<std::uint64_t>(c));
    satmoe::channel::SmallScaleState st{satmoe::channel::draw_rician(antennas, kappa, rng), kappa, rho, false};
    for (long t = 0; t < steps; ++t) {
      const auto next = satmoe::channel::jakes_step(st, rng);
      for (int a = 0; a < antennas; ++a) {
        const cx d0 = st.g[a] - los, d1 = next.g[a] - los;
        num += (std::conj(d0) * d1).real();
        den += std::norm(d0);
        const double p = std::norm(st.g[a]);
        all += p;
        ++n_all;
        if (t < window) {
          first += p;
          ++n_first;
        }
        if (t >= steps - window) {
          last += p;
          ++n_last;
        }
      }
      st = next;
    }
  }
  return {num / den, first / n_first, last / n_last, all / n_all};
}

// Central finite difference of f at x along coordinate i.
inline double central_difference(const std::function<double()>& f, double& x, double h) {
  const double x0 = x;
  x = x0 + h;
  const double fp = f();
  x = x0 - h;
  const double fm = f();
  x = x0;
  return (fp - fm) / (2.0 * h);
}

inline double relative_error(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace oracle
