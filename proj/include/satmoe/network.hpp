// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "satmoe/channel.hpp"
#include "satmoe/config.hpp"
#include "satmoe/numkernel.hpp"

namespace satmoe::network {

using channel::ChannelState;

/// Decision variables of the LEO satellite plus the fixed GEO beams.
/// SDMA solutions carry neither a common beam nor common rates.
struct BeamSolution {
  std::vector<CVec> w_private;               // K beams, length N_T
  std::optional<CVec> w_common;              // length N_T, RSMA only
  std::optional<std::vector<double>> c_common;  // K common-rate shares, RSMA only
  std::vector<CVec> w_geo;                   // M beams, length N_M

  bool is_rsma() const { return w_common.has_value(); }
};

struct SinrReport {
  std::vector<double> ggu;           // M
  std::vector<double> lgu_common;    // K (empty for SDMA)
  std::vector<double> lgu_private;   // K (SDMA: the per-LGU SINR)
};

struct RateReport {
  std::vector<double> ggu;
  std::vector<double> lgu_common;
  std::vector<double> lgu_private;
  double common_cap = 0.0;  // min_k R_k^c, 0 for SDMA
};

struct FeasibilityReport {
  bool power = false;       // total LEO beam power <= P_max
  bool common = false;      // sum_k c_k <= min_k R_k^c
  bool leo = false;         // every LGU rate >= xi_LGU
  bool geo = false;         // every GGU rate >= xi_GGU
  bool nonnegative = false; // every c_k >= 0

  bool all() const { return power && common && leo && geo; }
  double gate() const { return all() ? 1.0 : 0.0; }
};

/// Fixed GEO beams, unit direction times sqrt(P_geo / M). Directions are
/// MRT (h_m / |h_m|) or normalized zero-forcing columns per cfg.geo_precoder.
std::vector<CVec> geo_beams(const ChannelState& ch, const ScenarioConfig& cfg);

/// SDMA SINRs. Throws ConfigError on dimension mismatch.
SinrReport sinr_sdma(const ChannelState& ch, const BeamSolution& sol, const ScenarioConfig& cfg);
/// 1-layer RSMA SINRs (GGU, LGU common, LGU private after SIC).
SinrReport sinr_rsma(const ChannelState& ch, const BeamSolution& sol, const ScenarioConfig& cfg);
/// Dispatches on sol.is_rsma().
SinrReport sinr(const ChannelState& ch, const BeamSolution& sol, const ScenarioConfig& cfg);

RateReport rates(const SinrReport& s);

/// RSMA: sum_k (c_k + R_k^p). SDMA: sum_k R_k.
double sum_rate_leo(const BeamSolution& sol, const RateReport& r);

/// Per-LGU achieved rate c_k + R_k^p (SDMA: R_k).
std::vector<double> lgu_rates(const BeamSolution& sol, const RateReport& r);

/// ||w_c||^2 + sum_k ||w_p_k||^2 (no amplifier factor, no circuit power).
double radiated_power(const BeamSolution& sol);
/// mu (||w_c||^2 + sum ||w_p_k||^2) + P_C
double total_power(const BeamSolution& sol, const ScenarioConfig& cfg);
double energy_efficiency(const BeamSolution& sol, const RateReport& r, const ScenarioConfig& cfg);

FeasibilityReport check_constraints(const BeamSolution& sol, const ChannelState& ch,
                                    const ScenarioConfig& cfg);
/// Same as above with precomputed rates.
FeasibilityReport check_constraints(const BeamSolution& sol, const RateReport& r,
                                    const ScenarioConfig& cfg);

}  // namespace satmoe::network
