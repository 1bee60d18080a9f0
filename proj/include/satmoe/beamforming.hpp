// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "satmoe/network.hpp"

namespace satmoe::beamforming {

/// Raw (pre-activation) policy output. Layout of `values`:
///   [0, K)       private-beam power logits
///   K            common-beam power logit
///   [K+1, 2K+1)  common-rate logits
struct RawAction {
  std::vector<double> values;

  static RawAction zeros(int k) { return RawAction{std::vector<double>(2 * k + 1, 0.0)}; }
  std::span<const double> x_pow(int k) const { return {values.data(), static_cast<std::size_t>(k + 1)}; }
  std::span<const double> x_com(int k) const {
    return {values.data() + k + 1, static_cast<std::size_t>(k)};
  }
};

/// (sqrt(P_max) / 2) (tanh(x) + 1), in [0, sqrt(P_max)].
double power_magnitude(double x, double p_max);

struct BeamDirections {
  CVec common;                 // normalized MRT over the LGU channels
  std::vector<CVec> private_;  // normalized ZF columns
};

/// Unit-norm MRT common direction and ZF private directions built from the
/// LEO->LGU channels. Throws SingularMatrixError for rank-deficient channels.
BeamDirections beam_directions(const network::ChannelState& ch);

/// c_k = (cap / 2)(tanh(x_k) + 1), each in [0, cap].
std::vector<double> common_rate_map(std::span<const double> x_com, double common_cap);

/// Magnitudes x directions for every LEO beam, common rates from the
/// resulting common cap, and the fixed GEO beams. SDMA drops the common part.
network::BeamSolution assemble_solution(const RawAction& raw, const network::ChannelState& ch,
                                        const ScenarioConfig& cfg);
/// Same, reusing directions and GEO beams already computed for `ch`.
network::BeamSolution assemble_solution(const RawAction& raw, const network::ChannelState& ch,
                                        const ScenarioConfig& cfg, const BeamDirections& dirs,
                                        const std::vector<CVec>& w_geo);

}  // namespace satmoe::beamforming
