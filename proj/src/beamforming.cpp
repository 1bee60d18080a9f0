// SPDX-License-Identifier: Apache-2.0
#include "satmoe/beamforming.hpp"

#include <cmath>

#include "satmoe/errors.hpp"

namespace satmoe::beamforming {

namespace {

CVec normalized(CVec v) {
  const double n = std::sqrt(norm2(v));
  if (!(n > 0.0)) throw SingularMatrixError("beam direction has zero norm", 0.0);
  for (auto& x : v) x /= n;
  return v;
}

CVec scaled(const CVec& dir, double magnitude) {
  CVec out(dir);
  for (auto& x : out) x *= magnitude;
  return out;
}

}  // namespace

double power_magnitude(double x, double p_max) {
  return 0.5 * std::sqrt(p_max) * (std::tanh(x) + 1.0);
}

BeamDirections beam_directions(const network::ChannelState& ch) {
  if (ch.leo_lgu.empty()) throw DimensionError("beam_directions: no LGU channels");
  const std::size_t n = ch.leo_lgu.front().size();
  // Rows of G are h_k^H; the MRT direction is the normalized sum of the
  // conjugated rows, i.e. sum_k h_k.
  CVec sum(n, cplx{0.0, 0.0});
  for (const auto& h : ch.leo_lgu) {
    if (h.size() != n) throw DimensionError("beam_directions: ragged LGU channels");
    for (std::size_t i = 0; i < n; ++i) sum[i] += h[i];
  }
  BeamDirections dirs;
  dirs.common = normalized(std::move(sum));
  const CMat g = CMat::from_hermitian_rows(ch.leo_lgu);
  const CMat v = right_pseudo_inverse(g);
  for (std::size_t k = 0; k < ch.leo_lgu.size(); ++k) dirs.private_.push_back(normalized(v.column(k)));
  return dirs;
}

std::vector<double> common_rate_map(std::span<const double> x_com, double common_cap) {
  std::vector<double> c;
  c.reserve(x_com.size());
  for (double x : x_com) c.push_back(0.5 * common_cap * (std::tanh(x) + 1.0));
  return c;
}

network::BeamSolution assemble_solution(const RawAction& raw, const network::ChannelState& ch,
                                        const ScenarioConfig& cfg) {
  return assemble_solution(raw, ch, cfg, beam_directions(ch), network::geo_beams(ch, cfg));
}

network::BeamSolution assemble_solution(const RawAction& raw, const network::ChannelState& ch,
                                        const ScenarioConfig& cfg, const BeamDirections& dirs,
                                        const std::vector<CVec>& w_geo) {
  const int k = cfg.K;
  if (raw.values.size() != static_cast<std::size_t>(cfg.action_dim()))
    throw DimensionError("assemble_solution: raw action must have 2K+1 entries");
  const double p_max = cfg.p_max_leo_w();
  const auto x_pow = raw.x_pow(k);

  network::BeamSolution sol;
  for (int i = 0; i < k; ++i)
    sol.w_private.push_back(scaled(dirs.private_[i], power_magnitude(x_pow[i], p_max)));
  sol.w_geo = w_geo;
  if (cfg.protocol == Protocol::rsma) {
    sol.w_common = scaled(dirs.common, power_magnitude(x_pow[k], p_max));
    // The common cap depends only on the beams, never on c_k.
    const auto r = network::rates(network::sinr_rsma(ch, sol, cfg));
    sol.c_common = common_rate_map(raw.x_com(k), r.common_cap);
  }
  return sol;
}

}  // namespace satmoe::beamforming
