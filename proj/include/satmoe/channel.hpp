// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "satmoe/config.hpp"
#include "satmoe/numkernel.hpp"
#include "satmoe/rng.hpp"

namespace satmoe::channel {

inline constexpr double kSpeedOfLight = 299792458.0;

struct LinkGeometry {
  double carrier_freq_hz;
  double distance_m;
  double sat_gain_dbi;
  double user_gain_dbi;
};

/// Large-scale amplitude sqrt(G_s G_k (c / (4 pi f_c d))^2), gains in dBi.
double path_amplitude(const LinkGeometry& geom);

/// g = sqrt(k/(k+1)) 1 + sqrt(1/(k+1)) z, z ~ CN(0, I). E|g_i|^2 = 1.
CVec draw_rician(int n_antennas, double rician_factor, Rng& rng);

struct SmallScaleState {
  CVec g;
  double rician_factor = 0.0;
  double rho = 1.0;
  // Gauss-Markov on the full vector (LoS included) instead of the diffuse part.
  bool full_vector = false;
};

/// One Jakes / first-order Gauss-Markov step. By default only the diffuse
/// component evolves (LoS mean held fixed); rho == 1 leaves g untouched.
SmallScaleState jakes_step(const SmallScaleState& state, Rng& rng);

/// All satellite-to-user channel vectors at one time step.
struct ChannelState {
  std::vector<CVec> geo_ggu;  // M vectors, length N_M
  std::vector<CVec> geo_lgu;  // K vectors, length N_M (empty when homogeneous)
  std::vector<CVec> leo_ggu;  // M vectors, length N_T
  std::vector<CVec> leo_lgu;  // K vectors, length N_T

  bool operator==(const ChannelState&) const = default;
};

/// Small-scale state for every link, laid out like ChannelState.
struct SmallScaleSet {
  std::vector<SmallScaleState> geo_ggu, geo_lgu, leo_ggu, leo_lgu;
};

/// Geometry of the link families: LEO links use the LEO altitude, GEO links
/// the GEO altitude.
LinkGeometry leo_geometry(const ScenarioConfig& cfg);
LinkGeometry geo_geometry(const ScenarioConfig& cfg);

/// Scales each small-scale vector by its link's path amplitude. Throws
/// ConfigError when counts or antenna lengths do not match the scenario.
ChannelState assemble_channels(const ScenarioConfig& cfg, const SmallScaleSet& small_scale);

/// Owns per-link RNG streams and small-scale states for one environment.
/// Each link draws from its own stream derived from (seed, link family,
/// user index), so results do not depend on evaluation order.
class ChannelProcess {
 public:
  explicit ChannelProcess(ScenarioConfig cfg);

  void reset(std::uint64_t seed);
  /// Advances every link by one slot in time-varying mode; no-op when fixed.
  void advance();

  const ChannelState& current() const { return current_; }
  const SmallScaleSet& small_scale() const { return small_; }

 private:
  struct Link {
    SmallScaleState state;
    Rng rng;
  };
  void rebuild();

  ScenarioConfig cfg_;
  std::vector<Link> links_;  // order: geo_ggu, geo_lgu, leo_ggu, leo_lgu
  SmallScaleSet small_;
  ChannelState current_;
};

}  // namespace satmoe::channel
