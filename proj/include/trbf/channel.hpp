// SPDX-License-Identifier: Apache-2.0
//
// trbf - time-reversal beamforming link simulator for mm-wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trbf/rng.hpp"
#include "trbf/types.hpp"

namespace trbf {

enum class Scenario : std::uint32_t { CB = 0, CR = 1, LR = 2 };

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

/// Indoor 60 GHz scenario description.
///
/// The power delay profile is a specular head at tap 0 plus an exponential
/// tail, with the tail decay solved at construction so that the discrete RMS
/// delay spread matches `rms_delay_spread_ns`. Head-fraction defaults: CB is
/// calibrated against the reported interference decomposition of the
/// uncorrelated link (the profile's self-convolution ratio fixes the TR ISI
/// level); CR and LR use the Rician-K specular share of their tap
/// distribution. head_fraction = 0 degenerates to a single exponential.
struct ScenarioParams {
    Scenario name = Scenario::CB;
    double nakagami_m = 4.34;
    double rms_delay_spread_ns = 3.47;
    double sample_period_ns = 0.5;
    int num_taps = 60;                     // L
    double gamma = 1.0;                    // total channel power
    double carrier_wavelength_m = 0.005;   // 60 GHz
    double pdp_head_fraction = 0.8236;

    // Correlated-mode geometry. Scatterer directions are drawn from a
    // Gaussian cone about the (downward) array normal; each tap adds
    // `num_subrays` diffuse subrays scattered around the specular point.
    int num_subrays = 8;
    double cone_std_rad = 0.035;
    double subray_jitter_m = 0.10;
    double nlos_base_excess_m = 3.0;       // first-arrival excess over LoS
    std::array<double, 3> room_m = {5.0, 5.0, 3.0};

    static ScenarioParams preset(Scenario s);

    /// Throws ConfigError on violated invariants (m >= 0.5, tail coverage
    /// L*Ts >= 3*rms delay spread, positive gamma, ...).
    void validate() const;
};

/// Uniform rectangular transmit array, 20 mm pitch by default.
struct ArrayGeometry {
    int rows = 8;
    int cols = 8;
    double element_spacing_m = 0.02;

    int size() const { return rows * cols; }

    /// Element positions in world coordinates for a horizontal (ceiling)
    /// array with the given centroid and yaw about the vertical axis.
    std::vector<std::array<double, 3>> element_positions(const std::array<double, 3>& centroid,
                                                         double yaw_rad) const;

    /// Factor M into the flattest rows x cols grid (rows >= cols), matching
    /// the 8x4 / 8x8 / 16x8 configurations for M = 32 / 64 / 128.
    static ArrayGeometry for_antennas(int num_antennas, double spacing_m = 0.02);
};

struct PowerDelayProfile {
    std::vector<double> taps;  // A_h(t), sums to gamma

    double total() const;
    /// Discrete RMS delay spread sqrt(E[t^2] - E[t]^2) in ns.
    double rms_delay_spread_ns(double sample_period_ns) const;
};

/// One correlated-mode draw of the per-tap scatterer geometry for one user.
struct ScattererLayout {
    std::vector<std::array<double, 3>> scatterer_pos;       // per tap
    std::vector<double> specular_power;                     // a_l^2
    std::vector<double> diffuse_power;                      // sigma_l^2
    std::vector<std::array<double, 3>> subray_pos;          // [tap * num_subrays + k]
    std::array<double, 3> rx_pos = {0, 0, 0};
    int num_subrays = 0;
};

/// M x N x L tap tensor h_{m,n}(t) for one realization.
struct ChannelSet {
    int num_antennas = 0;  // M
    int num_users = 0;     // N
    int num_taps = 0;      // L
    CxVec taps;            // [m][n][l]
    ScenarioParams scenario;
    bool correlated = false;
    std::uint64_t seed = 0;

    Cx& at(int m, int n, int l) {
        return taps[(static_cast<size_t>(m) * num_users + n) * num_taps + l];
    }
    const Cx& at(int m, int n, int l) const {
        return taps[(static_cast<size_t>(m) * num_users + n) * num_taps + l];
    }
    std::span<const Cx> cir(int m, int n) const {
        return {taps.data() + (static_cast<size_t>(m) * num_users + n) * num_taps,
                static_cast<size_t>(num_taps)};
    }
};

/// Specular head + exponential tail profile matching the scenario's RMS delay
/// spread to solver precision and summing exactly to gamma.
PowerDelayProfile build_pdp(const ScenarioParams& scenario);

/// Split tap power omega into (specular a^2, diffuse sigma^2) so that the
/// Rician factor K = a^2/sigma^2 satisfies m = (1+K)^2 / (1+2K).
/// m below 1 + eps returns (0, omega): the Rayleigh limit.
std::pair<double, double> split_specular_diffuse(double m_target, double omega);

/// Draw per-tap scatterer geometry for one user: directions from the cone,
/// radial distance solved so the path delay through the scatterer exceeds the
/// first arrival by exactly tap_index * sample_period.
ScattererLayout draw_scatterer_layout(const ScenarioParams& scenario,
                                      const std::array<double, 3>& array_centroid,
                                      const std::array<double, 3>& rx_pos,
                                      const PowerDelayProfile& pdp, Rng& rng);

/// Path delay (ns) from the array centroid through scatterer l to the rx.
double layout_path_delay_ns(const ScattererLayout& layout,
                            const std::array<double, 3>& array_centroid, int tap);

ChannelSet generate_channel_set(const ScenarioParams& scenario, const ArrayGeometry& array,
                                int num_users, bool correlated, Rng& rng);

struct CorrelationTable {
    std::vector<double> distance_m;
    std::vector<double> correlation;  // |normalized sample correlation|
};

/// Ensemble complex tap correlation grouped by element distance; R(0) = 1.
/// Needs at least two realizations.
CorrelationTable estimate_spatial_correlation(const std::vector<ChannelSet>& batch,
                                              const ArrayGeometry& array);

/// Inverse normalized-variance estimator m = E[X^2]^2 / Var(X^2).
/// Constant nonzero samples give +inf; all-zero samples are degenerate.
double estimate_nakagami_m(std::span<const double> amplitudes);

}  // namespace trbf
