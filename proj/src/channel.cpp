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

#include "trbf/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace trbf {

namespace {

constexpr double kSpeedOfLightMPerNs = 0.299792458;

double norm3(const std::array<double, 3>& a) {
    return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
}

std::array<double, 3> sub3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

// Discrete RMS delay spread of head+tail profile with tail ratio delta.
double profile_rms(double head, double delta, double ts, int L) {
    double tail_sum = 0.0, pw = 1.0;
    for (int t = 0; t < L; ++t, pw *= delta) tail_sum += pw;
    double m1 = 0.0, m2 = 0.0;
    pw = 1.0;
    for (int t = 0; t < L; ++t, pw *= delta) {
        double a = (1.0 - head) * pw / tail_sum;
        if (t == 0) a += head;
        const double tt = t * ts;
        m1 += a * tt;
        m2 += a * tt * tt;
    }
    return std::sqrt(std::max(0.0, m2 - m1 * m1));
}

}  // namespace

const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::CB: return "CB";
        case Scenario::CR: return "CR";
        case Scenario::LR: return "LR";
    }
    return "?";
}

Scenario scenario_from_string(const std::string& s) {
    if (s == "CB") return Scenario::CB;
    if (s == "CR") return Scenario::CR;
    if (s == "LR") return Scenario::LR;
    throw ConfigError("unknown scenario: " + s);
}

ScenarioParams ScenarioParams::preset(Scenario s) {
    ScenarioParams p;
    p.name = s;
    switch (s) {
        case Scenario::CB:
            p.nakagami_m = 4.34;
            p.rms_delay_spread_ns = 3.47;
            p.pdp_head_fraction = 0.8236;
            break;
        case Scenario::CR:
            p.nakagami_m = 2.56;
            p.rms_delay_spread_ns = 4.82;
            p.pdp_head_fraction = 0.7806;
            break;
        case Scenario::LR:
            p.nakagami_m = 1.74;
            p.rms_delay_spread_ns = 7.81;
            p.pdp_head_fraction = 0.6522;
            break;
    }
    return p;
}

void ScenarioParams::validate() const {
    if (nakagami_m < 0.5) throw ConfigError("nakagami_m must be >= 0.5");
    if (num_taps < 1) throw ConfigError("num_taps must be positive");
    if (sample_period_ns <= 0.0) throw ConfigError("sample_period_ns must be positive");
    if (gamma <= 0.0) throw ConfigError("gamma must be positive");
    if (rms_delay_spread_ns < 0.0) throw ConfigError("rms_delay_spread_ns must be non-negative");
    if (num_taps * sample_period_ns < 3.0 * rms_delay_spread_ns)
        throw ConfigError("L * sample_period must cover >= 3x the RMS delay spread");
    if (pdp_head_fraction < 0.0 || pdp_head_fraction >= 1.0)
        throw ConfigError("pdp_head_fraction must be in [0, 1)");
    if (carrier_wavelength_m <= 0.0) throw ConfigError("carrier_wavelength_m must be positive");
    if (num_subrays < 1) throw ConfigError("num_subrays must be positive");
}

std::vector<std::array<double, 3>> ArrayGeometry::element_positions(
    const std::array<double, 3>& centroid, double yaw_rad) const {
    std::vector<std::array<double, 3>> pos;
    pos.reserve(static_cast<size_t>(rows) * cols);
    const double c = std::cos(yaw_rad), s = std::sin(yaw_rad);
    for (int r = 0; r < rows; ++r) {
        for (int k = 0; k < cols; ++k) {
            const double x = (k - (cols - 1) / 2.0) * element_spacing_m;
            const double y = (r - (rows - 1) / 2.0) * element_spacing_m;
            pos.push_back({centroid[0] + c * x - s * y, centroid[1] + s * x + c * y, centroid[2]});
        }
    }
    return pos;
}

ArrayGeometry ArrayGeometry::for_antennas(int num_antennas, double spacing_m) {
    if (num_antennas < 1) throw ConfigError("need at least one antenna");
    int best_c = 1;
    for (int c = 1; c * c <= num_antennas; ++c)
        if (num_antennas % c == 0) best_c = c;
    ArrayGeometry g;
    g.cols = best_c;
    g.rows = num_antennas / best_c;
    g.element_spacing_m = spacing_m;
    return g;
}

double PowerDelayProfile::total() const {
    double s = 0.0;
    for (double a : taps) s += a;
    return s;
}

double PowerDelayProfile::rms_delay_spread_ns(double sample_period_ns) const {
    const double tot = total();
    double m1 = 0.0, m2 = 0.0;
    for (size_t t = 0; t < taps.size(); ++t) {
        const double tt = static_cast<double>(t) * sample_period_ns;
        m1 += taps[t] * tt;
        m2 += taps[t] * tt * tt;
    }
    m1 /= tot;
    m2 /= tot;
    return std::sqrt(std::max(0.0, m2 - m1 * m1));
}

PowerDelayProfile build_pdp(const ScenarioParams& scenario) {
    scenario.validate();
    const int L = scenario.num_taps;
    const double ts = scenario.sample_period_ns;
    const double head = scenario.pdp_head_fraction;
    const double target = scenario.rms_delay_spread_ns;

    PowerDelayProfile pdp;
    pdp.taps.assign(L, 0.0);

    // Flat limit: everything in tap 0.
    if (target < 1e-9 * ts || L == 1) {
        pdp.taps[0] = scenario.gamma;
        return pdp;
    }

    const double max_rms = profile_rms(head, 1.0 - 1e-12, ts, L);
    if (target >= max_rms)
        throw ConfigError("L * sample_period too short to realize this delay spread");

    // profile_rms is monotone increasing in the tail ratio; bisect.
    double lo = 0.0, hi = 1.0 - 1e-12;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (profile_rms(head, mid, ts, L) < target)
            lo = mid;
        else
            hi = mid;
    }
    const double delta = 0.5 * (lo + hi);

    double tail_sum = 0.0, pw = 1.0;
    for (int t = 0; t < L; ++t, pw *= delta) tail_sum += pw;
    pw = 1.0;
    for (int t = 0; t < L; ++t, pw *= delta) {
        pdp.taps[t] = (1.0 - head) * pw / tail_sum;
        if (t == 0) pdp.taps[t] += head;
    }
    // Renormalize so the total is gamma to the last bit.
    double s = 0.0;
    for (double a : pdp.taps) s += a;
    for (double& a : pdp.taps) a *= scenario.gamma / s;
    return pdp;
}

std::pair<double, double> split_specular_diffuse(double m_target, double omega) {
    if (omega <= 0.0) throw std::invalid_argument("split_specular_diffuse: omega must be positive");
    if (m_target < 1.0 + 1e-9) return {0.0, omega};  // Rayleigh limit
    const double K = (m_target - 1.0) + std::sqrt(m_target * (m_target - 1.0));
    return {omega * K / (1.0 + K), omega / (1.0 + K)};
}

ScattererLayout draw_scatterer_layout(const ScenarioParams& scenario,
                                      const std::array<double, 3>& array_centroid,
                                      const std::array<double, 3>& rx_pos,
                                      const PowerDelayProfile& pdp, Rng& rng) {
    const int L = scenario.num_taps;
    ScattererLayout layout;
    layout.rx_pos = rx_pos;
    layout.num_subrays = scenario.num_subrays;
    layout.scatterer_pos.resize(L);
    layout.specular_power.resize(L);
    layout.diffuse_power.resize(L);
    layout.subray_pos.resize(static_cast<size_t>(L) * scenario.num_subrays);

    const auto b = sub3(array_centroid, rx_pos);
    const double d0 = norm3(b);
    for (int l = 0; l < L; ++l) {
        // Direction in a Gaussian cone about the downward array normal.
        const double g1 = rng.normal() * scenario.cone_std_rad;
        const double g2 = rng.normal() * scenario.cone_std_rad;
        std::array<double, 3> u = {g1, g2, -1.0};
        const double un = norm3(u);
        u = {u[0] / un, u[1] / un, u[2] / un};

        // Radial distance along u such that the path through the scatterer
        // exceeds the first arrival (d0 + base excess) by the tap delay,
        // up to half a sample. The sub-sample jitter spans many wavelengths,
        // which keeps different taps' absolute phases uncorrelated.
        const double delay_jitter = rng.uniform(-0.5, 0.5);
        const double D = d0 + scenario.nlos_base_excess_m +
                         (l + delay_jitter) * kSpeedOfLightMPerNs * scenario.sample_period_ns;
        const double r = (D * D - d0 * d0) / (2.0 * (D + dot3(u, b)));
        const std::array<double, 3> s = {array_centroid[0] + r * u[0],
                                         array_centroid[1] + r * u[1],
                                         array_centroid[2] + r * u[2]};
        layout.scatterer_pos[l] = s;
        auto [a2, s2] = split_specular_diffuse(scenario.nakagami_m, pdp.taps[l]);
        layout.specular_power[l] = a2;
        layout.diffuse_power[l] = s2;
        for (int k = 0; k < scenario.num_subrays; ++k) {
            layout.subray_pos[static_cast<size_t>(l) * scenario.num_subrays + k] = {
                s[0] + rng.normal() * scenario.subray_jitter_m,
                s[1] + rng.normal() * scenario.subray_jitter_m,
                s[2] + rng.normal() * scenario.subray_jitter_m};
        }
    }
    return layout;
}

double layout_path_delay_ns(const ScattererLayout& layout,
                            const std::array<double, 3>& array_centroid, int tap) {
    const auto& s = layout.scatterer_pos[tap];
    const double d = norm3(sub3(s, array_centroid)) + norm3(sub3(layout.rx_pos, s));
    return d / kSpeedOfLightMPerNs;
}

ChannelSet generate_channel_set(const ScenarioParams& scenario, const ArrayGeometry& array,
                                int num_users, bool correlated, Rng& rng) {
    scenario.validate();
    if (num_users < 1) throw std::invalid_argument("generate_channel_set: num_users >= 1");
    const int M = array.size();
    const int L = scenario.num_taps;
    const PowerDelayProfile pdp = build_pdp(scenario);

    ChannelSet cs;
    cs.num_antennas = M;
    cs.num_users = num_users;
    cs.num_taps = L;
    cs.scenario = scenario;
    cs.correlated = correlated;
    cs.taps.assign(static_cast<size_t>(M) * num_users * L, Cx(0, 0));

    if (!correlated) {
        // Independent per antenna: exact Nakagami amplitude, uniform phase.
        for (int m = 0; m < M; ++m)
            for (int n = 0; n < num_users; ++n)
                for (int l = 0; l < L; ++l) {
                    const double amp = rng.nakagami(scenario.nakagami_m, pdp.taps[l]);
                    const double ph = rng.uniform(0.0, 2.0 * M_PI);
                    cs.at(m, n, l) = Cx(amp * std::cos(ph), amp * std::sin(ph));
                }
        return cs;
    }

    const std::array<double, 3> centroid = {scenario.room_m[0] / 2.0, scenario.room_m[1] / 2.0,
                                            scenario.room_m[2]};
    const double yaw = rng.uniform(0.0, 2.0 * M_PI);
    const auto ant = array.element_positions(centroid, yaw);
    const double lam = scenario.carrier_wavelength_m;
    const int ks = scenario.num_subrays;
    const double two_pi = 2.0 * M_PI;

    for (int n = 0; n < num_users; ++n) {
        const std::array<double, 3> rx = {rng.uniform(0.0, scenario.room_m[0]),
                                          rng.uniform(0.0, scenario.room_m[1]),
                                          rng.uniform(0.0, scenario.room_m[2])};
        const ScattererLayout layout = draw_scatterer_layout(scenario, centroid, rx, pdp, rng);
        for (int l = 0; l < L; ++l) {
            const auto& s = layout.scatterer_pos[l];
            const double leg2 = norm3(sub3(rx, s));
            const double a = std::sqrt(layout.specular_power[l]);
            for (int m = 0; m < M; ++m) {
                const double d = norm3(sub3(s, ant[m])) + leg2;
                const double ph = -two_pi * d / lam;
                cs.at(m, n, l) += a * Cx(std::cos(ph), std::sin(ph));
            }
            for (int k = 0; k < ks; ++k) {
                const auto& sk = layout.subray_pos[static_cast<size_t>(l) * ks + k];
                const Cx ck = rng.cnormal(layout.diffuse_power[l] / ks);
                const double leg2k = norm3(sub3(rx, sk));
                for (int m = 0; m < M; ++m) {
                    const double d = norm3(sub3(sk, ant[m])) + leg2k;
                    const double ph = -two_pi * d / lam;
                    cs.at(m, n, l) += ck * Cx(std::cos(ph), std::sin(ph));
                }
            }
        }
    }
    return cs;
}

CorrelationTable estimate_spatial_correlation(const std::vector<ChannelSet>& batch,
                                              const ArrayGeometry& array) {
    if (batch.size() < 2)
        throw InsufficientDataError("estimate_spatial_correlation: need >= 2 realizations");
    const auto pos = array.element_positions({0, 0, 0}, 0.0);
    const int M = array.size();

    struct Acc {
        Cx num{0, 0};
        double p1 = 0, p2 = 0;
    };
    std::map<long long, Acc> buckets;  // key: distance rounded to 1 um
    auto key_of = [](double d) { return static_cast<long long>(std::llround(d * 1e6)); };

    // Precompute pair lists once; include self-pairs so R(0) = 1 exactly.
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < M; ++i)
        for (int j = i; j < M; ++j) pairs.emplace_back(i, j);

    for (const auto& cs : batch) {
        if (cs.num_antennas != M)
            throw std::invalid_argument("estimate_spatial_correlation: geometry mismatch");
        for (auto [i, j] : pairs) {
            const double d = norm3(sub3(pos[i], pos[j]));
            auto& acc = buckets[key_of(d)];
            for (int n = 0; n < cs.num_users; ++n) {
                const auto hi = cs.cir(i, n);
                const auto hj = cs.cir(j, n);
                for (int l = 0; l < cs.num_taps; ++l) {
                    acc.num += hi[l] * std::conj(hj[l]);
                    acc.p1 += abs2(hi[l]);
                    acc.p2 += abs2(hj[l]);
                }
            }
        }
    }

    CorrelationTable table;
    for (const auto& [k, acc] : buckets) {
        table.distance_m.push_back(static_cast<double>(k) * 1e-6);
        table.correlation.push_back(std::abs(acc.num) / std::sqrt(acc.p1 * acc.p2));
    }
    return table;
}

double estimate_nakagami_m(std::span<const double> amplitudes) {
    if (amplitudes.size() < 2)
        throw InsufficientDataError("estimate_nakagami_m: need >= 2 samples");
    double s1 = 0.0, s2 = 0.0;
    for (double a : amplitudes) {
        const double x2 = a * a;
        s1 += x2;
        s2 += x2 * x2;
    }
    const double n = static_cast<double>(amplitudes.size());
    const double mean = s1 / n;
    const double var = std::max(0.0, s2 / n - mean * mean) * n / (n - 1.0);
    if (var == 0.0) {
        if (mean > 0.0) return std::numeric_limits<double>::infinity();
        throw DegenerateDistributionError("estimate_nakagami_m: all samples are zero");
    }
    return mean * mean / var;
}

}  // namespace trbf
