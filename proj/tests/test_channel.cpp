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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "trbf/channel.hpp"

using namespace trbf;

namespace {

// Independent discrete second-moment oracle for the RMS delay spread.
double rms_delay_oracle(const std::vector<double>& a, double ts) {
    double tot = 0, m1 = 0, m2 = 0;
    for (size_t t = 0; t < a.size(); ++t) {
        tot += a[t];
        m1 += a[t] * t * ts;
        m2 += a[t] * t * ts * t * ts;
    }
    return std::sqrt(m2 / tot - (m1 / tot) * (m1 / tot));
}

// Regularized lower incomplete gamma P(a, x), series + continued fraction.
double gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double sum = 1.0 / a, term = sum, ap = a;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - lg) * h;
}

// Nakagami(m, omega) amplitude CDF: P(m, m x^2 / omega).
double nakagami_cdf(double x, double m, double omega) {
    return x <= 0.0 ? 0.0 : gamma_p(m, m * x * x / omega);
}

}  // namespace

TEST_CASE("scenario presets carry the reference m and delay spreads") {
    const auto cb = ScenarioParams::preset(Scenario::CB);
    CHECK(cb.nakagami_m == doctest::Approx(4.34));
    CHECK(cb.rms_delay_spread_ns == doctest::Approx(3.47));
    const auto cr = ScenarioParams::preset(Scenario::CR);
    CHECK(cr.nakagami_m == doctest::Approx(2.56));
    CHECK(cr.rms_delay_spread_ns == doctest::Approx(4.82));
    const auto lr = ScenarioParams::preset(Scenario::LR);
    CHECK(lr.nakagami_m == doctest::Approx(1.74));
    CHECK(lr.rms_delay_spread_ns == doctest::Approx(7.81));

    ScenarioParams bad = cb;
    bad.nakagami_m = 0.4;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cb;
    bad.pdp_head_fraction = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("array factorization matches the reference configurations") {
    auto g16 = ArrayGeometry::for_antennas(16);
    CHECK(g16.rows == 4);
    CHECK(g16.cols == 4);
    auto g32 = ArrayGeometry::for_antennas(32);
    CHECK(g32.rows == 8);
    CHECK(g32.cols == 4);
    auto g64 = ArrayGeometry::for_antennas(64);
    CHECK(g64.rows == 8);
    CHECK(g64.cols == 8);
    auto g128 = ArrayGeometry::for_antennas(128);
    CHECK(g128.rows == 16);
    CHECK(g128.cols == 8);

    const auto pos = g64.element_positions({0, 0, 0}, 0.0);
    REQUIRE(pos.size() == 64);
    CHECK(std::abs(pos[1][0] - pos[0][0] - 0.02) < 1e-15);
    double cx = 0, cy = 0;
    for (const auto& p : pos) {
        cx += p[0];
        cy += p[1];
    }
    CHECK(std::abs(cx) < 1e-12);
    CHECK(std::abs(cy) < 1e-12);
}

TEST_CASE("build_pdp: total power and delay spreads per scenario") {
    for (Scenario s : {Scenario::CB, Scenario::CR, Scenario::LR}) {
        ScenarioParams sp = ScenarioParams::preset(s);
        sp.gamma = 0.01;  // Gamma << 1 as in pathloss-inclusive runs
        const PowerDelayProfile pdp = build_pdp(sp);
        REQUIRE(static_cast<int>(pdp.taps.size()) == sp.num_taps);
        CHECK(std::abs(pdp.total() - sp.gamma) < 1e-12);
        const double rms = rms_delay_oracle(pdp.taps, sp.sample_period_ns);
        CHECK(std::abs(rms - sp.rms_delay_spread_ns) < 0.005 * sp.rms_delay_spread_ns);
        for (double a : pdp.taps) CHECK(a >= 0.0);
    }
}

TEST_CASE("build_pdp: flat limit and infeasible spreads") {
    ScenarioParams sp = ScenarioParams::preset(Scenario::CB);
    sp.rms_delay_spread_ns = 0.0;
    const PowerDelayProfile flat = build_pdp(sp);
    CHECK(flat.taps[0] == doctest::Approx(sp.gamma));
    for (size_t t = 1; t < flat.taps.size(); ++t) CHECK(flat.taps[t] == 0.0);

    ScenarioParams bad = ScenarioParams::preset(Scenario::CB);
    bad.num_taps = 8;  // 4 ns span cannot carry a 3.47 ns spread
    CHECK_THROWS_AS(build_pdp(bad), ConfigError);
}

TEST_CASE("split_specular_diffuse: Rayleigh limit and closed-form inversion") {
    auto [a2, s2] = split_specular_diffuse(1.0, 1.0);
    CHECK(a2 == 0.0);
    CHECK(s2 == 1.0);

    for (auto [m, omega] : {std::pair{4.34, 1.0}, std::pair{2.56, 0.05}}) {
        auto [sa, sd] = split_specular_diffuse(m, omega);
        CHECK(std::abs(sa + sd - omega) < 1e-12 * omega);
        const double K = sa / sd;
        const double K_ref = (m - 1.0) + std::sqrt(m * m - m);
        CHECK(std::abs(K - K_ref) < 1e-9 * K_ref);
        const double m_back = (1.0 + K) * (1.0 + K) / (1.0 + 2.0 * K);
        CHECK(std::abs(m_back - m) < 1e-9);
    }
    CHECK_THROWS_AS(split_specular_diffuse(2.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(split_specular_diffuse(2.0, -1.0), std::invalid_argument);
}

TEST_CASE("generate_channel_set: near-deterministic specular-only limit") {
    ScenarioParams sp = ScenarioParams::preset(Scenario::CB);
    sp.num_taps = 1;
    sp.rms_delay_spread_ns = 0.0;
    sp.nakagami_m = 500.0;
    Rng rng(101);
    const ChannelSet cs = generate_channel_set(sp, ArrayGeometry{4, 4, 0.02}, 1, false, rng);
    for (int m = 0; m < 16; ++m)
        CHECK(std::abs(std::abs(cs.at(m, 0, 0)) - std::sqrt(sp.gamma)) < 0.2);
}

TEST_CASE("generate_channel_set: per-tap ensemble power matches the PDP") {
    ScenarioParams sp = ScenarioParams::preset(Scenario::CB);
    sp.num_taps = 20;
    sp.sample_period_ns = 1.0;
    const PowerDelayProfile pdp = build_pdp(sp);
    const ArrayGeometry arr{4, 4, 0.02};
    const int reals = 400, users = 4;
    std::vector<double> acc(sp.num_taps, 0.0);
    for (int r = 0; r < reals; ++r) {
        Rng rng = Rng::substream(55, r, 1);
        const ChannelSet cs = generate_channel_set(sp, arr, users, false, rng);
        for (int m = 0; m < 16; ++m)
            for (int n = 0; n < users; ++n)
                for (int l = 0; l < sp.num_taps; ++l) acc[l] += abs2(cs.at(m, n, l));
    }
    const double count = 16.0 * users * reals;
    for (int l = 0; l < sp.num_taps; ++l) {
        const double mean = acc[l] / count;
        // Var(|h|^2) = A^2/m for Nakagami taps.
        const double se = pdp.taps[l] / std::sqrt(sp.nakagami_m * count);
        CHECK(std::abs(mean - pdp.taps[l]) < 3.5 * se + 1e-12);
    }
}

TEST_CASE("generate_channel_set: marginal amplitude KS distance below 0.02") {
    ScenarioParams sp = ScenarioParams::preset(Scenario::CB);
    const ArrayGeometry arr{4, 4, 0.02};
    std::vector<double> amps;
    amps.reserve(100000);
    int r = 0;
    while (amps.size() < 100000) {
        Rng rng = Rng::substream(77, r++, 2);
        const ChannelSet cs = generate_channel_set(sp, arr, 1, false, rng);
        for (int m = 0; m < 16; ++m) amps.push_back(std::abs(cs.at(m, 0, 0)));
    }
    std::sort(amps.begin(), amps.end());
    const double omega = build_pdp(sp).taps[0];
    double ks = 0.0;
    for (size_t i = 0; i < amps.size(); ++i) {
        const double cdf = nakagami_cdf(amps[i], sp.nakagami_m, omega);
        const double lo = static_cast<double>(i) / amps.size();
        const double hi = static_cast<double>(i + 1) / amps.size();
        ks = std::max({ks, std::abs(cdf - lo), std::abs(cdf - hi)});
    }
    CHECK(ks < 0.02);
}

TEST_CASE("generate_channel_set: cross-user and cross-tap independence") {
    ScenarioParams sp = ScenarioParams::preset(Scenario::CB);
    sp.num_taps = 10;
    sp.sample_period_ns = 2.0;
    const ArrayGeometry arr{2, 2, 0.02};
    const int reals = 1000;
    Cx user_num(0, 0), tap_num(0, 0);
    double user_d1 = 0, user_d2 = 0, tap_d1 = 0, tap_d2 = 0;
    for (int r = 0; r < reals; ++r) {
        Rng rng = Rng::substream(99, r, 3);
        const ChannelSet cs = generate_channel_set(sp, arr, 2, false, rng);
        for (int m = 0; m < 4; ++m) {
            user_num += cs.at(m, 0, 0) * std::conj(cs.at(m, 1, 0));
            user_d1 += abs2(cs.at(m, 0, 0));
            user_d2 += abs2(cs.at(m, 1, 0));
            tap_num += cs.at(m, 0, 1) * std::conj(cs.at(m, 0, 5));
            tap_d1 += abs2(cs.at(m, 0, 1));
            tap_d2 += abs2(cs.at(m, 0, 5));
        }
    }
    CHECK(std::abs(user_num) / std::sqrt(user_d1 * user_d2) < 0.05);
    CHECK(std::abs(tap_num) / std::sqrt(tap_d1 * tap_d2) < 0.05);
}

TEST_CASE("generate_channel_set: correlated mode has the same independence") {
    ScenarioParams sp = ScenarioParams::preset(Scenario::CB);
    const ArrayGeometry arr{2, 2, 0.02};
    const int reals = 1000;
    Cx user_num(0, 0), tap_num(0, 0);
    double user_d = 0, tap_d = 0;
    for (int r = 0; r < reals; ++r) {
        Rng rng = Rng::substream(98, r, 3);
        const ChannelSet cs = generate_channel_set(sp, arr, 2, true, rng);
        for (int m = 0; m < 4; ++m) {
            user_num += cs.at(m, 0, 0) * std::conj(cs.at(m, 1, 0));
            user_d += std::sqrt(abs2(cs.at(m, 0, 0)) * abs2(cs.at(m, 1, 0)));
            tap_num += cs.at(m, 0, 1) * std::conj(cs.at(m, 0, 6));
            tap_d += std::sqrt(abs2(cs.at(m, 0, 1)) * abs2(cs.at(m, 0, 6)));
        }
    }
    CHECK(std::abs(user_num) / user_d < 0.05);
    CHECK(std::abs(tap_num) / tap_d < 0.05);
}

TEST_CASE("scatterer layout: path delays match the tap index within half a sample") {
    const ScenarioParams sp = ScenarioParams::preset(Scenario::LR);
    const PowerDelayProfile pdp = build_pdp(sp);
    const std::array<double, 3> centroid = {2.5, 2.5, 3.0};
    const double c_m_per_ns = 0.299792458;
    Rng rng(5150);
    for (int rep = 0; rep < 10; ++rep) {
        const std::array<double, 3> rx = {rng.uniform(0, 5), rng.uniform(0, 5),
                                          rng.uniform(0, 3)};
        const ScattererLayout lay = draw_scatterer_layout(sp, centroid, rx, pdp, rng);
        const double d0 = std::sqrt(sq(centroid[0] - rx[0]) + sq(centroid[1] - rx[1]) +
                                    sq(centroid[2] - rx[2]));
        const double first_arrival_ns = (d0 + sp.nlos_base_excess_m) / c_m_per_ns;
        for (int l = 0; l < sp.num_taps; ++l) {
            const double excess = layout_path_delay_ns(lay, centroid, l) - first_arrival_ns;
            CHECK(std::abs(excess - l * sp.sample_period_ns) <= 0.5 * sp.sample_period_ns);
        }
        for (int l = 0; l < sp.num_taps; ++l)
            CHECK(std::abs(lay.specular_power[l] + lay.diffuse_power[l] - pdp.taps[l]) <
                  1e-12);
    }
}

TEST_CASE("estimate_spatial_correlation: independence and duplication limits") {
    ScenarioParams sp = ScenarioParams::preset(Scenario::CB);
    sp.num_taps = 12;
    sp.sample_period_ns = 1.5;
    const ArrayGeometry arr{4, 4, 0.02};

    std::vector<ChannelSet> batch;
    for (int r = 0; r < 400; ++r) {
        Rng rng = Rng::substream(123, r, 4);
        batch.push_back(generate_channel_set(sp, arr, 1, false, rng));
    }
    const CorrelationTable tab = estimate_spatial_correlation(batch, arr);
    REQUIRE(!tab.distance_m.empty());
    CHECK(tab.distance_m.front() == 0.0);
    CHECK(tab.correlation.front() == doctest::Approx(1.0));
    for (size_t i = 1; i < tab.distance_m.size(); ++i) CHECK(tab.correlation[i] < 0.1);

    // Identical taps at every antenna give correlation one everywhere.
    std::vector<ChannelSet> dup = batch;
    for (auto& cs : dup)
        for (int m = 1; m < 16; ++m)
            for (int l = 0; l < sp.num_taps; ++l) cs.at(m, 0, l) = cs.at(0, 0, l);
    const CorrelationTable tab2 = estimate_spatial_correlation(dup, arr);
    for (double c : tab2.correlation) CHECK(c == doctest::Approx(1.0));

    CHECK_THROWS_AS(estimate_spatial_correlation({batch[0]}, arr), InsufficientDataError);
}

TEST_CASE("estimate_spatial_correlation: correlated mode is high and decaying") {
    const ScenarioParams sp = ScenarioParams::preset(Scenario::CB);
    const ArrayGeometry arr{8, 8, 0.02};
    std::vector<ChannelSet> batch;
    for (int r = 0; r < 250; ++r) {
        Rng rng = Rng::substream(321, r, 4);
        batch.push_back(generate_channel_set(sp, arr, 1, true, rng));
    }
    const CorrelationTable tab = estimate_spatial_correlation(batch, arr);
    REQUIRE(tab.distance_m.size() >= 4);
    CHECK(tab.correlation[0] == doctest::Approx(1.0));
    CHECK(std::abs(tab.distance_m[1] - 0.02) < 1e-9);
    CHECK(tab.correlation[1] > 0.5);
    // monotone decay over the first three nonzero spacings
    CHECK(tab.correlation[1] > tab.correlation[2]);
    CHECK(tab.correlation[2] > tab.correlation[3]);
}

TEST_CASE("estimate_nakagami_m: sentinels and synthetic distributions") {
    const std::vector<double> constant(2000, 1.5);
    CHECK(std::isinf(estimate_nakagami_m(constant)));
    const std::vector<double> zeros(2000, 0.0);
    CHECK_THROWS_AS(estimate_nakagami_m(zeros), DegenerateDistributionError);
    CHECK_THROWS_AS(estimate_nakagami_m(std::vector<double>{1.0}), InsufficientDataError);

    // Rayleigh amplitudes are Nakagami with m = 1.
    Rng rng(2024);
    std::vector<double> ray(100000);
    for (auto& a : ray) a = std::abs(rng.cnormal(1.0));
    CHECK(std::abs(estimate_nakagami_m(ray) - 1.0) < 0.05);
}

TEST_CASE("estimate_nakagami_m: generator output matches the scenario target") {
    for (Scenario s : {Scenario::CB, Scenario::LR}) {
        const ScenarioParams sp = ScenarioParams::preset(s);
        const ArrayGeometry arr{4, 4, 0.02};
        std::vector<double> amps;
        amps.reserve(100000);
        int r = 0;
        while (amps.size() < 100000) {
            Rng rng = Rng::substream(888 + static_cast<int>(s), r++, 5);
            const ChannelSet cs = generate_channel_set(sp, arr, 1, false, rng);
            for (int m = 0; m < 16; ++m) amps.push_back(std::abs(cs.at(m, 0, 0)));
        }
        const double mhat = estimate_nakagami_m(amps);
        CHECK(std::abs(mhat - sp.nakagami_m) < 0.10 * sp.nakagami_m);
    }
}

TEST_CASE("generate_channel_set: identical seeds are bit identical") {
    const ScenarioParams sp = ScenarioParams::preset(Scenario::CR);
    const ArrayGeometry arr{4, 2, 0.02};
    for (bool corr : {false, true}) {
        Rng r1 = Rng::substream(31337, 9, 6);
        Rng r2 = Rng::substream(31337, 9, 6);
        const ChannelSet a = generate_channel_set(sp, arr, 3, corr, r1);
        const ChannelSet b = generate_channel_set(sp, arr, 3, corr, r2);
        CHECK(a.taps == b.taps);
    }
}
