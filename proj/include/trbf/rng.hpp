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

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "trbf/types.hpp"

namespace trbf {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256++ with Box-Muller normals and a Marsaglia-Tsang gamma sampler.
/// Hand-rolled so that streams are identical across platforms and library
/// versions; std::normal_distribution is implementation-defined.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& s : state_) s = splitmix64(sm);
    }

    /// Deterministic substream for (master seed, stream index, tag).
    static Rng substream(std::uint64_t master, std::uint64_t index, std::uint64_t tag) {
        std::uint64_t sm = master;
        std::uint64_t a = splitmix64(sm);
        sm = a ^ (index * 0x9e3779b97f4a7c15ULL + 0x7f4a7c15ULL);
        std::uint64_t b = splitmix64(sm);
        sm = b ^ (tag * 0xbf58476d1ce4e5b9ULL + 1ULL);
        return Rng(splitmix64(sm));
    }

    /// Child stream derived from the current state and a tag.
    Rng fork(std::uint64_t tag) {
        std::uint64_t sm = next_u64() ^ (tag * 0x94d049bb133111ebULL + 0x2545f4914f6cdd1dULL);
        return Rng(splitmix64(sm));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1].
    double uniform_pos() { return 1.0 - uniform(); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (one spare cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Circularly symmetric complex normal with total variance `var`
    /// (var/2 per real component).
    Cx cnormal(double var) {
        const double s = std::sqrt(var / 2.0);
        return {s * normal(), s * normal()};
    }

    /// Gamma(shape, scale) via Marsaglia-Tsang; shape < 1 handled by boosting.
    double gamma(double shape, double scale) {
        if (shape <= 0.0 || scale <= 0.0)
            throw std::invalid_argument("gamma: shape and scale must be positive");
        if (shape < 1.0) {
            const double u = uniform_pos();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
        }
    }

    /// Nakagami(m, omega) amplitude: sqrt of Gamma(m, omega/m).
    double nakagami(double m, double omega) { return std::sqrt(gamma(m, omega / m)); }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace trbf
