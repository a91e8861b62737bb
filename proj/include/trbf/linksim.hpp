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

#include <cstdint>
#include <span>
#include <vector>

#include "trbf/channel.hpp"
#include "trbf/prefilter.hpp"
#include "trbf/rng.hpp"
#include "trbf/types.hpp"

namespace trbf {

/// Equivalent end-to-end channels q[n'][n](t) = sum_m rc(p_{m,n'}) * h_{m,n},
/// each of length L + L_p - 1, with per-receiver peak delays.
struct CompositeResponse {
    int num_users = 0;
    int response_len = 0;            // L + L_p - 1
    CxVec q;                         // [n_src][n_rx][t]
    std::vector<int> peak;           // per receiving user

    std::span<const Cx> response(int n_src, int n_rx) const {
        return {q.data() + (static_cast<size_t>(n_src) * num_users + n_rx) * response_len,
                static_cast<size_t>(response_len)};
    }
    const Cx& at(int n_src, int n_rx, int t) const {
        return q[(static_cast<size_t>(n_src) * num_users + n_rx) * response_len + t];
    }
};

/// Per-user received power split: desired peak, self-stream ISI, other-stream
/// IUI, in units of rho.
struct PowerDecomposition {
    std::vector<double> signal;  // P_s,n
    std::vector<double> isi;     // P_isi,n
    std::vector<double> iui;     // P_iui,n
    double rho = 1.0;

    double mean_signal() const;
    double mean_isi() const;
    double mean_iui() const;
};

struct BerResult {
    double snr_db = 0.0;
    std::int64_t errors = 0;
    std::int64_t bits = 0;
    int realizations = 0;

    double ber() const { return bits > 0 ? static_cast<double>(errors) / bits : 0.0; }
    /// 95% Wilson score interval.
    double wilson_low() const;
    double wilson_high() const;

    BerResult& operator+=(const BerResult& other);
};

/// Peak delays come from the prefilter's delay_reference for TR/ETR and from
/// argmax |q[n][n]| for INTR.
CompositeResponse composite_response(const PrefilterSet& p, const ChannelSet& h);

PowerDecomposition power_decomposition(const CompositeResponse& q, double rho);

/// Adds i.i.d. circular complex Gaussian noise of per-sample variance
/// `variance` (split evenly across the real and imaginary parts).
CxVec awgn(std::span<const Cx> x, double variance, Rng& rng);

struct BerOptions {
    double rho = 1.0;
    long num_symbols = 100000;  // detected symbols per user per realization
    /// Block mode detects one symbol per composite-length block with fresh
    /// i.i.d. neighbours filling the composite support; streaming mode runs
    /// the full-rate convolution and detects every symbol.
    bool streaming = false;
};

/// BPSK link over one channel realization at several SNR points. Noise-free
/// detection statistics are shared across the SNR grid; the same transmitted
/// streams feed every receiver. SNR is rho*Gamma/sigma_z^2.
std::vector<BerResult> simulate_ber_grid(const PrefilterSet& p, const ChannelSet& h,
                                         std::span<const double> snr_db, const BerOptions& opt,
                                         Rng& rng);

/// Single-SNR convenience wrapper.
BerResult simulate_ber(const PrefilterSet& p, const ChannelSet& h, double snr_db,
                       long num_symbols, Rng& rng, bool streaming = false);

}  // namespace trbf
