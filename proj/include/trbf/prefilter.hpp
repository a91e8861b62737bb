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
#include <string>
#include <vector>

#include "trbf/channel.hpp"
#include "trbf/types.hpp"

namespace trbf {

enum class Technique : std::uint32_t { TR = 0, ETR = 1, INTR = 2 };

const char* to_string(Technique t);
Technique technique_from_string(const std::string& s);

/// M x N x L_p pre-filter tensor, globally normalized to unit energy so the
/// transmit power is rho regardless of M and N. Stored tap i of filter (m,n)
/// represents p_{m,n}(t) on a support ending at t = 0; the transmitted filter
/// is the conjugated time reversal of the stored taps.
struct PrefilterSet {
    int num_antennas = 0;
    int num_users = 0;
    int filter_len = 0;  // L_p
    Technique technique = Technique::TR;
    /// Expected composite-channel peak delay in samples. TR: L-1; ETR: the
    /// equalizer target t_0. For INTR the peak is realization-dependent and
    /// detected from the composite response; this holds the nominal value.
    int delay_reference = 0;
    CxVec taps;  // [m][n][t]

    Cx& at(int m, int n, int t) {
        return taps[(static_cast<size_t>(m) * num_users + n) * filter_len + t];
    }
    const Cx& at(int m, int n, int t) const {
        return taps[(static_cast<size_t>(m) * num_users + n) * filter_len + t];
    }
    std::span<const Cx> filter(int m, int n) const {
        return {taps.data() + (static_cast<size_t>(m) * num_users + n) * filter_len,
                static_cast<size_t>(filter_len)};
    }
};

/// Per-user zero-forcing pre-equalizer.
struct Equalizer {
    CxVec taps;           // g_n(t), length L_E
    int target_delay = 0; // t_0
    double residual = 0;  // ||A g - delta_t0||
};

/// Pre-truncation INTR spectra, exposed for the exact-nulling checks.
struct IntrSpectra {
    int num_antennas = 0;
    int num_users = 0;
    int num_bins = 0;  // N_f = L + L_p - 1
    CxVec prefilter;   // [m][n][f] projected spectra P*_{,n}(f)
    CxVec channel;     // [m][n][f] H_{m,n}(f)
    int regularized_bins = 0;

    std::span<const Cx> prefilter_bins(int m, int n) const {
        return {prefilter.data() + (static_cast<size_t>(m) * num_users + n) * num_bins,
                static_cast<size_t>(num_bins)};
    }
    std::span<const Cx> channel_bins(int m, int n) const {
        return {channel.data() + (static_cast<size_t>(m) * num_users + n) * num_bins,
                static_cast<size_t>(num_bins)};
    }
};

/// Conventional TR: p_{m,n} = time-aligned CIR scaled by 1/sqrt(P_h) where
/// P_h sums ||h_n(l)||^2 over users and taps. delay_reference = L-1.
PrefilterSet tr_prefilter(const ChannelSet& channels);

/// Least-squares ZF equalizer for one user: g minimizing
/// || g * r_n - delta(t - t0) || with r_n the aggregate autocorrelation.
/// target_delay < 0 selects the default t0 = L - 1 + L_E/2.
Equalizer design_zf_equalizer(const ChannelSet& channels, int user, int eq_len,
                              int target_delay = -1);

/// Equalized TR: per-user ZF equalizer cascaded with the TR pre-filter;
/// L_p = L + L_E - 1, delay_reference = t0.
PrefilterSet etr_prefilter(const ChannelSet& channels, int eq_len, int target_delay = -1);

/// Per-bin projection of the TR spectra onto the null space of the other
/// users' steering vectors. reg_epsilon <= 0 selects the default ridge
/// 1e-12 * trace(Gram)/(N-1), applied only to ill-conditioned bins.
IntrSpectra intr_project_spectra(const ChannelSet& channels, int filter_len,
                                 double reg_epsilon = 0.0);

/// Interference-nulling TR: projected spectra transformed back to a length
/// L_p filter (window straddling the TR seed), renormalized to unit energy.
/// With a single user the projector is the identity and the result equals
/// the TR set bit for bit (zero-padded to filter_len).
PrefilterSet intr_prefilter(const ChannelSet& channels, int filter_len,
                            double reg_epsilon = 0.0);

/// Total tap energy; unit for every freshly built set.
double prefilter_energy(const PrefilterSet& p);

/// Samples kept ahead of the TR seed when truncating the INTR inverse
/// transform: floor(2 (L_p - L) / 3).
int intr_truncation_shift(int num_taps, int filter_len);

}  // namespace trbf
