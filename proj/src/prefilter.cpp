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

#include "trbf/prefilter.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "trbf/dsp.hpp"

namespace trbf {

namespace {

using EMat = Eigen::Matrix<Cx, Eigen::Dynamic, Eigen::Dynamic>;
using EVec = Eigen::Matrix<Cx, Eigen::Dynamic, 1>;

double tensor_energy(const CxVec& v) {
    double e = 0.0;
    for (const Cx& z : v) e += abs2(z);
    return e;
}

void normalize_unit_energy(CxVec& v) {
    const double e = tensor_energy(v);
    if (!(e > 0.0)) throw std::invalid_argument("prefilter: degenerate all-zero channel");
    const double s = 1.0 / std::sqrt(e);
    for (Cx& z : v) z *= s;
}

/// Aggregate autocorrelation r_n(t) = sum_m conj(h_{m,n}(L-1-t)) * h_{m,n}(t),
/// length 2L-1 with the coherent peak at index L-1.
CxVec aggregate_autocorrelation(const ChannelSet& h, int user) {
    const int L = h.num_taps;
    CxVec r(2 * L - 1, Cx(0, 0));
    for (int m = 0; m < h.num_antennas; ++m) {
        const auto c = h.cir(m, user);
        for (int i = 0; i < L; ++i) {
            const Cx rc = std::conj(c[L - 1 - i]);
            for (int j = 0; j < L; ++j) r[i + j] += rc * c[j];
        }
    }
    return r;
}

}  // namespace

const char* to_string(Technique t) {
    switch (t) {
        case Technique::TR: return "TR";
        case Technique::ETR: return "ETR";
        case Technique::INTR: return "INTR";
    }
    return "?";
}

Technique technique_from_string(const std::string& s) {
    if (s == "TR") return Technique::TR;
    if (s == "ETR") return Technique::ETR;
    if (s == "INTR") return Technique::INTR;
    throw ConfigError("unknown technique: " + s);
}

PrefilterSet tr_prefilter(const ChannelSet& channels) {
    PrefilterSet p;
    p.num_antennas = channels.num_antennas;
    p.num_users = channels.num_users;
    p.filter_len = channels.num_taps;
    p.technique = Technique::TR;
    p.delay_reference = channels.num_taps - 1;
    p.taps = channels.taps;
    normalize_unit_energy(p.taps);
    return p;
}

Equalizer design_zf_equalizer(const ChannelSet& channels, int user, int eq_len,
                              int target_delay) {
    if (eq_len < 1) throw std::invalid_argument("design_zf_equalizer: eq_len >= 1");
    const int L = channels.num_taps;
    const int rows = 2 * L - 2 + eq_len;
    if (target_delay < 0) target_delay = L - 1 + eq_len / 2;
    if (target_delay >= rows)
        throw std::invalid_argument("design_zf_equalizer: target delay out of range");

    const CxVec r = aggregate_autocorrelation(channels, user);
    CxMat A(rows, eq_len);
    for (int t = 0; t < rows; ++t)
        for (int k = 0; k < eq_len; ++k) {
            const int idx = t - k;
            A.at(t, k) = (idx >= 0 && idx < 2 * L - 1) ? r[idx] : Cx(0, 0);
        }
    CxVec b(rows, Cx(0, 0));
    b[target_delay] = Cx(1, 0);

    Equalizer eq;
    eq.taps = dsp::least_squares_solve(A, b);
    eq.target_delay = target_delay;
    double res = 0.0;
    for (int t = 0; t < rows; ++t) {
        Cx acc(0, 0);
        for (int k = 0; k < eq_len; ++k) {
            const int idx = t - k;
            if (idx >= 0 && idx < 2 * L - 1) acc += eq.taps[k] * r[idx];
        }
        res += abs2(acc - b[t]);
    }
    eq.residual = std::sqrt(res);
    return eq;
}

PrefilterSet etr_prefilter(const ChannelSet& channels, int eq_len, int target_delay) {
    const int L = channels.num_taps;
    PrefilterSet p;
    p.num_antennas = channels.num_antennas;
    p.num_users = channels.num_users;
    p.filter_len = L + eq_len - 1;
    p.technique = Technique::ETR;
    p.taps.assign(static_cast<size_t>(p.num_antennas) * p.num_users * p.filter_len, Cx(0, 0));

    for (int n = 0; n < channels.num_users; ++n) {
        const Equalizer eq = design_zf_equalizer(channels, n, eq_len, target_delay);
        p.delay_reference = eq.target_delay;
        CxVec rc_g(eq_len);
        for (int k = 0; k < eq_len; ++k) rc_g[k] = std::conj(eq.taps[eq_len - 1 - k]);
        for (int m = 0; m < channels.num_antennas; ++m) {
            const CxVec f = dsp::convolve(channels.cir(m, n), rc_g);
            for (int t = 0; t < p.filter_len; ++t) p.at(m, n, t) = f[t];
        }
    }
    normalize_unit_energy(p.taps);
    return p;
}

int intr_truncation_shift(int num_taps, int filter_len) {
    return (2 * (filter_len - num_taps)) / 3;
}

IntrSpectra intr_project_spectra(const ChannelSet& channels, int filter_len,
                                 double reg_epsilon) {
    const int M = channels.num_antennas;
    const int N = channels.num_users;
    const int L = channels.num_taps;
    if (filter_len < L) throw std::invalid_argument("intr: filter_len must be >= L");
    if (reg_epsilon < 0.0) throw std::invalid_argument("intr: reg_epsilon must be >= 0");
    const int nf = L + filter_len - 1;

    IntrSpectra sp;
    sp.num_antennas = M;
    sp.num_users = N;
    sp.num_bins = nf;
    sp.channel.resize(static_cast<size_t>(M) * N * nf);
    sp.prefilter.resize(static_cast<size_t>(M) * N * nf);

    // Batched DFTs of the channel taps; the TR spectra are the same columns
    // scaled by 1/sqrt(P_h).
    dsp::dft_batch(nf, L, M * N, channels.taps.data(), sp.channel.data());
    const double ph = tensor_energy(channels.taps);
    if (!(ph > 0.0)) throw std::invalid_argument("intr: degenerate all-zero channel");
    const double inv_sqrt_ph = 1.0 / std::sqrt(ph);

    if (N == 1) {
        // No interferers: the projector is the identity.
        for (size_t i = 0; i < sp.channel.size(); ++i)
            sp.prefilter[i] = sp.channel[i] * inv_sqrt_ph;
        return sp;
    }

    // Per-bin views: rows are antennas, columns are users.
    EMat Hf(M, N), Pf(M, N);
    for (int f = 0; f < nf; ++f) {
        for (int m = 0; m < M; ++m)
            for (int n = 0; n < N; ++n)
                Hf(m, n) = sp.channel[(static_cast<size_t>(m) * N + n) * nf + f];
        for (int n = 0; n < N; ++n) {
            CxMat B(M, N - 1);
            int c = 0;
            for (int k = 0; k < N; ++k) {
                if (k == n) continue;
                for (int m = 0; m < M; ++m) B.at(m, c) = Hf(m, k);
                ++c;
            }
            CxVec v(M);
            for (int m = 0; m < M; ++m) v[m] = Hf(m, n) * inv_sqrt_ph;
            CxVec w;
            try {
                w = dsp::nullspace_project(B, v);
            } catch (const NearSingularError&) {
                // Tikhonov fallback: default ridge keyed to the Gram trace.
                double tr = 0.0;
                for (int k = 0; k < N - 1; ++k)
                    for (int m = 0; m < M; ++m) tr += abs2(B.at(m, k));
                const double ridge = reg_epsilon > 0.0 ? reg_epsilon : 1e-12 * tr / (N - 1);
                w = dsp::nullspace_project(B, v, ridge);  // may rethrow NearSingularError
                ++sp.regularized_bins;
            }
            for (int m = 0; m < M; ++m) Pf(m, n) = w[m];
        }
        for (int m = 0; m < M; ++m)
            for (int n = 0; n < N; ++n)
                sp.prefilter[(static_cast<size_t>(m) * N + n) * nf + f] = Pf(m, n);
    }
    return sp;
}

PrefilterSet intr_prefilter(const ChannelSet& channels, int filter_len, double reg_epsilon) {
    const int M = channels.num_antennas;
    const int N = channels.num_users;
    const int L = channels.num_taps;
    if (filter_len < L) throw std::invalid_argument("intr: filter_len must be >= L");

    PrefilterSet p;
    p.num_antennas = M;
    p.num_users = N;
    p.filter_len = filter_len;
    p.technique = Technique::INTR;
    p.delay_reference = L - 1;

    if (N == 1) {
        // Identity projection; reproduce the TR taps bitwise, zero-padded.
        const PrefilterSet tr = tr_prefilter(channels);
        p.taps.assign(static_cast<size_t>(M) * filter_len, Cx(0, 0));
        for (int m = 0; m < M; ++m)
            for (int t = 0; t < L; ++t) p.at(m, 0, t) = tr.at(m, 0, t);
        return p;
    }

    IntrSpectra sp = intr_project_spectra(channels, filter_len, reg_epsilon);
    const int nf = sp.num_bins;
    const int shift = intr_truncation_shift(L, filter_len);

    // Window [-shift, filter_len-1-shift] of the inverse transform keeps the
    // TR seed plus both tails of the projection correction; realized as a
    // linear phase before the inverse DFT.
    if (shift != 0) {
        for (int f = 0; f < nf; ++f) {
            const double ang = -2.0 * M_PI * static_cast<double>(f) * shift / nf;
            const Cx rot(std::cos(ang), std::sin(ang));
            for (int m = 0; m < M; ++m)
                for (int n = 0; n < N; ++n)
                    sp.prefilter[(static_cast<size_t>(m) * N + n) * nf + f] *= rot;
        }
    }
    CxVec time(static_cast<size_t>(M) * N * nf);
    dsp::idft_batch(nf, M * N, sp.prefilter.data(), time.data());

    p.taps.assign(static_cast<size_t>(M) * N * filter_len, Cx(0, 0));
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < N; ++n)
            for (int t = 0; t < filter_len; ++t)
                p.at(m, n, t) = time[(static_cast<size_t>(m) * N + n) * nf + t];
    normalize_unit_energy(p.taps);
    p.delay_reference = filter_len - 1 - shift;
    return p;
}

double prefilter_energy(const PrefilterSet& p) { return tensor_energy(p.taps); }

}  // namespace trbf
