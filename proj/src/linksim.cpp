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

#include "trbf/linksim.hpp"

#include <algorithm>
#include <cmath>

#include "trbf/dsp.hpp"

namespace trbf {

namespace {

constexpr double kWilsonZ = 1.959963984540054;  // 95%

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

double PowerDecomposition::mean_signal() const { return mean_of(signal); }
double PowerDecomposition::mean_isi() const { return mean_of(isi); }
double PowerDecomposition::mean_iui() const { return mean_of(iui); }

double BerResult::wilson_low() const {
    if (bits == 0) return 0.0;
    const double n = static_cast<double>(bits);
    const double p = ber();
    const double z2 = kWilsonZ * kWilsonZ;
    const double den = 1.0 + z2 / n;
    const double center = p + z2 / (2.0 * n);
    const double half = kWilsonZ * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return std::max(0.0, (center - half) / den);
}

double BerResult::wilson_high() const {
    if (bits == 0) return 1.0;
    const double n = static_cast<double>(bits);
    const double p = ber();
    const double z2 = kWilsonZ * kWilsonZ;
    const double den = 1.0 + z2 / n;
    const double center = p + z2 / (2.0 * n);
    const double half = kWilsonZ * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return std::min(1.0, (center + half) / den);
}

BerResult& BerResult::operator+=(const BerResult& other) {
    errors += other.errors;
    bits += other.bits;
    realizations += other.realizations;
    return *this;
}

CompositeResponse composite_response(const PrefilterSet& p, const ChannelSet& h) {
    if (p.num_antennas != h.num_antennas || p.num_users != h.num_users)
        throw std::invalid_argument("composite_response: dimension mismatch");
    const int M = h.num_antennas;
    const int N = h.num_users;
    const int L = h.num_taps;
    const int lp = p.filter_len;
    const int nf = L + lp - 1;

    CompositeResponse cr;
    cr.num_users = N;
    cr.response_len = nf;

    // Spectral evaluation of sum_m rc(p) * h; nf bins represent the linear
    // convolution exactly.
    CxVec H(static_cast<size_t>(M) * N * nf);
    CxVec P(static_cast<size_t>(M) * N * nf);
    dsp::dft_batch(nf, L, M * N, h.taps.data(), H.data());
    dsp::dft_batch(nf, lp, M * N, p.taps.data(), P.data());

    CxVec qhat(static_cast<size_t>(N) * N * nf, Cx(0, 0));
    for (int m = 0; m < M; ++m) {
        for (int a = 0; a < N; ++a) {
            const Cx* pa = P.data() + (static_cast<size_t>(m) * N + a) * nf;
            for (int b = 0; b < N; ++b) {
                const Cx* hb = H.data() + (static_cast<size_t>(m) * N + b) * nf;
                Cx* q = qhat.data() + (static_cast<size_t>(a) * N + b) * nf;
                for (int f = 0; f < nf; ++f) q[f] += std::conj(pa[f]) * hb[f];
            }
        }
    }
    // Time reversal of the stored filters contributes a common linear phase.
    for (int f = 0; f < nf; ++f) {
        const double ang = -2.0 * M_PI * static_cast<double>(f) * (lp - 1) / nf;
        const Cx rot(std::cos(ang), std::sin(ang));
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b)
                qhat[(static_cast<size_t>(a) * N + b) * nf + f] *= rot;
    }
    cr.q.resize(qhat.size());
    dsp::idft_batch(nf, N * N, qhat.data(), cr.q.data());

    cr.peak.resize(N);
    for (int n = 0; n < N; ++n) {
        if (p.technique == Technique::INTR) {
            const auto qnn = cr.response(n, n);
            int best = 0;
            double best_mag = -1.0;
            for (int t = 0; t < nf; ++t)
                if (abs2(qnn[t]) > best_mag) {
                    best_mag = abs2(qnn[t]);
                    best = t;
                }
            cr.peak[n] = best;
        } else {
            if (p.delay_reference < 0 || p.delay_reference >= nf)
                throw std::invalid_argument("composite_response: delay_reference out of range");
            cr.peak[n] = p.delay_reference;
        }
    }
    return cr;
}

PowerDecomposition power_decomposition(const CompositeResponse& q, double rho) {
    const int N = q.num_users;
    PowerDecomposition d;
    d.rho = rho;
    d.signal.resize(N);
    d.isi.resize(N);
    d.iui.resize(N);
    for (int n = 0; n < N; ++n) {
        const auto qnn = q.response(n, n);
        const double ps = abs2(qnn[q.peak[n]]);
        double self = 0.0;
        for (const Cx& z : qnn) self += abs2(z);
        double other = 0.0;
        for (int a = 0; a < N; ++a) {
            if (a == n) continue;
            for (const Cx& z : q.response(a, n)) other += abs2(z);
        }
        d.signal[n] = rho * ps;
        d.isi[n] = rho * (self - ps);
        d.iui[n] = rho * other;
    }
    return d;
}

CxVec awgn(std::span<const Cx> x, double variance, Rng& rng) {
    if (variance < 0.0) throw std::invalid_argument("awgn: negative variance");
    CxVec out(x.begin(), x.end());
    if (variance == 0.0) return out;
    for (Cx& z : out) z += rng.cnormal(variance);
    return out;
}

std::vector<BerResult> simulate_ber_grid(const PrefilterSet& p, const ChannelSet& h,
                                         std::span<const double> snr_db, const BerOptions& opt,
                                         Rng& rng) {
    if (opt.num_symbols < 1000)
        throw std::invalid_argument("simulate_ber: need at least 1000 symbols");
    for (double s : snr_db)
        if (!std::isfinite(s)) throw std::runtime_error("simulate_ber: invalid SNR");

    const CompositeResponse cr = composite_response(p, h);
    const int N = cr.num_users;
    const int Q = cr.response_len;
    const double rho = opt.rho;
    const double gamma = h.scenario.gamma;

    // Derotation phases from the known peak coefficients.
    std::vector<Cx> derot(N);
    for (int n = 0; n < N; ++n) {
        const Cx qp = cr.at(n, n, cr.peak[n]);
        const double mag = std::abs(qp);
        if (!(mag > 0.0)) throw std::runtime_error("simulate_ber: zero peak coefficient");
        derot[n] = std::conj(qp) / mag;
    }

    std::vector<double> sigma2(snr_db.size());
    for (size_t i = 0; i < snr_db.size(); ++i)
        sigma2[i] = rho * gamma / std::pow(10.0, snr_db[i] / 10.0);

    std::vector<BerResult> results(snr_db.size());
    for (size_t i = 0; i < snr_db.size(); ++i) {
        results[i].snr_db = snr_db[i];
        results[i].realizations = 1;
    }

    Rng sym_rng = rng.fork(1);
    std::vector<Rng> noise_rng;
    noise_rng.reserve(snr_db.size());
    for (size_t i = 0; i < snr_db.size(); ++i) noise_rng.push_back(rng.fork(1000 + i));

    const double sqrt_rho = std::sqrt(rho);
    const int min_peak = *std::min_element(cr.peak.begin(), cr.peak.end());
    const int max_peak = *std::max_element(cr.peak.begin(), cr.peak.end());

    auto detect = [&](const std::vector<Cx>& stats, const std::vector<signed char>& tx_bits) {
        for (size_t si = 0; si < snr_db.size(); ++si) {
            for (int n = 0; n < N; ++n) {
                const Cx y = sqrt_rho * stats[n] + noise_rng[si].cnormal(sigma2[si]);
                const double soft = (y * derot[n]).real();
                const signed char dec = soft >= 0.0 ? 1 : -1;
                results[si].bits++;
                if (dec != tx_bits[n]) results[si].errors++;
            }
        }
    };

    if (!opt.streaming) {
        // One detected symbol per composite-length block; every composite tap
        // sees an independent unit-power symbol from the shared streams.
        const int W = Q + (max_peak - min_peak);
        const int j_det = (Q - 1) - min_peak;  // stream offset 0
        std::vector<signed char> w(static_cast<size_t>(N) * W);
        std::vector<Cx> stats(N);
        std::vector<signed char> tx(N);
        for (long blk = 0; blk < opt.num_symbols; ++blk) {
            for (size_t k = 0; k < w.size(); ++k) {
                // one random bit per symbol
                w[k] = (sym_rng.next_u64() >> 63) ? 1 : -1;
            }
            for (int n = 0; n < N; ++n) {
                Cx acc(0, 0);
                for (int a = 0; a < N; ++a) {
                    const Cx* q = cr.q.data() + (static_cast<size_t>(a) * N + n) * Q;
                    const signed char* wa = w.data() + static_cast<size_t>(a) * W;
                    const int off = cr.peak[n] - min_peak;
                    for (int k = 0; k < Q; ++k) {
                        const Cx qv = q[Q - 1 - k];
                        acc += (wa[off + k] > 0) ? qv : -qv;
                    }
                }
                stats[n] = acc;
                tx[n] = w[static_cast<size_t>(n) * W + j_det];
            }
            detect(stats, tx);
        }
    } else {
        // Full-rate streaming convolution; every stream symbol is detected.
        const long S = opt.num_symbols;
        std::vector<signed char> streams(static_cast<size_t>(N) * S);
        for (auto& b : streams) b = (sym_rng.next_u64() >> 63) ? 1 : -1;
        std::vector<Cx> stats(N);
        std::vector<signed char> tx(N);
        for (long k = 0; k < S; ++k) {
            for (int n = 0; n < N; ++n) {
                const long t = k + cr.peak[n];
                Cx acc(0, 0);
                for (int a = 0; a < N; ++a) {
                    const Cx* q = cr.q.data() + (static_cast<size_t>(a) * N + n) * Q;
                    const signed char* sa = streams.data() + static_cast<size_t>(a) * S;
                    const long lo = std::max(0L, t - S + 1);
                    const long hi = std::min(static_cast<long>(Q - 1), t);
                    for (long tau = lo; tau <= hi; ++tau) {
                        const Cx qv = q[tau];
                        acc += (sa[t - tau] > 0) ? qv : -qv;
                    }
                }
                stats[n] = acc;
                tx[n] = streams[static_cast<size_t>(n) * S + k];
            }
            detect(stats, tx);
        }
    }
    return results;
}

BerResult simulate_ber(const PrefilterSet& p, const ChannelSet& h, double snr_db,
                       long num_symbols, Rng& rng, bool streaming) {
    BerOptions opt;
    opt.num_symbols = num_symbols;
    opt.streaming = streaming;
    const double grid[1] = {snr_db};
    return simulate_ber_grid(p, h, grid, opt, rng)[0];
}

}  // namespace trbf
