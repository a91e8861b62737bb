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

#include "trbf/metrics.hpp"

#include <cmath>
#include <limits>

namespace trbf {

TheoreticalPrediction tr_signal_power_prediction(int num_antennas, int num_users, double rho,
                                                 double gamma) {
    if (num_antennas < 1 || num_users < 1 || rho <= 0.0 || gamma <= 0.0)
        throw std::invalid_argument("tr_signal_power_prediction: positive inputs required");
    TheoreticalPrediction pred;
    pred.p_s_pred = static_cast<double>(num_antennas) * rho * gamma / num_users;
    pred.basis = TheoreticalPrediction::Basis::TrDesiredPower;
    pred.num_antennas = num_antennas;
    pred.num_users = num_users;
    pred.rho = rho;
    pred.gamma = gamma;
    return pred;
}

MomentTable MomentTable::estimate(std::span<const ChannelSet> batch) {
    if (batch.empty()) throw InsufficientDataError("MomentTable: empty batch");
    const int M = batch[0].num_antennas;
    const int L = batch[0].num_taps;
    MomentTable t;
    t.num_antennas = M;
    t.num_taps = L;
    t.e.assign(static_cast<size_t>(M) * M * L, Cx(0, 0));
    long count = 0;
    for (const auto& cs : batch) {
        if (cs.num_antennas != M || cs.num_taps != L)
            throw std::invalid_argument("MomentTable: dimension mismatch in batch");
        for (int n = 0; n < cs.num_users; ++n) {
            for (int m = 0; m < M; ++m) {
                const auto hm = cs.cir(m, n);
                for (int mp = 0; mp < M; ++mp) {
                    const auto hp = cs.cir(mp, n);
                    Cx* row = t.e.data() + (static_cast<size_t>(m) * M + mp) * L;
                    for (int l = 0; l < L; ++l) row[l] += hm[l] * std::conj(hp[l]);
                }
            }
            ++count;
        }
    }
    for (Cx& z : t.e) z /= static_cast<double>(count);
    return t;
}

std::pair<double, double> tr_interference_prediction(const MomentTable& moments,
                                                     int num_antennas, int num_users, double rho,
                                                     double gamma) {
    if (moments.num_antennas != num_antennas)
        throw std::invalid_argument("tr_interference_prediction: moment table mismatch");
    const int M = num_antennas;
    const int L = moments.num_taps;

    // sum over lag of sum_{m,m',l'} T[m,m',l'] conj(T[m,m',l'+lag]), split by
    // lag == 0 (the coherent alignment excluded from ISI).
    double sum_all = 0.0, sum_zero = 0.0;
    for (int m = 0; m < M; ++m) {
        for (int mp = 0; mp < M; ++mp) {
            const Cx* row = moments.e.data() + (static_cast<size_t>(m) * M + mp) * L;
            for (int lag = -(L - 1); lag <= L - 1; ++lag) {
                Cx acc(0, 0);
                const int lo = std::max(0, -lag);
                const int hi = std::min(L - 1, L - 1 - lag);
                for (int lp = lo; lp <= hi; ++lp) acc += row[lp] * std::conj(row[lp + lag]);
                sum_all += acc.real();
                if (lag == 0) sum_zero += acc.real();
            }
        }
    }
    const double prefactor = rho / (static_cast<double>(M) * num_users * gamma);
    const double p_isi = prefactor * (sum_all - sum_zero);
    const double p_iui = prefactor * (num_users - 1) * sum_all;
    return {p_isi, p_iui};
}

double sum_rate(const PowerDecomposition& decomp, double sigma_z2) {
    if (!(sigma_z2 > 0.0)) throw std::invalid_argument("sum_rate: sigma_z2 must be positive");
    double r = 0.0;
    for (size_t n = 0; n < decomp.signal.size(); ++n)
        r += std::log2(1.0 + decomp.signal[n] / (decomp.isi[n] + decomp.iui[n] + sigma_z2));
    return r;
}

SumRateResult summarize_rates(std::span<const double> rates) {
    if (rates.empty()) throw InsufficientDataError("summarize_rates: empty input");
    SumRateResult res;
    res.per_realization.assign(rates.begin(), rates.end());
    SummaryStat st;
    for (double r : rates) st.add(r);
    res.mean = st.mean;
    res.standard_error = st.standard_error();
    return res;
}

void SummaryStat::add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
}

void SummaryStat::merge(const SummaryStat& other) {
    if (other.count == 0) return;
    if (count == 0) {
        *this = other;
        return;
    }
    const double d = other.mean - mean;
    const long n = count + other.count;
    m2 += other.m2 + d * d * static_cast<double>(count) * other.count / n;
    mean += d * static_cast<double>(other.count) / n;
    count = n;
}

double SummaryStat::standard_error() const {
    if (count < 2) return std::numeric_limits<double>::quiet_NaN();
    const double var = m2 / static_cast<double>(count - 1);
    return std::sqrt(var / static_cast<double>(count));
}

void Aggregator::add(const CellKey& key, const std::string& metric, double value) {
    cells_[key][metric].add(value);
}

void Aggregator::merge(const Aggregator& other) {
    for (const auto& [key, metrics] : other.cells_)
        for (const auto& [name, stat] : metrics) cells_[key][name].merge(stat);
}

}  // namespace trbf
