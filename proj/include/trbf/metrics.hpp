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

#include <map>
#include <span>
#include <string>
#include <vector>

#include "trbf/channel.hpp"
#include "trbf/linksim.hpp"
#include "trbf/types.hpp"

namespace trbf {

struct TheoreticalPrediction {
    enum class Basis { TrDesiredPower, EtrDesiredPowerBound };
    double p_s_pred = 0.0;
    Basis basis = Basis::TrDesiredPower;
    int num_antennas = 0;
    int num_users = 0;
    double rho = 1.0;
    double gamma = 1.0;
};

/// Large-array mean desired power M rho Gamma / N (the ETR value is bounded
/// by the same expression).
TheoreticalPrediction tr_signal_power_prediction(int num_antennas, int num_users, double rho,
                                                 double gamma);

/// Empirical cross-antenna tap moments T[m][m'][l] = E[h_m(l) conj(h_m'(l))].
struct MomentTable {
    int num_antennas = 0;
    int num_taps = 0;
    CxVec e;  // [m][m'][l]

    Cx& at(int m, int mp, int l) {
        return e[(static_cast<size_t>(m) * num_antennas + mp) * num_taps + l];
    }
    const Cx& at(int m, int mp, int l) const {
        return e[(static_cast<size_t>(m) * num_antennas + mp) * num_taps + l];
    }

    /// Averages over realizations and users.
    static MomentTable estimate(std::span<const ChannelSet> batch);
};

/// Approximate mean ISI and IUI powers from the quadruple/quintuple moment
/// sums with the rho/(M N Gamma) prefactor.
std::pair<double, double> tr_interference_prediction(const MomentTable& moments,
                                                     int num_antennas, int num_users, double rho,
                                                     double gamma);

/// One realization's achievable sum rate, ISI and IUI as Gaussian noise.
double sum_rate(const PowerDecomposition& decomp, double sigma_z2);

struct SumRateResult {
    std::vector<double> per_realization;
    double mean = 0.0;
    double standard_error = 0.0;  // NaN with a single realization
};

SumRateResult summarize_rates(std::span<const double> rates);

/// Streaming mean/SE aggregator for experiment cells.
struct SummaryStat {
    long count = 0;
    double mean = 0.0;
    double m2 = 0.0;  // sum of squared deviations (Welford)

    void add(double x);
    void merge(const SummaryStat& other);
    /// NaN when count < 2.
    double standard_error() const;
};

struct CellKey {
    std::string technique;
    std::string scenario;
    int num_antennas = 0;
    int num_users = 0;
    int num_taps = 0;
    int filter_len = 0;
    bool correlated = false;
    /// Millidecibels; kNoSnr for SNR-independent records.
    long snr_mdb = kNoSnr;

    static constexpr long kNoSnr = -1000000000L;
    auto tie() const {
        return std::tie(technique, scenario, num_antennas, num_users, num_taps, filter_len,
                        correlated, snr_mdb);
    }
    bool operator<(const CellKey& o) const { return tie() < o.tie(); }
    bool operator==(const CellKey& o) const { return tie() == o.tie(); }
};

/// Order-independent reduction of per-realization records into per-cell
/// statistics, keyed by metric name ("P_s", "ber", "rate", ...).
class Aggregator {
  public:
    void add(const CellKey& key, const std::string& metric, double value);
    void merge(const Aggregator& other);
    bool empty() const { return cells_.empty(); }

    const std::map<CellKey, std::map<std::string, SummaryStat>>& cells() const {
        if (cells_.empty()) throw InsufficientDataError("aggregate: empty stream");
        return cells_;
    }

  private:
    std::map<CellKey, std::map<std::string, SummaryStat>> cells_;
};

}  // namespace trbf
