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

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace trbf {

using Cx = std::complex<double>;
using CxVec = std::vector<Cx>;

/// Dense complex matrix, row-major storage.
struct CxMat {
    int rows = 0;
    int cols = 0;
    CxVec data;

    CxMat() = default;
    CxMat(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c) {}

    Cx& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    const Cx& at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

/// Least-squares matrix is numerically rank deficient.
struct RankDeficiencyError : std::runtime_error {
    double condition_estimate;
    explicit RankDeficiencyError(double cond)
        : std::runtime_error("rank-deficient least-squares system, condition estimate " +
                             std::to_string(cond)),
          condition_estimate(cond) {}
};

/// Gram matrix of a projection is singular beyond the regularization threshold.
struct NearSingularError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An estimator was fed fewer samples/realizations than it needs.
struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Sample set has no dispersion where the estimator requires some.
struct DegenerateDistributionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent experiment configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Corrupt or mismatched serialized data.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double sq(double x) { return x * x; }
inline double abs2(Cx z) { return z.real() * z.real() + z.imag() * z.imag(); }

}  // namespace trbf
