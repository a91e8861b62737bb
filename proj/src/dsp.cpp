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

#include "trbf/dsp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace trbf::dsp {

namespace {

using EMat = Eigen::Matrix<Cx, Eigen::Dynamic, Eigen::Dynamic>;
using EVec = Eigen::Matrix<Cx, Eigen::Dynamic, 1>;

Eigen::Map<const EVec> as_evec(std::span<const Cx> v) {
    return Eigen::Map<const EVec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

EMat to_eigen(const CxMat& A) {
    EMat M(A.rows, A.cols);
    for (int r = 0; r < A.rows; ++r)
        for (int c = 0; c < A.cols; ++c) M(r, c) = A.at(r, c);
    return M;
}

// Twiddle matrices are cached per transform size; sizes here are L + L_p - 1
// (roughly 120-180 bins), where a dense matrix-vector product is both exact
// per the DFT definition and fast enough.
class TwiddleCache {
  public:
    std::shared_ptr<const EMat> forward(int n) { return get(fwd_, n, -1.0); }
    std::shared_ptr<const EMat> inverse(int n) { return get(inv_, n, +1.0); }

  private:
    std::shared_ptr<const EMat> get(std::map<int, std::shared_ptr<const EMat>>& cache, int n,
                                    double sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache.find(n);
        if (it != cache.end()) return it->second;
        auto M = std::make_shared<EMat>(n, n);
        for (int f = 0; f < n; ++f)
            for (int t = 0; t < n; ++t) {
                const double ang = sign * 2.0 * M_PI * static_cast<double>(f) *
                                   static_cast<double>(t) / static_cast<double>(n);
                (*M)(f, t) = Cx(std::cos(ang), std::sin(ang));
            }
        cache[n] = M;
        return M;
    }

    std::mutex mutex_;
    std::map<int, std::shared_ptr<const EMat>> fwd_;
    std::map<int, std::shared_ptr<const EMat>> inv_;
};

TwiddleCache& twiddles() {
    static TwiddleCache cache;
    return cache;
}

}  // namespace

CxVec convolve(std::span<const Cx> a, std::span<const Cx> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("convolve: empty input");
    CxVec out(a.size() + b.size() - 1, Cx(0.0, 0.0));
    for (size_t i = 0; i < a.size(); ++i) {
        const Cx ai = a[i];
        for (size_t j = 0; j < b.size(); ++j) out[i + j] += ai * b[j];
    }
    return out;
}

CxVec dft(std::span<const Cx> x, int n_points) {
    if (x.empty()) throw std::invalid_argument("dft: empty input");
    if (n_points < static_cast<int>(x.size()))
        throw std::invalid_argument("dft: n_points shorter than input would alias");
    CxVec out(n_points);
    dft_batch(n_points, static_cast<int>(x.size()), 1, x.data(), out.data());
    return out;
}

CxVec idft(std::span<const Cx> X) {
    if (X.empty()) throw std::invalid_argument("idft: empty input");
    CxVec out(X.size());
    idft_batch(static_cast<int>(X.size()), 1, X.data(), out.data());
    return out;
}

void dft_batch(int n_points, int in_len, int count, const Cx* in, Cx* out) {
    auto W = twiddles().forward(n_points);
    Eigen::Map<const EMat> X(in, in_len, count);
    Eigen::Map<EMat> Y(out, n_points, count);
    Y.noalias() = W->leftCols(in_len) * X;
}

void idft_batch(int n_points, int count, const Cx* in, Cx* out) {
    auto W = twiddles().inverse(n_points);
    Eigen::Map<const EMat> X(in, n_points, count);
    Eigen::Map<EMat> Y(out, n_points, count);
    Y.noalias() = (*W) * X;
    Y *= 1.0 / static_cast<double>(n_points);
}

CxVec least_squares_solve(const CxMat& A, std::span<const Cx> b) {
    if (A.rows < A.cols) throw std::invalid_argument("least_squares_solve: underdetermined");
    if (static_cast<int>(b.size()) != A.rows)
        throw std::invalid_argument("least_squares_solve: size mismatch");
    EMat M = to_eigen(A);
    Eigen::ColPivHouseholderQR<EMat> qr(M);
    const auto& R = qr.matrixR();
    double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < A.cols; ++k) {
        const double d = std::abs(R(k, k));
        dmax = std::max(dmax, d);
        dmin = std::min(dmin, d);
    }
    if (!(dmin > 1e-12 * dmax))
        throw RankDeficiencyError(dmax / (dmin > 0.0 ? dmin : std::nextafter(0.0, 1.0)));
    EVec x = qr.solve(as_evec(b));
    return CxVec(x.data(), x.data() + x.size());
}

CxVec nullspace_project(const CxMat& B, std::span<const Cx> v, double ridge) {
    if (static_cast<int>(v.size()) != B.rows && B.cols > 0)
        throw std::invalid_argument("nullspace_project: size mismatch");
    if (B.cols == 0) return CxVec(v.begin(), v.end());
    if (B.rows <= B.cols)
        throw std::invalid_argument("nullspace_project: need more rows than columns");
    EMat Bm = to_eigen(B);
    EVec vv = as_evec(v);
    EMat G = Bm.adjoint() * Bm;
    if (ridge > 0.0) G.diagonal().array() += ridge;
    Eigen::LDLT<EMat> ldlt(G);
    const auto& D = ldlt.vectorD();
    double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < D.size(); ++k) {
        const double d = std::abs(D(k));
        dmax = std::max(dmax, d);
        dmin = std::min(dmin, d);
    }
    if (ldlt.info() != Eigen::Success || !(dmin > 1e-14 * dmax))
        throw NearSingularError("nullspace_project: singular Gram matrix");
    EVec x = ldlt.solve(Bm.adjoint() * vv);
    EVec w = vv - Bm * x;
    return CxVec(w.data(), w.data() + w.size());
}

}  // namespace trbf::dsp
