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

#include <span>

#include "trbf/types.hpp"

namespace trbf::dsp {

/// Full linear convolution, length len(a) + len(b) - 1.
CxVec convolve(std::span<const Cx> a, std::span<const Cx> b);

/// DFT of x zero-padded to n_points: X(f) = sum_t x(t) exp(-j 2 pi f t / n).
/// Requires n_points >= len(x) so products of spectra represent linear
/// convolution without aliasing.
CxVec dft(std::span<const Cx> x, int n_points);

/// Inverse DFT: x(t) = (1/N) sum_f X(f) exp(+j 2 pi f t / N).
CxVec idft(std::span<const Cx> X);

/// Batched DFT: `count` sequences of `in_len` samples each, stored
/// contiguously, zero-padded to n_points. out must hold count * n_points.
void dft_batch(int n_points, int in_len, int count, const Cx* in, Cx* out);

/// Batched inverse DFT of `count` spectra of n_points bins each.
void idft_batch(int n_points, int count, const Cx* in, Cx* out);

/// Minimum-norm least squares: x minimizing ||Ax - b|| via column-pivoted QR.
/// Throws RankDeficiencyError when the R-diagonal ratio falls below 1e-12.
CxVec least_squares_solve(const CxMat& A, std::span<const Cx> b);

/// Orthogonal projection of v onto null(B^H):
///   w = (I - B (B^H B + ridge I)^{-1} B^H) v.
/// ridge = 0 gives the exact projector; a singular Gram matrix throws
/// NearSingularError. B may have zero columns (w = v).
CxVec nullspace_project(const CxMat& B, std::span<const Cx> v, double ridge = 0.0);

}  // namespace trbf::dsp
