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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trbf/channel.hpp"
#include "trbf/metrics.hpp"
#include "trbf/prefilter.hpp"

namespace trbf {

/// Binary channel cache: "TRCH" magic, version, M, N, L, scenario, seed,
/// then M*N*L little-endian complex-double pairs. A JSON sidecar at
/// <path>.json holds the full ScenarioParams and the correlated flag.
/// Round-trips are bit exact.
void save_channel_set(const ChannelSet& cs, const std::filesystem::path& path);
ChannelSet load_channel_set(const std::filesystem::path& path);

/// Binary pre-filter cache: "TRPF" magic, version, M, N, L_p, technique,
/// delay_reference, then the tap tensor.
void save_prefilter_set(const PrefilterSet& p, const std::filesystem::path& path);
PrefilterSet load_prefilter_set(const std::filesystem::path& path);

/// One per-realization record. Power fields are per-user means for the
/// realization; BER rows carry errors/bits instead.
struct ResultRow {
    Technique technique = Technique::TR;
    Scenario scenario = Scenario::CB;
    int num_antennas = 0;
    int num_users = 0;
    int num_taps = 0;
    int filter_len = 0;
    bool correlated = false;
    std::optional<double> snr_db;
    int realization = 0;
    std::optional<double> p_s, p_isi, p_iui;
    std::optional<std::int64_t> errors, bits;

    CellKey cell_key() const;
};

std::string csv_header();
std::string to_csv(const ResultRow& row);
ResultRow row_from_csv(const std::string& line);

/// Parses a results CSV (header line required). Lenient mode stops at the
/// first malformed row instead of throwing, for crash-truncated files.
std::vector<ResultRow> read_result_csv(const std::filesystem::path& path,
                                       bool lenient = false);

}  // namespace trbf
