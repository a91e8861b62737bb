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

#include "trbf/config.hpp"
#include "trbf/io.hpp"

namespace trbf {

struct RunOptions {
    std::vector<ExperimentConfig> cells;
    std::filesystem::path out_dir = "out";
    int workers = 1;
    bool resume = false;
    std::optional<std::filesystem::path> channel_cache;  // load channels from here
    std::optional<std::uint64_t> seed_override;
};

/// Deterministic channel seed tag: cells sharing scenario, M, N, L,
/// correlation flag, gamma and sample period see identical realizations.
std::uint64_t channel_stream_tag(const ExperimentConfig& cell);

/// Cache filename for realization k of a cell's channel stream.
std::string channel_cache_name(const ExperimentConfig& cell, int realization);

/// Generates the channel for (cell, realization) from the seeded substream.
ChannelSet make_channel(const ExperimentConfig& cell, int realization);

/// Runs every (cell, realization) task, writes results.csv, summary.json and
/// MANIFEST under out_dir. Resume skips (cell, realization) groups already
/// complete in an existing results.csv and reproduces the same summary.
void run_experiment(const RunOptions& options);

/// Writes the channel caches for all cells into out_dir.
void generate_channel_cache(const RunOptions& options);

enum class FigureId { Fig5a, Fig5b, Fig6, Fig7a, Fig7b, Fig8 };

FigureId figure_from_string(const std::string& s);

/// Coverage failure: the summaries do not span the figure's grid.
struct CoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reshapes summary JSON files into a plot-ready CSV for one figure.
void emit_plot_data(FigureId figure, const std::vector<std::filesystem::path>& summaries,
                    const std::filesystem::path& out_csv);

/// Fast invariant bundle (kernels, channel statistics, nulling, round trips,
/// a miniature end-to-end run). Returns true when everything holds.
bool selftest(bool verbose);

}  // namespace trbf
