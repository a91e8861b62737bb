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
#include <string>
#include <vector>

#include "trbf/channel.hpp"
#include "trbf/prefilter.hpp"

namespace trbf {

/// One experiment cell: a single parameter combination. Presets bundle
/// several cells. Round-trips losslessly through JSON.
struct ExperimentConfig {
    Scenario scenario = Scenario::CB;
    int num_antennas = 64;      // M
    int num_users = 2;          // N
    int num_taps = 60;          // L
    int filter_len = 60;        // L_p (ETR derives L_E = L_p - L + 1)
    int eq_len = 0;             // L_E override; 0 derives from filter_len
    std::vector<Technique> techniques = {Technique::TR};
    bool correlated = false;
    std::vector<double> snr_grid_db;
    long num_symbols = 100000;
    int num_realizations = 500;
    std::uint64_t master_seed = 1;
    std::string output_path = "out";
    double rho = 1.0;
    double gamma = 1.0;
    double sample_period_ns = 0.5;

    int effective_eq_len() const { return eq_len > 0 ? eq_len : filter_len - num_taps + 1; }
    int effective_filter_len(Technique t) const;
    ScenarioParams scenario_params() const;
    void validate() const;

    std::string to_json_string() const;
    static ExperimentConfig from_json_string(const std::string& text);
    static ExperimentConfig load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

struct Preset {
    std::string name;
    std::vector<ExperimentConfig> cells;
};

/// Loads a preset by literal path or by name under presets/<name>.json
/// (relative to the working directory or $TRBF_PRESET_DIR).
Preset load_preset(const std::string& name_or_path);

/// The in-repo smoke preset, also available without preset files.
Preset builtin_smoke_preset();

}  // namespace trbf
