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

#include "trbf/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

namespace trbf {

namespace {

using nlohmann::json;

json config_to_json(const ExperimentConfig& c) {
    json techs = json::array();
    for (Technique t : c.techniques) techs.push_back(to_string(t));
    return json{{"scenario", to_string(c.scenario)},
                {"M", c.num_antennas},
                {"N", c.num_users},
                {"L", c.num_taps},
                {"L_p", c.filter_len},
                {"L_E", c.eq_len},
                {"techniques", techs},
                {"correlated", c.correlated},
                {"snr_grid_db", c.snr_grid_db},
                {"num_symbols", c.num_symbols},
                {"num_realizations", c.num_realizations},
                {"master_seed", c.master_seed},
                {"output_path", c.output_path},
                {"rho", c.rho},
                {"gamma", c.gamma},
                {"sample_period_ns", c.sample_period_ns}};
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    c.scenario = scenario_from_string(j.at("scenario"));
    c.num_antennas = j.at("M");
    c.num_users = j.at("N");
    c.num_taps = j.at("L");
    c.filter_len = j.at("L_p");
    c.eq_len = j.value("L_E", 0);
    c.techniques.clear();
    for (const auto& t : j.at("techniques")) c.techniques.push_back(technique_from_string(t));
    c.correlated = j.at("correlated");
    c.snr_grid_db = j.value("snr_grid_db", std::vector<double>{});
    c.num_symbols = j.value("num_symbols", 100000L);
    c.num_realizations = j.at("num_realizations");
    c.master_seed = j.at("master_seed");
    c.output_path = j.value("output_path", std::string("out"));
    c.rho = j.value("rho", 1.0);
    c.gamma = j.value("gamma", 1.0);
    c.sample_period_ns = j.value("sample_period_ns", 0.5);
    return c;
}

}  // namespace

int ExperimentConfig::effective_filter_len(Technique t) const {
    switch (t) {
        case Technique::TR: return num_taps;
        case Technique::ETR: return num_taps + effective_eq_len() - 1;
        case Technique::INTR: return filter_len;
    }
    return filter_len;
}

ScenarioParams ExperimentConfig::scenario_params() const {
    ScenarioParams p = ScenarioParams::preset(scenario);
    p.num_taps = num_taps;
    p.gamma = gamma;
    p.sample_period_ns = sample_period_ns;
    return p;
}

void ExperimentConfig::validate() const {
    if (num_antennas < 1) throw ConfigError("M must be >= 1");
    if (num_users < 1) throw ConfigError("N must be >= 1");
    if (num_taps < 1) throw ConfigError("L must be >= 1");
    if (filter_len < num_taps) throw ConfigError("L_p must be >= L");
    if (eq_len < 0) throw ConfigError("L_E must be >= 0");
    if (techniques.empty()) throw ConfigError("at least one technique required");
    if (num_realizations < 1) throw ConfigError("num_realizations must be >= 1");
    if (!snr_grid_db.empty() && num_symbols != 0 && num_symbols < 1000)
        throw ConfigError("num_symbols must be >= 1000 for BER runs (or 0 to skip BER)");
    if (num_symbols < 0) throw ConfigError("num_symbols must be non-negative");
    for (double s : snr_grid_db)
        if (!std::isfinite(s)) throw ConfigError("snr_grid_db entries must be finite");
    if (rho <= 0.0) throw ConfigError("rho must be positive");
    if (gamma <= 0.0) throw ConfigError("gamma must be positive");
    scenario_params().validate();
    for (Technique t : techniques) {
        if (t == Technique::ETR && effective_eq_len() < 1)
            throw ConfigError("ETR needs L_p > L (or explicit L_E)");
    }
}

std::string ExperimentConfig::to_json_string() const { return config_to_json(*this).dump(2); }

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
    try {
        return config_from_json(json::parse(text));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config: " + path.string());
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return from_json_string(text);
}

void ExperimentConfig::save(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw ConfigError("cannot write config: " + path.string());
    os << to_json_string() << "\n";
}

Preset load_preset(const std::string& name_or_path) {
    namespace fs = std::filesystem;
    std::vector<fs::path> candidates;
    candidates.emplace_back(name_or_path);
    candidates.emplace_back(fs::path("presets") / (name_or_path + ".json"));
    if (const char* dir = std::getenv("TRBF_PRESET_DIR"))
        candidates.emplace_back(fs::path(dir) / (name_or_path + ".json"));

    for (const auto& p : candidates) {
        if (!fs::exists(p) || fs::is_directory(p)) continue;
        std::ifstream is(p);
        if (!is) continue;
        try {
            json j = json::parse(is);
            Preset preset;
            preset.name = j.value("name", p.stem().string());
            for (const auto& cell : j.at("cells")) preset.cells.push_back(config_from_json(cell));
            for (auto& c : preset.cells) c.validate();
            return preset;
        } catch (const json::exception& e) {
            throw ConfigError("preset parse error in " + p.string() + ": " + e.what());
        }
    }
    if (name_or_path == "smoke") return builtin_smoke_preset();
    throw ConfigError("preset not found: " + name_or_path);
}

Preset builtin_smoke_preset() {
    Preset p;
    p.name = "smoke";
    ExperimentConfig c;
    c.scenario = Scenario::CB;
    c.num_antennas = 4;
    c.num_users = 2;
    c.num_taps = 8;
    c.filter_len = 16;
    c.techniques = {Technique::TR, Technique::ETR, Technique::INTR};
    c.correlated = false;
    c.snr_grid_db = {10.0};
    c.num_symbols = 1000;
    c.num_realizations = 10;
    c.master_seed = 42;
    // Eight taps at the default 0.5 ns would not cover the CB delay spread.
    c.sample_period_ns = 2.5;
    p.cells.push_back(c);
    return p;
}

}  // namespace trbf
