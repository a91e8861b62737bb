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

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trbf/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitSelftest = 3;

std::vector<trbf::ExperimentConfig> collect_cells(const std::string& config_path,
                                                  const std::string& preset_name) {
    if (!config_path.empty() && !preset_name.empty())
        throw trbf::ConfigError("pass either --config or --preset, not both");
    if (!config_path.empty()) return {trbf::ExperimentConfig::load(config_path)};
    if (!preset_name.empty()) return trbf::load_preset(preset_name).cells;
    throw trbf::ConfigError("one of --config or --preset is required");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trbf: multi-user time-reversal beamforming link simulator"};
    app.require_subcommand(1);

    std::string config_path, preset_name, out_dir = "out", channels_dir, figure;
    std::vector<std::string> summary_paths;
    std::uint64_t seed = 0;
    bool seed_set = false, resume = false, quiet = false;
    int workers = 1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config JSON (single cell)");
        cmd->add_option("--preset", preset_name, "named preset under presets/");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed, "override master seed")->each([&](const std::string&) {
            seed_set = true;
        });
        cmd->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    };

    CLI::App* run = app.add_subcommand("run", "run an experiment and write CSV/JSON results");
    add_common(run);
    run->add_flag("--resume", resume, "skip realizations already in results.csv");
    run->add_option("--channels", channels_dir, "load channel realizations from this cache dir");

    CLI::App* gen = app.add_subcommand("gen-channels", "write the channel cache for a config");
    add_common(gen);

    CLI::App* plot = app.add_subcommand("emit-plot", "reshape summaries into plot CSV");
    plot->add_option("--figure", figure, "fig5a|fig5b|fig6|fig7a|fig7b|fig8")->required();
    plot->add_option("--summary", summary_paths, "summary.json files")->required();
    plot->add_option("--out", out_dir, "output CSV path");

    CLI::App* self = app.add_subcommand("selftest", "run the built-in invariant checks");
    self->add_flag("--quiet", quiet, "only print failures");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(run) || app.got_subcommand(gen)) {
            trbf::RunOptions opt;
            opt.cells = collect_cells(config_path, preset_name);
            opt.out_dir = out_dir;
            opt.workers = workers;
            opt.resume = resume;
            if (seed_set) opt.seed_override = seed;
            if (!channels_dir.empty()) opt.channel_cache = channels_dir;
            if (app.got_subcommand(gen))
                trbf::generate_channel_cache(opt);
            else
                trbf::run_experiment(opt);
            return kExitOk;
        }
        if (app.got_subcommand(plot)) {
            std::vector<std::filesystem::path> paths(summary_paths.begin(), summary_paths.end());
            const std::filesystem::path out =
                out_dir == "out" ? std::filesystem::path(figure + ".csv")
                                 : std::filesystem::path(out_dir);
            trbf::emit_plot_data(trbf::figure_from_string(figure), paths, out);
            return kExitOk;
        }
        if (app.got_subcommand(self)) {
            const bool ok = trbf::selftest(!quiet);
            std::cout << (ok ? "selftest: all checks passed" : "selftest: FAILURES") << "\n";
            return ok ? kExitOk : kExitSelftest;
        }
    } catch (const trbf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
