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

#include "trbf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <unistd.h>

#include <json.hpp>

#include "trbf/dsp.hpp"
#include "trbf/linksim.hpp"
#include "trbf/metrics.hpp"

namespace trbf {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint64_t kChannelStream = 0x4348414eULL;  // stream tags
constexpr std::uint64_t kBerStream = 0x42455200ULL;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string canonical_channel_id(const ExperimentConfig& c) {
    std::ostringstream os;
    os << to_string(c.scenario) << '|' << c.num_antennas << '|' << c.num_users << '|'
       << c.num_taps << '|' << (c.correlated ? 1 : 0) << '|' << c.gamma << '|'
       << c.sample_period_ns;
    return os.str();
}

struct Task {
    int cell_idx;
    int realization;
};

struct TaskResult {
    std::vector<ResultRow> rows;
    bool done = false;
};

ResultRow base_row(const ExperimentConfig& cell, Technique tech, int realization) {
    ResultRow r;
    r.technique = tech;
    r.scenario = cell.scenario;
    r.num_antennas = cell.num_antennas;
    r.num_users = cell.num_users;
    r.num_taps = cell.num_taps;
    r.filter_len = cell.effective_filter_len(tech);
    r.correlated = cell.correlated;
    r.realization = realization;
    return r;
}

std::vector<ResultRow> run_task(const ExperimentConfig& cell, int realization,
                                const std::optional<fs::path>& cache_dir) {
    ChannelSet channels;
    if (cache_dir) {
        const fs::path p = *cache_dir / channel_cache_name(cell, realization);
        channels = load_channel_set(p);
        if (channels.num_antennas != cell.num_antennas || channels.num_users != cell.num_users ||
            channels.num_taps != cell.num_taps || channels.correlated != cell.correlated ||
            channels.scenario.name != cell.scenario)
            throw FormatError("channel cache header mismatch: " + p.string());
    } else {
        channels = make_channel(cell, realization);
    }

    std::vector<ResultRow> rows;
    for (Technique tech : cell.techniques) {
        PrefilterSet p;
        switch (tech) {
            case Technique::TR: p = tr_prefilter(channels); break;
            case Technique::ETR: p = etr_prefilter(channels, cell.effective_eq_len()); break;
            case Technique::INTR: p = intr_prefilter(channels, cell.filter_len); break;
        }
        const CompositeResponse q = composite_response(p, channels);
        const PowerDecomposition d = power_decomposition(q, cell.rho);
        for (int n = 0; n < cell.num_users; ++n) {
            ResultRow r = base_row(cell, tech, realization);
            r.p_s = d.signal[n];
            r.p_isi = d.isi[n];
            r.p_iui = d.iui[n];
            rows.push_back(std::move(r));
        }
        if (!cell.snr_grid_db.empty() && cell.num_symbols > 0) {
            Rng rng = Rng::substream(
                cell.master_seed, static_cast<std::uint64_t>(realization),
                kBerStream ^ fnv1a(canonical_channel_id(cell) + "|" + to_string(tech) + "|" +
                                   std::to_string(p.filter_len)));
            BerOptions opt;
            opt.rho = cell.rho;
            opt.num_symbols = cell.num_symbols;
            const auto results = simulate_ber_grid(p, channels, cell.snr_grid_db, opt, rng);
            for (const auto& br : results) {
                ResultRow r = base_row(cell, tech, realization);
                r.snr_db = br.snr_db;
                r.errors = br.errors;
                r.bits = br.bits;
                rows.push_back(std::move(r));
            }
        }
    }
    return rows;
}

int expected_rows_per_task(const ExperimentConfig& cell) {
    const int ber_rows =
        cell.num_symbols > 0 ? static_cast<int>(cell.snr_grid_db.size()) : 0;
    return static_cast<int>(cell.techniques.size()) * (cell.num_users + ber_rows);
}

void write_manifest(const fs::path& dir, const std::string& status, size_t cells,
                    long expected_rows, long written_rows, std::uint64_t seed) {
    std::ofstream os(dir / "MANIFEST", std::ios::trunc);
    os << "status=" << status << "\n"
       << "master_seed=" << seed << "\n"
       << "cells=" << cells << "\n"
       << "expected_rows=" << expected_rows << "\n"
       << "written_rows=" << written_rows << "\n";
}

json stat_to_json(const SummaryStat& s) {
    json j;
    j["mean"] = s.mean;
    const double se = s.standard_error();
    if (std::isnan(se))
        j["se"] = nullptr;
    else
        j["se"] = se;
    j["count"] = s.count;
    return j;
}

/// Builds summary.json content from the full row set plus the cell configs
/// (needed for the SNR grid of the per-realization rate reduction).
json build_summary(const std::vector<ExperimentConfig>& cells,
                   const std::vector<ResultRow>& rows) {
    // Power statistics (per-user-realization samples) and pooled BER counts.
    std::map<CellKey, std::map<std::string, SummaryStat>> stats;
    std::map<CellKey, std::pair<std::int64_t, std::int64_t>> counts;  // errors, bits
    std::map<CellKey, std::pair<double, double>> norms;               // rho, gamma per cell
    for (const auto& cfg : cells)
        for (Technique tech : cfg.techniques) {
            ResultRow probe = base_row(cfg, tech, 0);
            norms[probe.cell_key()] = {cfg.rho, cfg.gamma};
        }

    for (const auto& r : rows) {
        const CellKey key = r.cell_key();
        if (r.p_s) {
            const auto it = norms.find(key);
            const double rg = it != norms.end() ? it->second.first * it->second.second : 1.0;
            auto& m = stats[key];
            m["P_s"].add(*r.p_s);
            m["P_isi"].add(*r.p_isi);
            m["P_iui"].add(*r.p_iui);
            m["P_s_norm"].add(*r.p_s / rg);
            m["P_isi_norm"].add(*r.p_isi / rg);
            m["P_iui_norm"].add(*r.p_iui / rg);
        }
        if (r.errors) {
            auto& c = counts[key];
            c.first += *r.errors;
            c.second += *r.bits;
            stats[key]["ber"].add(static_cast<double>(*r.errors) /
                                  static_cast<double>(*r.bits));
        }
    }

    // Per-realization sum rates from the per-user power rows of each cell.
    for (const auto& cfg : cells) {
        for (Technique tech : cfg.techniques) {
            const CellKey power_key = base_row(cfg, tech, 0).cell_key();
            // realization -> per-user triples
            std::map<int, PowerDecomposition> per_real;
            for (const auto& r : rows) {
                if (!r.p_s || !(r.cell_key() == power_key)) continue;
                auto& d = per_real[r.realization];
                d.rho = cfg.rho;
                d.signal.push_back(*r.p_s);
                d.isi.push_back(*r.p_isi);
                d.iui.push_back(*r.p_iui);
            }
            for (double snr : cfg.snr_grid_db) {
                const double sigma2 = cfg.rho * cfg.gamma / std::pow(10.0, snr / 10.0);
                CellKey key = power_key;
                key.snr_mdb = static_cast<long>(std::llround(snr * 1000.0));
                for (const auto& [k, d] : per_real)
                    stats[key]["rate"].add(sum_rate(d, sigma2));
            }
        }
    }

    json out = json::array();
    for (const auto& [key, metrics] : stats) {
        json cell;
        cell["technique"] = key.technique;
        cell["scenario"] = key.scenario;
        cell["M"] = key.num_antennas;
        cell["N"] = key.num_users;
        cell["L"] = key.num_taps;
        cell["L_p"] = key.filter_len;
        cell["correlated"] = key.correlated;
        if (key.snr_mdb == CellKey::kNoSnr)
            cell["snr_db"] = nullptr;
        else
            cell["snr_db"] = static_cast<double>(key.snr_mdb) / 1000.0;
        json ms;
        for (const auto& [name, st] : metrics) ms[name] = stat_to_json(st);
        cell["metrics"] = ms;
        auto it = counts.find(key);
        if (it != counts.end()) {
            BerResult br;
            br.errors = it->second.first;
            br.bits = it->second.second;
            cell["errors"] = br.errors;
            cell["bits"] = br.bits;
            cell["ber"] = br.ber();
            cell["wilson_low"] = br.wilson_low();
            cell["wilson_high"] = br.wilson_high();
        }
        out.push_back(std::move(cell));
    }
    return json{{"cells", out}};
}

}  // namespace

std::uint64_t channel_stream_tag(const ExperimentConfig& cell) {
    return kChannelStream ^ fnv1a(canonical_channel_id(cell));
}

std::string channel_cache_name(const ExperimentConfig& cell, int realization) {
    std::ostringstream os;
    os << "ch_" << to_string(cell.scenario) << "_M" << cell.num_antennas << "_N"
       << cell.num_users << "_L" << cell.num_taps << "_c" << (cell.correlated ? 1 : 0) << "_s"
       << cell.master_seed << "_r" << realization << ".trch";
    return os.str();
}

ChannelSet make_channel(const ExperimentConfig& cell, int realization) {
    Rng rng = Rng::substream(cell.master_seed, static_cast<std::uint64_t>(realization),
                             channel_stream_tag(cell));
    const ArrayGeometry array = ArrayGeometry::for_antennas(cell.num_antennas);
    ChannelSet cs = generate_channel_set(cell.scenario_params(), array, cell.num_users,
                                         cell.correlated, rng);
    cs.seed = cell.master_seed;
    return cs;
}

void generate_channel_cache(const RunOptions& options) {
    fs::create_directories(options.out_dir);
    std::set<std::string> written;
    for (auto cell : options.cells) {
        if (options.seed_override) cell.master_seed = *options.seed_override;
        cell.validate();
        for (int k = 0; k < cell.num_realizations; ++k) {
            const std::string name = channel_cache_name(cell, k);
            if (!written.insert(name).second) continue;  // shared across cells
            save_channel_set(make_channel(cell, k), options.out_dir / name);
        }
    }
}

void run_experiment(const RunOptions& options) {
    if (options.cells.empty()) throw ConfigError("no experiment cells");
    std::vector<ExperimentConfig> cells = options.cells;
    for (auto& c : cells) {
        if (options.seed_override) c.master_seed = *options.seed_override;
        c.validate();
    }

    fs::create_directories(options.out_dir);
    const fs::path csv_path = options.out_dir / "results.csv";

    // Resume: collect rows of already-complete (cell, realization) groups.
    std::map<std::pair<int, int>, std::vector<ResultRow>> prior;
    if (options.resume && fs::exists(csv_path)) {
        std::vector<ResultRow> old_rows = read_result_csv(csv_path, /*lenient=*/true);
        // Match rows to (cell, realization) by the row key set of each cell.
        for (int ci = 0; ci < static_cast<int>(cells.size()); ++ci) {
            std::set<CellKey> cell_keys;
            for (Technique tech : cells[ci].techniques) {
                CellKey pk = base_row(cells[ci], tech, 0).cell_key();
                cell_keys.insert(pk);
                if (cells[ci].num_symbols > 0)
                    for (double s : cells[ci].snr_grid_db) {
                        CellKey bk = pk;
                        bk.snr_mdb = static_cast<long>(std::llround(s * 1000.0));
                        cell_keys.insert(bk);
                    }
            }
            for (const auto& r : old_rows)
                if (cell_keys.count(r.cell_key()))
                    prior[{ci, r.realization}].push_back(r);
        }
        // Keep only complete groups.
        for (auto it = prior.begin(); it != prior.end();) {
            const int need = expected_rows_per_task(cells[it->first.first]);
            if (static_cast<int>(it->second.size()) != need ||
                it->first.second >= cells[it->first.first].num_realizations)
                it = prior.erase(it);
            else
                ++it;
        }
    }

    std::vector<Task> tasks;
    long expected_rows = 0;
    for (int ci = 0; ci < static_cast<int>(cells.size()); ++ci) {
        expected_rows += static_cast<long>(expected_rows_per_task(cells[ci])) *
                         cells[ci].num_realizations;
        for (int k = 0; k < cells[ci].num_realizations; ++k) tasks.push_back({ci, k});
    }

    write_manifest(options.out_dir, "running", cells.size(), expected_rows, 0,
                   cells.front().master_seed);

    std::vector<TaskResult> results(tasks.size());
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex mu;
    std::condition_variable cv;
    std::string error_text;

    auto worker = [&]() {
        for (;;) {
            const size_t t = next.fetch_add(1);
            if (t >= tasks.size() || failed.load()) return;
            try {
                std::vector<ResultRow> rows;
                auto it = prior.find({tasks[t].cell_idx, tasks[t].realization});
                if (it != prior.end())
                    rows = it->second;
                else
                    rows = run_task(cells[tasks[t].cell_idx], tasks[t].realization,
                                    options.channel_cache);
                {
                    std::lock_guard<std::mutex> lock(mu);
                    results[t].rows = std::move(rows);
                    results[t].done = true;
                }
                cv.notify_all();
            } catch (const std::exception& e) {
                {
                    std::lock_guard<std::mutex> lock(mu);
                    error_text = e.what();
                }
                failed.store(true);
                cv.notify_all();
                return;
            }
        }
    };

    const int nworkers = std::max(1, options.workers);
    std::vector<std::thread> pool;
    pool.reserve(nworkers);
    for (int i = 0; i < nworkers; ++i) pool.emplace_back(worker);

    // Flush completed tasks in order: a killed run leaves a valid prefix.
    std::ofstream csv(csv_path, std::ios::trunc);
    csv << csv_header() << "\n";
    long written_rows = 0;
    size_t flushed = 0;
    std::vector<ResultRow> all_rows;
    {
        std::unique_lock<std::mutex> lock(mu);
        while (flushed < tasks.size()) {
            cv.wait(lock, [&] { return failed.load() || results[flushed].done; });
            if (failed.load() && !results[flushed].done) break;
            while (flushed < tasks.size() && results[flushed].done) {
                for (const auto& r : results[flushed].rows) {
                    csv << to_csv(r) << "\n";
                    all_rows.push_back(r);
                    ++written_rows;
                }
                results[flushed].rows.clear();
                ++flushed;
                if (flushed % 16 == 0 || flushed == tasks.size()) {
                    csv.flush();
                    write_manifest(options.out_dir, "running", cells.size(), expected_rows,
                                   written_rows, cells.front().master_seed);
                }
            }
        }
    }
    for (auto& th : pool) th.join();
    csv.flush();

    if (failed.load()) {
        write_manifest(options.out_dir, "incomplete", cells.size(), expected_rows, written_rows,
                       cells.front().master_seed);
        throw std::runtime_error("experiment failed: " + error_text);
    }

    const json summary = build_summary(cells, all_rows);
    std::ofstream js(options.out_dir / "summary.json", std::ios::trunc);
    js << summary.dump(2) << "\n";
    js.flush();
    {
        std::ofstream sc(options.out_dir / "summary.csv", std::ios::trunc);
        sc << "technique,scenario,M,N,L,L_p,correlated,snr_db,metric,mean,se,count\n";
        for (const auto& c : summary.at("cells")) {
            std::ostringstream prefix;
            prefix << c.at("technique").get<std::string>() << ','
                   << c.at("scenario").get<std::string>() << ',' << c.at("M") << ','
                   << c.at("N") << ',' << c.at("L") << ',' << c.at("L_p") << ','
                   << (c.at("correlated").get<bool>() ? 1 : 0) << ',';
            std::string snr;
            if (!c.at("snr_db").is_null()) snr = std::to_string(c.at("snr_db").get<double>());
            for (const auto& [name, st] : c.at("metrics").items()) {
                sc << prefix.str() << snr << ',' << name << ',' << st.at("mean").get<double>()
                   << ',';
                if (!st.at("se").is_null()) sc << st.at("se").get<double>();
                sc << ',' << st.at("count").get<long>() << "\n";
            }
            if (c.contains("ber"))
                sc << prefix.str() << snr << ",ber_pooled," << c.at("ber").get<double>() << ",,"
                   << c.at("bits").get<long long>() << "\n";
        }
    }
    write_manifest(options.out_dir, "complete", cells.size(), expected_rows, written_rows,
                   cells.front().master_seed);
}

FigureId figure_from_string(const std::string& s) {
    if (s == "fig5a") return FigureId::Fig5a;
    if (s == "fig5b") return FigureId::Fig5b;
    if (s == "fig6") return FigureId::Fig6;
    if (s == "fig7a") return FigureId::Fig7a;
    if (s == "fig7b") return FigureId::Fig7b;
    if (s == "fig8") return FigureId::Fig8;
    throw ConfigError("unknown figure id: " + s);
}

namespace {

struct SummaryCell {
    std::string technique, scenario;
    int M = 0, N = 0, L = 0, L_p = 0;
    bool correlated = false;
    std::optional<double> snr_db;
    std::map<std::string, std::pair<double, double>> metrics;  // mean, se
    std::optional<double> ber, wilson_low, wilson_high;
};

std::vector<SummaryCell> load_summaries(const std::vector<fs::path>& paths) {
    std::vector<SummaryCell> cells;
    for (const auto& p : paths) {
        std::ifstream is(p);
        if (!is) throw FormatError("cannot open summary: " + p.string());
        json j = json::parse(is);
        for (const auto& c : j.at("cells")) {
            SummaryCell sc;
            sc.technique = c.at("technique");
            sc.scenario = c.at("scenario");
            sc.M = c.at("M");
            sc.N = c.at("N");
            sc.L = c.at("L");
            sc.L_p = c.at("L_p");
            sc.correlated = c.at("correlated");
            if (!c.at("snr_db").is_null()) sc.snr_db = c.at("snr_db").get<double>();
            for (const auto& [name, st] : c.at("metrics").items()) {
                const double mean = st.at("mean");
                const double se = st.at("se").is_null() ? 0.0 : st.at("se").get<double>();
                sc.metrics[name] = {mean, se};
            }
            if (c.contains("ber")) {
                sc.ber = c.at("ber").get<double>();
                sc.wilson_low = c.at("wilson_low").get<double>();
                sc.wilson_high = c.at("wilson_high").get<double>();
            }
            cells.push_back(std::move(sc));
        }
    }
    return cells;
}

void require_covered(const std::vector<std::string>& missing, const std::string& figure) {
    if (missing.empty()) return;
    std::string msg = "missing grid cells for " + figure + ":";
    for (const auto& m : missing) msg += " [" + m + "]";
    throw CoverageError(msg);
}

}  // namespace

void emit_plot_data(FigureId figure, const std::vector<fs::path>& summaries,
                    const fs::path& out_csv) {
    const auto cells = load_summaries(summaries);
    std::ofstream os(out_csv, std::ios::trunc);
    if (!os) throw FormatError("cannot write " + out_csv.string());
    std::vector<std::string> missing;

    auto power_cell = [&](const std::string& tech, int lp) -> const SummaryCell* {
        for (const auto& c : cells)
            if (c.technique == tech && !c.snr_db && c.L_p == lp && c.metrics.count("P_isi_norm"))
                return &c;
        return nullptr;
    };

    switch (figure) {
        case FigureId::Fig5a:
        case FigureId::Fig5b: {
            const bool etr = figure == FigureId::Fig5a;
            const std::string tech = etr ? "ETR" : "INTR";
            const std::string metric = etr ? "P_isi_norm" : "P_iui_norm";
            const std::vector<int> grid = etr ? std::vector<int>{90, 120}
                                              : std::vector<int>{60, 90, 120};
            os << "L_p,mean_" << metric << ",se\n";
            for (int lp : grid) {
                const SummaryCell* c = power_cell(tech, lp);
                if (!c) {
                    missing.push_back(tech + " L_p=" + std::to_string(lp));
                    continue;
                }
                const auto& [mean, se] = c->metrics.at(metric);
                os << lp << ',' << mean << ',' << se << "\n";
            }
            require_covered(missing, etr ? "fig5a" : "fig5b");
            break;
        }
        case FigureId::Fig6:
        case FigureId::Fig7a:
        case FigureId::Fig7b: {
            os << "series,snr_db,ber,wilson_low,wilson_high\n";
            std::set<std::string> seen_tech;
            long rows = 0;
            for (const auto& c : cells) {
                if (!c.snr_db || !c.ber) continue;
                if (figure == FigureId::Fig7a && !(c.correlated && c.N == 5)) continue;
                if (figure == FigureId::Fig7b && !(c.correlated && c.M == 64)) continue;
                std::ostringstream series;
                series << c.technique << "_M" << c.M << "_N" << c.N << "_Lp" << c.L_p
                       << (c.correlated ? "_corr" : "_uncorr");
                os << series.str() << ',' << *c.snr_db << ',' << *c.ber << ',' << *c.wilson_low
                   << ',' << *c.wilson_high << "\n";
                seen_tech.insert(c.technique);
                ++rows;
            }
            if (figure == FigureId::Fig6)
                for (const std::string& t : {"TR", "ETR", "INTR"})
                    if (!seen_tech.count(t)) missing.push_back(t + " BER cells");
            if (rows == 0) missing.push_back("any BER cells");
            require_covered(missing, "ber figure");
            break;
        }
        case FigureId::Fig8: {
            os << "series,snr_db,rate_mean,rate_se\n";
            std::set<std::string> seen;
            for (const auto& c : cells) {
                if (!c.snr_db || !c.metrics.count("rate")) continue;
                std::ostringstream series;
                series << c.technique << "_M" << c.M << "_N" << c.N;
                const auto& [mean, se] = c.metrics.at("rate");
                os << series.str() << ',' << *c.snr_db << ',' << mean << ',' << se << "\n";
                seen.insert(c.technique);
            }
            for (const std::string& t : {"TR", "INTR"})
                if (!seen.count(t)) missing.push_back(t + " rate cells");
            require_covered(missing, "fig8");
            break;
        }
    }
}

namespace {

bool check(bool ok, const char* what, bool verbose, bool& all_ok) {
    if (verbose || !ok) std::cout << (ok ? "[ok]   " : "[FAIL] ") << what << "\n";
    all_ok = all_ok && ok;
    return ok;
}

}  // namespace

bool selftest(bool verbose) {
    bool ok = true;
    Rng rng(20260101ULL);
    try {
        // Convolution against the direct double-sum oracle.
        {
            bool pass = true;
            for (int rep = 0; rep < 10; ++rep) {
                CxVec a(7), b(5);
                for (auto& z : a) z = rng.cnormal(1.0);
                for (auto& z : b) z = rng.cnormal(1.0);
                const CxVec c = dsp::convolve(a, b);
                for (size_t k = 0; k < c.size(); ++k) {
                    Cx s(0, 0);
                    for (size_t i = 0; i < a.size(); ++i)
                        if (k >= i && k - i < b.size()) s += a[i] * b[k - i];
                    pass = pass && std::abs(s - c[k]) < 1e-12;
                }
            }
            check(pass, "convolve matches direct sum", verbose, ok);
        }
        // DFT convolution theorem and round trip.
        {
            CxVec a(9), b(6);
            for (auto& z : a) z = rng.cnormal(1.0);
            for (auto& z : b) z = rng.cnormal(1.0);
            const int nf = static_cast<int>(a.size() + b.size() - 1);
            const CxVec A = dsp::dft(a, nf), B = dsp::dft(b, nf);
            const CxVec C = dsp::dft(dsp::convolve(a, b), nf);
            bool pass = true;
            for (int f = 0; f < nf; ++f) pass = pass && std::abs(C[f] - A[f] * B[f]) < 1e-10;
            const CxVec back = dsp::idft(A);
            for (size_t t = 0; t < a.size(); ++t) pass = pass && std::abs(back[t] - a[t]) < 1e-10;
            check(pass, "dft convolution theorem + round trip", verbose, ok);
        }
        // Least squares against normal equations; projector against
        // Gram-Schmidt removal.
        {
            CxMat A(12, 4);
            for (auto& z : A.data) z = rng.cnormal(1.0);
            CxVec b(12);
            for (auto& z : b) z = rng.cnormal(1.0);
            const CxVec x = dsp::least_squares_solve(A, b);
            bool pass = true;
            for (int c = 0; c < 4; ++c) {
                Cx resid(0, 0);
                for (int r = 0; r < 12; ++r) {
                    Cx ax(0, 0);
                    for (int c2 = 0; c2 < 4; ++c2) ax += A.at(r, c2) * x[c2];
                    resid += std::conj(A.at(r, c)) * (ax - b[r]);
                }
                pass = pass && std::abs(resid) < 1e-8;
            }
            check(pass, "least squares first-order optimality", verbose, ok);

            CxMat B(8, 3);
            for (auto& z : B.data) z = rng.cnormal(1.0);
            CxVec v(8);
            for (auto& z : v) z = rng.cnormal(1.0);
            const CxVec w = dsp::nullspace_project(B, v);
            pass = true;
            for (int c = 0; c < 3; ++c) {
                Cx dotp(0, 0);
                for (int r = 0; r < 8; ++r) dotp += std::conj(B.at(r, c)) * w[r];
                pass = pass && std::abs(dotp) < 1e-10;
            }
            check(pass, "nullspace projection orthogonality", verbose, ok);
        }
        // PDP totals and delay spreads.
        {
            bool pass = true;
            for (Scenario s : {Scenario::CB, Scenario::CR, Scenario::LR}) {
                const ScenarioParams sp = ScenarioParams::preset(s);
                const PowerDelayProfile pdp = build_pdp(sp);
                pass = pass && std::abs(pdp.total() - sp.gamma) < 1e-12;
                pass = pass && std::abs(pdp.rms_delay_spread_ns(sp.sample_period_ns) -
                                        sp.rms_delay_spread_ns) <
                                   0.005 * sp.rms_delay_spread_ns;
            }
            check(pass, "PDP power totals and RMS delay spreads", verbose, ok);
        }
        // INTR nulling on a small instance and N=1 bitwise identity.
        {
            ScenarioParams sp = ScenarioParams::preset(Scenario::CB);
            sp.num_taps = 8;
            sp.sample_period_ns = 2.5;
            const ArrayGeometry arr{4, 2, 0.02};
            Rng crng = rng.fork(7);
            const ChannelSet h = generate_channel_set(sp, arr, 3, false, crng);
            const IntrSpectra spectra = intr_project_spectra(h, 16);
            bool pass = true;
            for (int f = 0; f < spectra.num_bins; ++f)
                for (int n = 0; n < 3; ++n)
                    for (int np = 0; np < 3; ++np) {
                        if (np == n) continue;
                        Cx dotp(0, 0);
                        double hn = 0.0;
                        for (int m = 0; m < 8; ++m) {
                            const Cx hv = spectra.channel_bins(m, np)[f];
                            dotp += std::conj(hv) * spectra.prefilter_bins(m, n)[f];
                            hn += abs2(hv);
                        }
                        pass = pass && std::abs(dotp) <= 1e-10 * std::sqrt(hn);
                    }
            check(pass, "INTR pre-truncation nulling", verbose, ok);

            Rng c1 = Rng::substream(9, 0, 1);
            const ChannelSet h1 = generate_channel_set(sp, arr, 1, false, c1);
            const PrefilterSet tr = tr_prefilter(h1);
            const PrefilterSet in = intr_prefilter(h1, sp.num_taps);
            check(tr.taps == in.taps, "INTR equals TR bitwise for N=1", verbose, ok);
        }
        // Determinism and serialization round trip.
        {
            ScenarioParams sp = ScenarioParams::preset(Scenario::CR);
            sp.num_taps = 12;
            sp.sample_period_ns = 2.5;
            const ArrayGeometry arr{2, 2, 0.02};
            Rng r1 = Rng::substream(77, 3, 5);
            Rng r2 = Rng::substream(77, 3, 5);
            const ChannelSet a = generate_channel_set(sp, arr, 2, true, r1);
            const ChannelSet b = generate_channel_set(sp, arr, 2, true, r2);
            check(a.taps == b.taps, "seeded generation is bit identical", verbose, ok);

            const fs::path tmp =
                fs::temp_directory_path() / ("trbf_selftest_" + std::to_string(::getpid()));
            fs::create_directories(tmp);
            save_channel_set(a, tmp / "c.trch");
            const ChannelSet c = load_channel_set(tmp / "c.trch");
            check(a.taps == c.taps && c.correlated == a.correlated,
                  "channel cache round trip is bit exact", verbose, ok);
            fs::remove_all(tmp);
        }
        // Miniature end-to-end run.
        {
            const fs::path tmp =
                fs::temp_directory_path() / ("trbf_selfrun_" + std::to_string(::getpid()));
            RunOptions opt;
            opt.cells = builtin_smoke_preset().cells;
            for (auto& c : opt.cells) {
                c.num_realizations = 3;
            }
            opt.out_dir = tmp;
            run_experiment(opt);
            const auto rows = read_result_csv(tmp / "results.csv");
            bool pass = !rows.empty() && fs::exists(tmp / "summary.json") &&
                        fs::exists(tmp / "MANIFEST");
            double energy_check = 0.0;
            for (const auto& r : rows)
                if (r.p_s) energy_check += *r.p_s;
            pass = pass && energy_check > 0.0;
            check(pass, "miniature end-to-end run", verbose, ok);
            fs::remove_all(tmp);
        }
    } catch (const std::exception& e) {
        std::cout << "[FAIL] selftest exception: " << e.what() << "\n";
        ok = false;
    }
    return ok;
}

}  // namespace trbf
