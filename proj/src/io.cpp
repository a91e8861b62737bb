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

#include "trbf/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "serialized caches are little-endian");

namespace trbf {

namespace {

using nlohmann::json;

constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw FormatError("truncated header");
    return v;
}
std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw FormatError("truncated header");
    return v;
}

json scenario_to_json(const ScenarioParams& s) {
    return json{{"name", to_string(s.name)},
                {"nakagami_m", s.nakagami_m},
                {"rms_delay_spread_ns", s.rms_delay_spread_ns},
                {"sample_period_ns", s.sample_period_ns},
                {"num_taps", s.num_taps},
                {"gamma", s.gamma},
                {"carrier_wavelength_m", s.carrier_wavelength_m},
                {"pdp_head_fraction", s.pdp_head_fraction},
                {"num_subrays", s.num_subrays},
                {"cone_std_rad", s.cone_std_rad},
                {"subray_jitter_m", s.subray_jitter_m},
                {"nlos_base_excess_m", s.nlos_base_excess_m},
                {"room_m", s.room_m}};
}

ScenarioParams scenario_from_json(const json& j) {
    ScenarioParams s = ScenarioParams::preset(scenario_from_string(j.at("name")));
    s.nakagami_m = j.at("nakagami_m");
    s.rms_delay_spread_ns = j.at("rms_delay_spread_ns");
    s.sample_period_ns = j.at("sample_period_ns");
    s.num_taps = j.at("num_taps");
    s.gamma = j.at("gamma");
    s.carrier_wavelength_m = j.at("carrier_wavelength_m");
    s.pdp_head_fraction = j.at("pdp_head_fraction");
    s.num_subrays = j.at("num_subrays");
    s.cone_std_rad = j.at("cone_std_rad");
    s.subray_jitter_m = j.at("subray_jitter_m");
    s.nlos_base_excess_m = j.at("nlos_base_excess_m");
    s.room_m = j.at("room_m");
    return s;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void save_channel_set(const ChannelSet& cs, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("cannot open for write: " + path.string());
    os.write("TRCH", 4);
    write_u32(os, kVersion);
    write_u32(os, static_cast<std::uint32_t>(cs.num_antennas));
    write_u32(os, static_cast<std::uint32_t>(cs.num_users));
    write_u32(os, static_cast<std::uint32_t>(cs.num_taps));
    write_u32(os, static_cast<std::uint32_t>(cs.scenario.name));
    write_u64(os, cs.seed);
    os.write(reinterpret_cast<const char*>(cs.taps.data()),
             static_cast<std::streamsize>(cs.taps.size() * sizeof(Cx)));
    if (!os) throw FormatError("short write: " + path.string());

    json sidecar = {{"scenario", scenario_to_json(cs.scenario)},
                    {"correlated", cs.correlated},
                    {"seed", cs.seed}};
    std::ofstream js(path.string() + ".json", std::ios::trunc);
    js << sidecar.dump(2) << "\n";
}

ChannelSet load_channel_set(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "TRCH", 4) != 0)
        throw FormatError("bad magic in " + path.string());
    if (read_u32(is) != kVersion) throw FormatError("unsupported version in " + path.string());
    ChannelSet cs;
    cs.num_antennas = static_cast<int>(read_u32(is));
    cs.num_users = static_cast<int>(read_u32(is));
    cs.num_taps = static_cast<int>(read_u32(is));
    const auto scen = static_cast<Scenario>(read_u32(is));
    cs.seed = read_u64(is);
    cs.taps.resize(static_cast<size_t>(cs.num_antennas) * cs.num_users * cs.num_taps);
    is.read(reinterpret_cast<char*>(cs.taps.data()),
            static_cast<std::streamsize>(cs.taps.size() * sizeof(Cx)));
    if (!is) throw FormatError("truncated tap data in " + path.string());

    std::ifstream js(path.string() + ".json");
    if (!js) throw FormatError("missing sidecar for " + path.string());
    json sidecar = json::parse(js);
    cs.scenario = scenario_from_json(sidecar.at("scenario"));
    cs.correlated = sidecar.at("correlated");
    if (cs.scenario.name != scen) throw FormatError("sidecar/header scenario mismatch");
    return cs;
}

void save_prefilter_set(const PrefilterSet& p, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("cannot open for write: " + path.string());
    os.write("TRPF", 4);
    write_u32(os, kVersion);
    write_u32(os, static_cast<std::uint32_t>(p.num_antennas));
    write_u32(os, static_cast<std::uint32_t>(p.num_users));
    write_u32(os, static_cast<std::uint32_t>(p.filter_len));
    write_u32(os, static_cast<std::uint32_t>(p.technique));
    write_u32(os, static_cast<std::uint32_t>(p.delay_reference));
    os.write(reinterpret_cast<const char*>(p.taps.data()),
             static_cast<std::streamsize>(p.taps.size() * sizeof(Cx)));
    if (!os) throw FormatError("short write: " + path.string());
}

PrefilterSet load_prefilter_set(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "TRPF", 4) != 0)
        throw FormatError("bad magic in " + path.string());
    if (read_u32(is) != kVersion) throw FormatError("unsupported version in " + path.string());
    PrefilterSet p;
    p.num_antennas = static_cast<int>(read_u32(is));
    p.num_users = static_cast<int>(read_u32(is));
    p.filter_len = static_cast<int>(read_u32(is));
    p.technique = static_cast<Technique>(read_u32(is));
    p.delay_reference = static_cast<int>(read_u32(is));
    p.taps.resize(static_cast<size_t>(p.num_antennas) * p.num_users * p.filter_len);
    is.read(reinterpret_cast<char*>(p.taps.data()),
            static_cast<std::streamsize>(p.taps.size() * sizeof(Cx)));
    if (!is) throw FormatError("truncated tap data in " + path.string());
    return p;
}

CellKey ResultRow::cell_key() const {
    CellKey k;
    k.technique = to_string(technique);
    k.scenario = to_string(scenario);
    k.num_antennas = num_antennas;
    k.num_users = num_users;
    k.num_taps = num_taps;
    k.filter_len = filter_len;
    k.correlated = correlated;
    k.snr_mdb = snr_db ? static_cast<long>(std::llround(*snr_db * 1000.0)) : CellKey::kNoSnr;
    return k;
}

std::string csv_header() {
    return "technique,scenario,M,N,L,L_p,correlated,snr_db,realization,P_s,P_isi,P_iui,errors,"
           "bits";
}

std::string to_csv(const ResultRow& r) {
    std::ostringstream os;
    os << to_string(r.technique) << ',' << to_string(r.scenario) << ',' << r.num_antennas << ','
       << r.num_users << ',' << r.num_taps << ',' << r.filter_len << ','
       << (r.correlated ? 1 : 0) << ',';
    if (r.snr_db) os << fmt_double(*r.snr_db);
    os << ',' << r.realization << ',';
    if (r.p_s) os << fmt_double(*r.p_s);
    os << ',';
    if (r.p_isi) os << fmt_double(*r.p_isi);
    os << ',';
    if (r.p_iui) os << fmt_double(*r.p_iui);
    os << ',';
    if (r.errors) os << *r.errors;
    os << ',';
    if (r.bits) os << *r.bits;
    return os.str();
}

ResultRow row_from_csv(const std::string& line) {
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            f.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    f.push_back(cur);
    if (f.size() != 14) throw FormatError("bad CSV row: " + line);
    ResultRow r;
    r.technique = technique_from_string(f[0]);
    r.scenario = scenario_from_string(f[1]);
    r.num_antennas = std::stoi(f[2]);
    r.num_users = std::stoi(f[3]);
    r.num_taps = std::stoi(f[4]);
    r.filter_len = std::stoi(f[5]);
    r.correlated = f[6] == "1";
    if (!f[7].empty()) r.snr_db = std::stod(f[7]);
    r.realization = std::stoi(f[8]);
    if (!f[9].empty()) r.p_s = std::stod(f[9]);
    if (!f[10].empty()) r.p_isi = std::stod(f[10]);
    if (!f[11].empty()) r.p_iui = std::stod(f[11]);
    if (!f[12].empty()) r.errors = std::stoll(f[12]);
    if (!f[13].empty()) r.bits = std::stoll(f[13]);
    return r;
}

std::vector<ResultRow> read_result_csv(const std::filesystem::path& path, bool lenient) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open: " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw FormatError("empty CSV: " + path.string());
    if (line != csv_header()) throw FormatError("unexpected CSV header in " + path.string());
    std::vector<ResultRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        try {
            rows.push_back(row_from_csv(line));
        } catch (const std::exception&) {
            if (lenient) break;  // crash-truncated tail
            throw;
        }
    }
    return rows;
}

}  // namespace trbf
