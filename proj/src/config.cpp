#include "gsmdetect/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "gsmdetect/lattice_reduction.hpp"

namespace gsmdet {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& v, int line) {
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line) + ": not a number: '" + v + "'");
    }
}

long long parse_int(const std::string& v, int line) {
    try {
        size_t pos = 0;
        const long long i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line) + ": not an integer: '" + v + "'");
    }
}

int parse_modulation(const std::string& v, int line) {
    std::string lv = v;
    std::transform(lv.begin(), lv.end(), lv.begin(), ::tolower);
    if (lv == "qpsk" || lv == "4" || lv == "4qam") return 4;
    if (lv == "16qam" || lv == "16") return 16;
    if (lv == "64qam" || lv == "64") return 64;
    throw ParseError("line " + std::to_string(line) + ": unknown modulation '" + v + "'");
}

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fmt(std::uint64_t v) { return std::to_string(v); }

}  // namespace

ExperimentSpec parse_config_text(const std::string& text) {
    static const std::vector<std::string> known = {
        "n_t",        "n_a",       "n_r",       "modulation", "detectors", "snr_db",
        "runs",       "uses_per_run", "delta",  "c_lo_frac",  "c_hi_frac", "rho_lo_db",
        "rho_hi_db",  "lmin_scale",   "seed"};

    std::map<std::string, std::pair<std::string, int>> kv;  // key -> (value, line)
    std::stringstream ss(text);
    std::string raw;
    int line = 0;
    while (std::getline(ss, raw)) {
        ++line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        raw = trim(raw);
        if (raw.empty()) continue;
        const auto eq = raw.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(line) + ": expected key = value");
        const std::string key = trim(raw.substr(0, eq));
        const std::string val = trim(raw.substr(eq + 1));
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ParseError("line " + std::to_string(line) + ": unknown key '" + key + "'");
        if (kv.count(key))
            throw ParseError("line " + std::to_string(line) + ": duplicate key '" + key + "'");
        if (val.empty())
            throw ParseError("line " + std::to_string(line) + ": empty value for '" + key + "'");
        kv[key] = {val, line};
    }

    for (const char* req : {"n_t", "n_a", "n_r", "modulation"})
        if (!kv.count(req)) throw ValidationError(std::string("missing required key '") + req + "'");

    ExperimentSpec spec;
    auto geti = [&](const char* k, int dflt) {
        auto it = kv.find(k);
        return it == kv.end() ? dflt : static_cast<int>(parse_int(it->second.first, it->second.second));
    };
    auto getd = [&](const char* k, double dflt) {
        auto it = kv.find(k);
        return it == kv.end() ? dflt : parse_double(it->second.first, it->second.second);
    };

    spec.system.n_t = geti("n_t", 0);
    spec.system.n_a = geti("n_a", 0);
    spec.system.n_r = geti("n_r", 0);
    {
        auto it = kv.find("modulation");
        spec.system.mod_order = parse_modulation(it->second.first, it->second.second);
    }
    if (auto it = kv.find("detectors"); it != kv.end())
        spec.detectors = split_csv(it->second.first);
    if (auto it = kv.find("snr_db"); it != kv.end()) {
        spec.snr_grid_db.clear();
        for (const auto& tok : split_csv(it->second.first))
            spec.snr_grid_db.push_back(parse_double(tok, it->second.second));
    }
    spec.runs = geti("runs", spec.runs);
    spec.uses_per_run = geti("uses_per_run", spec.uses_per_run);
    spec.delta = getd("delta", spec.delta);
    spec.pbld.c_lo_frac = getd("c_lo_frac", spec.pbld.c_lo_frac);
    spec.pbld.c_hi_frac = getd("c_hi_frac", spec.pbld.c_hi_frac);
    spec.pbld.rho_lo_db = getd("rho_lo_db", spec.pbld.rho_lo_db);
    spec.pbld.rho_hi_db = getd("rho_hi_db", spec.pbld.rho_hi_db);
    if (auto it = kv.find("lmin_scale"); it != kv.end()) {
        const std::string& v = it->second.first;
        if (v == "db")
            spec.pbld.lmin_scale = PbldParams::Scale::Db;
        else if (v == "linear")
            spec.pbld.lmin_scale = PbldParams::Scale::Linear;
        else
            throw ParseError("line " + std::to_string(it->second.second) +
                             ": lmin_scale must be 'db' or 'linear'");
    }
    if (auto it = kv.find("seed"); it != kv.end())
        spec.master_seed = static_cast<std::uint64_t>(parse_int(it->second.first, it->second.second));

    try {
        validate_spec(spec);
    } catch (const std::exception& e) {
        throw ValidationError(e.what());
    }
    return spec;
}

ExperimentSpec parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

ExperimentSpec preset(const std::string& name, const std::string& scale) {
    ExperimentSpec spec;
    spec.detectors = {"pbld", "lrzf", "ml"};
    spec.master_seed = 20250823;
    if (name == "fig2") {
        spec.system = {4, 2, 4, 4};
    } else if (name == "fig3") {
        spec.system = {16, 2, 4, 4};
    } else if (name == "fig4a") {
        spec.system = {7, 4, 7, 4};
    } else if (name == "fig4b") {
        spec.system = {8, 3, 8, 4};
    } else if (name == "fig5") {
        spec.system = {7, 4, 7, 4};
        spec.delta = 0.5;
    } else {
        throw ValidationError("unknown preset: " + name);
    }
    if (scale == "full") {
        spec.runs = 20000;
        spec.snr_grid_db = {0, 5, 10, 15, 20, 25, 30};
    } else if (scale == "desk") {
        spec.runs = 2000;
        // a low-SNR anchor plus the waterfall region; intermediate low-SNR
        // points add little at this run count
        spec.snr_grid_db = {0, 10, 12, 14, 16};
    } else {
        throw ValidationError("unknown scale: " + scale + " (use desk or full)");
    }
    spec.uses_per_run = 100;
    return spec;
}

std::string csv_string(const SweepResult& result) {
    std::string out =
        "detector,snr_db,ber,bits_sent,bit_errors,avg_list_length,avg_candidates,"
        "avg_flops,flop_ratio_vs_ml,noise_floor\n";

    std::vector<std::string> names = result.detectors;
    std::sort(names.begin(), names.end());
    const int ml = result.detector_index("ml");

    for (const auto& name : names) {
        const int d = result.detector_index(name);
        for (size_t s = 0; s < result.snr_grid_db.size(); ++s) {
            const CellAgg& c = result.cells[static_cast<size_t>(d)][s];
            out += name;
            out += ',' + fmt(result.snr_grid_db[s]);
            out += ',' + fmt(c.ber());
            out += ',' + fmt(c.bits_sent);
            out += ',' + fmt(c.bit_errors);
            out += ',';
            if (name == "pbld") out += fmt(c.avg_list_length());
            out += ',' + fmt(c.avg_candidates());
            out += ',' + fmt(c.avg_flops());
            out += ',';
            if (ml >= 0) {
                const double den = result.cells[static_cast<size_t>(ml)][s].avg_flops();
                out += fmt(c.avg_flops() / den);
            }
            out += ',' + fmt(c.noise_floor());
            out += '\n';
        }
    }
    return out;
}

void emit_csv(const SweepResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    out << csv_string(result);
    if (!out) throw IoError("write failed: " + path);
}

namespace {

bool selftest_verbose(std::ostream&);

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Projection-based list detection simulator for GSM MIMO"};
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads, "worker threads for the Monte Carlo sweep");

    std::string config_path, out_path;
    auto* run = app.add_subcommand("run", "run a sweep from a config file");
    run->add_option("--config", config_path, "config file path")->required();
    run->add_option("--out", out_path, "output CSV path")->required();

    std::string preset_name, preset_scale = "desk", preset_out;
    auto* pre = app.add_subcommand("preset", "run a named preset");
    pre->add_option("--name", preset_name, "fig2|fig3|fig4a|fig4b|fig5")->required();
    pre->add_option("--scale", preset_scale, "desk|full (default desk)");
    pre->add_option("--out", preset_out, "output CSV path")->required();

    auto* self = app.add_subcommand("selftest", "run the built-in invariant checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (self->parsed()) {
            return selftest_verbose(std::cout) ? 0 : 2;
        }
        ExperimentSpec spec;
        std::string out;
        if (run->parsed()) {
            spec = parse_config(config_path);
            out = out_path;
        } else {
            spec = preset(preset_name, preset_scale);
            out = preset_out;
        }
        if (const char* env = std::getenv("GSMDETECT_SEED")) {
            spec.master_seed = std::strtoull(env, nullptr, 10);
        }
        const SweepResult result = run_sweep(spec, threads);
        emit_csv(result, out);
        return 0;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const BadGeometry& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return 2;
    }
}

namespace {

bool check(std::ostream& os, const char* name, bool ok) {
    os << (ok ? "[PASS] " : "[FAIL] ") << name << '\n';
    return ok;
}

bool selftest_verbose(std::ostream& os) {
    bool all = true;
    Rng rng(7);

    {  // projection idempotency and contraction
        bool ok = true;
        for (int t = 0; t < 50 && ok; ++t) {
            CMatrix h = draw_iid(4, 2, rng);
            CVector y(4);
            for (auto& v : y) v = cplx(rng.gauss(), rng.gauss());
            const CVector p = project(h, y);
            const CVector pp = project(h, p);
            double diff = 0;
            for (size_t i = 0; i < p.size(); ++i) diff += std::norm(pp[i] - p[i]);
            ok = std::sqrt(diff) <= 1e-9 * norm(y) && norm(p) <= norm(y) + 1e-12;
        }
        all &= check(os, "projection idempotent and contractive", ok);
    }
    {  // exact least-squares recovery
        bool ok = true;
        for (int t = 0; t < 50 && ok; ++t) {
            CMatrix h = draw_iid(4, 2, rng);
            CVector x(2);
            for (auto& v : x) v = cplx(rng.gauss(), rng.gauss());
            const CVector got = solve_gram(h, matvec(h, x));
            ok = std::abs(got[0] - x[0]) < 1e-8 && std::abs(got[1] - x[1]) < 1e-8;
        }
        all &= check(os, "least-squares recovers exact solutions", ok);
    }
    {  // constellation bijection and Gray property
        bool ok = true;
        for (int m : {4, 16, 64}) {
            const Constellation c = Constellation::make(m);
            for (int v = 0; v < m && ok; ++v) {
                BitString bits;
                for (int i = c.bits_per_symbol() - 1; i >= 0; --i)
                    bits.push_back(static_cast<std::uint8_t>((v >> i) & 1));
                ok = c.demap(c.map_bits(bits)) == bits;
            }
        }
        all &= check(os, "bit map / demap is a bijection", ok);
    }
    {  // GSM codec round trip
        const GsmMappingTable t = GsmMappingTable::build(4, 2);
        const Constellation c = Constellation::make(4);
        bool ok = t.n_c() == 4;
        for (int v = 0; v < 64 && ok; ++v) {
            BitString bits;
            for (int i = 5; i >= 0; --i) bits.push_back(static_cast<std::uint8_t>((v >> i) & 1));
            const GsmEncoded e = t.encode(c, bits);
            ok = t.decode(c, e.combo_index, e.x) == bits;
        }
        all &= check(os, "GSM encode / decode round trip", ok);
    }
    {  // lattice reduction invariants
        bool ok = true;
        for (int t = 0; t < 25 && ok; ++t) {
            CMatrix h = draw_iid(4, 4, rng);
            const ReducedBasis rb = lll_reduce(h);
            ok = verify_reduced(rb, 0.75);
            if (ok) {
                const CMatrix ht = matmul(h, rb.t);
                double diff = 0, ref = 0;
                for (int i = 0; i < 4; ++i)
                    for (int j = 0; j < 4; ++j) {
                        diff += std::norm(ht(i, j) - rb.h_tilde(i, j));
                        ref += std::norm(rb.h_tilde(i, j));
                    }
                ok = diff <= 1e-18 * ref;
            }
        }
        all &= check(os, "LLL reduction invariants", ok);
    }
    {  // noise-free detection exactness
        const GsmMappingTable t = GsmMappingTable::build(4, 2);
        const Constellation c = Constellation::make(4);
        const PbldDerived d = derive_pbld(PbldParams{}, 30.0, t.n_c());
        bool ok = true;
        for (int trial = 0; trial < 50 && ok; ++trial) {
            ChannelRealization chan(draw_iid(4, 4, rng), t);
            BitString bits(6);
            for (auto& b : bits) b = static_cast<std::uint8_t>(rng.bit());
            const GsmEncoded e = t.encode(c, bits);
            const CVector y = matvec(chan.h(), e.s);
            const DetectionResult pb = pbld_detect(y, chan, c, t, d, 0.0);
            const DetectionResult ml = ml_detect(y, chan, c, t);
            ok = pb.k_hat == e.combo_index && ml.k_hat == e.combo_index &&
                 pb.x_hat == e.x && ml.x_hat == e.x;
        }
        all &= check(os, "noise-free detection is exact", ok);
    }
    {  // sweep reproducibility across thread counts
        ExperimentSpec spec;
        spec.system = {4, 2, 4, 4};
        spec.runs = 8;
        spec.uses_per_run = 10;
        spec.snr_grid_db = {0, 10};
        const SweepResult a = run_sweep(spec, 1);
        const SweepResult b = run_sweep(spec, 4);
        all &= check(os, "sweep is thread-count independent", csv_string(a) == csv_string(b));
    }
    os << (all ? "selftest: all checks passed\n" : "selftest: FAILURES\n");
    return all;
}

}  // namespace

}  // namespace gsmdet
