#include "gsmdetect/sim.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace gsmdet {

int SweepResult::detector_index(const std::string& name) const {
    for (size_t i = 0; i < detectors.size(); ++i)
        if (detectors[i] == name) return static_cast<int>(i);
    return -1;
}

const CellAgg& SweepResult::cell(const std::string& name, size_t snr_idx) const {
    const int d = detector_index(name);
    if (d < 0) throw MissingBaseline("detector not present in sweep: " + name);
    return cells[static_cast<size_t>(d)][snr_idx];
}

void validate_spec(const ExperimentSpec& spec) {
    const auto& sys = spec.system;
    if (sys.n_r < sys.n_a) throw ConfigError("N_R >= N_A required");
    if (sys.mod_order != 4 && sys.mod_order != 16 && sys.mod_order != 64)
        throw ConfigError("modulation order must be 4, 16 or 64");
    if (spec.runs < 1) throw ConfigError("runs must be >= 1");
    if (spec.uses_per_run < 1) throw ConfigError("uses_per_run must be >= 1");
    if (spec.snr_grid_db.empty()) throw ConfigError("snr grid must be nonempty");
    for (size_t i = 1; i < spec.snr_grid_db.size(); ++i)
        if (!(spec.snr_grid_db[i] > spec.snr_grid_db[i - 1]))
            throw ConfigError("snr grid must be strictly increasing");
    if (spec.delta < 0.0 || spec.delta >= 1.0)
        throw ConfigError("correlation index delta must lie in [0, 1)");
    if (!(spec.pbld.c_hi_frac < spec.pbld.c_lo_frac))
        throw ConfigError("list control requires c_hi < c_lo");
    if (spec.detectors.empty()) throw ConfigError("at least one detector required");
    for (const auto& d : spec.detectors)
        if (d != "pbld" && d != "ml" && d != "lrzf") throw ConfigError("unknown detector: " + d);

    GsmMappingTable table = GsmMappingTable::build(sys.n_t, sys.n_a);  // throws BadGeometry
    if (std::find(spec.detectors.begin(), spec.detectors.end(), "ml") != spec.detectors.end()) {
        std::uint64_t hyps = static_cast<std::uint64_t>(table.n_c());
        for (int a = 0; a < sys.n_a; ++a) {
            hyps *= static_cast<std::uint64_t>(sys.mod_order);
            if (hyps > (1ULL << 20)) throw ConfigError("ML enumeration guard exceeded");
        }
    }
}

namespace {

struct WorkerState {
    std::vector<std::vector<CellAgg>> cells;  // [detector][snr]
};

void run_one(const ExperimentSpec& spec, const GsmMappingTable& table, const Constellation& cons,
             int run, WorkerState& st) {
    const auto& sys = spec.system;
    const int payload = table.bits_per_use(cons);
    const bool want_ml =
        std::find(spec.detectors.begin(), spec.detectors.end(), "ml") != spec.detectors.end();

    for (size_t si = 0; si < spec.snr_grid_db.size(); ++si) {
        const double sigma2 = snr_to_sigma2(spec.snr_grid_db[si], sys.n_a);
        const PbldDerived derived = derive_pbld(spec.pbld, spec.snr_grid_db[si], table.n_c());

        Rng chan_rng(derive_trial_seed(spec.master_seed, static_cast<std::uint64_t>(run), 0,
                                       static_cast<std::uint64_t>(si)));
        CMatrix h = (spec.delta > 0.0)
                        ? draw_correlated(sys.n_r, sys.n_t, spec.delta, chan_rng)
                        : draw_iid(sys.n_r, sys.n_t, chan_rng);
        ChannelRealization chan(std::move(h), table);

        MlWorkspace ws;
        if (want_ml) ws = MlWorkspace::build(chan, cons, sys.n_a);

        std::vector<DetectContext> ctx(spec.detectors.size());

        for (int use = 1; use <= spec.uses_per_run; ++use) {
            Rng rng(derive_trial_seed(spec.master_seed, static_cast<std::uint64_t>(run),
                                      static_cast<std::uint64_t>(use),
                                      static_cast<std::uint64_t>(si)));
            BitString bits(static_cast<size_t>(payload));
            for (auto& b : bits) b = static_cast<std::uint8_t>(rng.bit());
            const GsmEncoded tx = table.encode(cons, bits);
            CVector y = matvec(chan.h(), tx.s);
            if (sigma2 > 0.0) {
                const CVector n = draw_noise(sys.n_r, NoiseModel{sigma2}, rng);
                for (size_t i = 0; i < y.size(); ++i) y[i] += n[i];
            }

            for (size_t di = 0; di < spec.detectors.size(); ++di) {
                CellAgg& agg = st.cells[di][si];
                agg.trials += 1;
                agg.bits_sent += static_cast<std::uint64_t>(payload);
                try {
                    DetectionResult res;
                    const std::string& name = spec.detectors[di];
                    if (name == "pbld")
                        res = pbld_detect(y, chan, cons, table, derived, sigma2, &ctx[di]);
                    else if (name == "ml")
                        res = ml_detect(y, chan, cons, table, &ctx[di], &ws);
                    else
                        res = lrzf_single_detect(y, chan, cons, table, &ctx[di]);

                    if (!res.valid) throw ConfigError("all candidates degenerate");

                    const BitString rx = table.decode(cons, res.k_hat, res.x_hat);
                    for (int b = 0; b < payload; ++b)
                        agg.bit_errors += (rx[static_cast<size_t>(b)] != bits[static_cast<size_t>(b)]);
                    agg.list_length_sum += static_cast<std::uint64_t>(res.final_list_length);
                    agg.candidates_sum += static_cast<std::uint64_t>(res.candidates_examined);
                    agg.flops_sum += res.flops;
                } catch (const std::exception&) {
                    // detector failure: count the whole payload as errored
                    agg.failures += 1;
                    agg.bit_errors += static_cast<std::uint64_t>(payload);
                }
            }
        }
    }
}

}  // namespace

SweepResult run_sweep(const ExperimentSpec& spec, int threads) {
    validate_spec(spec);
    const GsmMappingTable table = GsmMappingTable::build(spec.system.n_t, spec.system.n_a);
    const Constellation cons = Constellation::make(spec.system.mod_order);

    if (threads < 1) threads = 1;
    threads = std::min(threads, spec.runs);

    std::vector<WorkerState> states(static_cast<size_t>(threads));
    for (auto& st : states)
        st.cells.assign(spec.detectors.size(),
                        std::vector<CellAgg>(spec.snr_grid_db.size()));

    auto worker = [&](int tid) {
        for (int run = tid; run < spec.runs; run += threads)
            run_one(spec, table, cons, run, states[static_cast<size_t>(tid)]);
    };

    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }

    SweepResult out;
    out.detectors = spec.detectors;
    out.snr_grid_db = spec.snr_grid_db;
    out.cells.assign(spec.detectors.size(), std::vector<CellAgg>(spec.snr_grid_db.size()));
    for (const auto& st : states)
        for (size_t d = 0; d < out.cells.size(); ++d)
            for (size_t s = 0; s < out.cells[d].size(); ++s) {
                CellAgg& a = out.cells[d][s];
                const CellAgg& b = st.cells[d][s];
                a.bit_errors += b.bit_errors;
                a.bits_sent += b.bits_sent;
                a.trials += b.trials;
                a.failures += b.failures;
                a.list_length_sum += b.list_length_sum;
                a.candidates_sum += b.candidates_sum;
                a.flops_sum += b.flops_sum;
            }
    return out;
}

std::vector<std::pair<double, double>> flop_ratio(const SweepResult& result,
                                                  const std::string& detector) {
    const int d = result.detector_index(detector);
    const int ml = result.detector_index("ml");
    if (d < 0) throw MissingBaseline("detector not present in sweep: " + detector);
    if (ml < 0) throw MissingBaseline("ML baseline not present in sweep");
    std::vector<std::pair<double, double>> out;
    out.reserve(result.snr_grid_db.size());
    for (size_t s = 0; s < result.snr_grid_db.size(); ++s) {
        const double num = result.cells[static_cast<size_t>(d)][s].avg_flops();
        const double den = result.cells[static_cast<size_t>(ml)][s].avg_flops();
        out.emplace_back(result.snr_grid_db[s], num / den);
    }
    return out;
}

}  // namespace gsmdet
