#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <vector>

#include "gsmdetect/sim.hpp"

using namespace gsmdet;

namespace {

ExperimentSpec small_spec() {
    ExperimentSpec spec;
    spec.system = SystemConfig{4, 2, 4, 4};
    spec.snr_grid_db = {0.0, 8.0};
    spec.runs = 20;
    spec.uses_per_run = 10;
    spec.master_seed = 42;
    return spec;
}

bool same_cells(const SweepResult& a, const SweepResult& b) {
    if (a.cells.size() != b.cells.size()) return false;
    for (size_t d = 0; d < a.cells.size(); ++d)
        for (size_t s = 0; s < a.cells[d].size(); ++s) {
            const CellAgg& x = a.cells[d][s];
            const CellAgg& y = b.cells[d][s];
            if (x.bit_errors != y.bit_errors || x.bits_sent != y.bits_sent ||
                x.trials != y.trials || x.failures != y.failures ||
                x.list_length_sum != y.list_length_sum ||
                x.candidates_sum != y.candidates_sum || x.flops_sum != y.flops_sum)
                return false;
        }
    return true;
}

}  // namespace

TEST_CASE("derive_trial_seed") {
    SUBCASE("deterministic") {
        CHECK(derive_trial_seed(1, 2, 3, 4) == derive_trial_seed(1, 2, 3, 4));
    }
    SUBCASE("sensitive to every coordinate") {
        const std::uint64_t base = derive_trial_seed(1, 2, 3, 4);
        CHECK(derive_trial_seed(2, 2, 3, 4) != base);
        CHECK(derive_trial_seed(1, 3, 3, 4) != base);
        CHECK(derive_trial_seed(1, 2, 4, 4) != base);
        CHECK(derive_trial_seed(1, 2, 3, 5) != base);
    }
    SUBCASE("asymmetric in the coordinates") {
        CHECK(derive_trial_seed(1, 2, 3, 4) != derive_trial_seed(1, 3, 2, 4));
        CHECK(derive_trial_seed(1, 2, 3, 4) != derive_trial_seed(1, 2, 4, 3));
    }
    SUBCASE("no collisions over a realistic grid") {
        std::vector<std::uint64_t> seeds;
        seeds.reserve(1000000);
        for (std::uint64_t run = 0; run < 2000; ++run)
            for (std::uint64_t use = 0; use <= 100; ++use)
                for (std::uint64_t si = 0; si < 5; ++si)
                    seeds.push_back(derive_trial_seed(20250823, run, use, si));
        std::sort(seeds.begin(), seeds.end());
        CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
    }
}

TEST_CASE("validate_spec") {
    ExperimentSpec spec = small_spec();
    SUBCASE("good spec passes") { CHECK_NOTHROW(validate_spec(spec)); }
    SUBCASE("receiver count") {
        spec.system.n_r = 1;
        CHECK_THROWS_WITH_AS(validate_spec(spec), "N_R >= N_A required", ConfigError);
    }
    SUBCASE("ml enumeration guard") {
        spec.system = SystemConfig{16, 4, 16, 64};
        CHECK_THROWS_AS(validate_spec(spec), ConfigError);
        spec.detectors = {"pbld", "lrzf"};  // fine without the baseline
        CHECK_NOTHROW(validate_spec(spec));
    }
    SUBCASE("snr grid must increase") {
        spec.snr_grid_db = {4.0, 4.0};
        CHECK_THROWS_AS(validate_spec(spec), ConfigError);
    }
    SUBCASE("delta range") {
        spec.delta = 1.0;
        CHECK_THROWS_AS(validate_spec(spec), ConfigError);
    }
    SUBCASE("unknown detector") {
        spec.detectors = {"pbld", "sphere"};
        CHECK_THROWS_AS(validate_spec(spec), ConfigError);
    }
}

TEST_CASE("run_sweep is independent of the thread count") {
    const ExperimentSpec spec = small_spec();
    const SweepResult r1 = run_sweep(spec, 1);
    const SweepResult r3 = run_sweep(spec, 3);
    const SweepResult r7 = run_sweep(spec, 7);
    CHECK(same_cells(r1, r3));
    CHECK(same_cells(r1, r7));

    // and repeatable for the same seed
    CHECK(same_cells(r1, run_sweep(spec, 1)));

    // but a different master seed produces a different trajectory
    ExperimentSpec other = spec;
    other.master_seed = 43;
    CHECK_FALSE(same_cells(r1, run_sweep(other, 1)));
}

TEST_CASE("sweep accounting invariants") {
    ExperimentSpec spec = small_spec();
    const SweepResult r = run_sweep(spec, 1);
    const GsmMappingTable t = GsmMappingTable::build(4, 2);
    const Constellation c = Constellation::make(4);
    const std::uint64_t trials =
        static_cast<std::uint64_t>(spec.runs) * static_cast<std::uint64_t>(spec.uses_per_run);
    const std::uint64_t payload = static_cast<std::uint64_t>(t.bits_per_use(c));

    for (size_t d = 0; d < r.detectors.size(); ++d)
        for (size_t s = 0; s < r.snr_grid_db.size(); ++s) {
            const CellAgg& a = r.cells[d][s];
            CHECK(a.trials == trials);
            CHECK(a.bits_sent == trials * payload);
            CHECK(a.bit_errors <= a.bits_sent);
            CHECK(a.failures == 0);
            CHECK(a.noise_floor() == doctest::Approx(1.0 / static_cast<double>(a.bits_sent)));
            CHECK(a.candidates_sum >= a.trials);
            CHECK(a.candidates_sum <= a.trials * static_cast<std::uint64_t>(t.n_c()));
            CHECK(a.flops_sum > 0);
        }

    // PBLD list lengths stay within [1, N_C] on average
    const int pb = r.detector_index("pbld");
    for (size_t s = 0; s < r.snr_grid_db.size(); ++s) {
        const double avg = r.cells[static_cast<size_t>(pb)][s].avg_list_length();
        CHECK(avg >= 1.0);
        CHECK(avg <= static_cast<double>(t.n_c()));
    }
}

TEST_CASE("noise-free regime decodes perfectly") {
    ExperimentSpec spec = small_spec();
    spec.snr_grid_db = {60.0};
    spec.runs = 30;
    const SweepResult r = run_sweep(spec, 1);
    for (size_t d = 0; d < r.detectors.size(); ++d) {
        CHECK(r.cells[d][0].bit_errors == 0);
        CHECK(r.cells[d][0].ber() == 0.0);
    }
}

TEST_CASE("correlated sweep runs and stays deterministic") {
    ExperimentSpec spec = small_spec();
    spec.delta = 0.5;
    spec.runs = 10;
    const SweepResult a = run_sweep(spec, 1);
    const SweepResult b = run_sweep(spec, 4);
    CHECK(same_cells(a, b));
}

TEST_CASE("flop_ratio") {
    const ExperimentSpec spec = small_spec();
    const SweepResult r = run_sweep(spec, 1);
    SUBCASE("ml against itself is exactly one") {
        for (const auto& [snr, ratio] : flop_ratio(r, "ml")) {
            (void)snr;
            CHECK(ratio == 1.0);
        }
    }
    SUBCASE("ratios are positive and finite") {
        for (const std::string name : {"pbld", "lrzf"})
            for (const auto& [snr, ratio] : flop_ratio(r, name)) {
                (void)snr;
                CHECK(ratio > 0.0);
                CHECK(std::isfinite(ratio));
            }
    }
    SUBCASE("missing baseline throws") {
        ExperimentSpec no_ml = spec;
        no_ml.detectors = {"pbld", "lrzf"};
        const SweepResult r2 = run_sweep(no_ml, 1);
        CHECK_THROWS_AS(flop_ratio(r2, "pbld"), MissingBaseline);
        CHECK_THROWS_AS(flop_ratio(r, "mmse"), MissingBaseline);
    }
}
