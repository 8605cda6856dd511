#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gsmdetect/detectors.hpp"
#include "gsmdetect/rng.hpp"

namespace gsmdet {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingBaseline : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SystemConfig {
    int n_t = 4;
    int n_a = 2;
    int n_r = 4;
    int mod_order = 4;
};

struct ExperimentSpec {
    SystemConfig system;
    std::vector<std::string> detectors{"pbld", "lrzf", "ml"};
    std::vector<double> snr_grid_db{0, 4, 8, 12, 16};
    int runs = 2000;
    int uses_per_run = 100;
    double delta = 0.0;  // 0 = i.i.d. channel
    PbldParams pbld;
    std::uint64_t master_seed = 1;
};

/// Per (detector, SNR) aggregate. All fields are exact integer sums, so
/// aggregation over workers is order-independent.
struct CellAgg {
    std::uint64_t bit_errors = 0;
    std::uint64_t bits_sent = 0;
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
    std::uint64_t list_length_sum = 0;  // PBLD final list lengths
    std::uint64_t candidates_sum = 0;
    std::uint64_t flops_sum = 0;

    double ber() const { return bits_sent ? static_cast<double>(bit_errors) / bits_sent : 0.0; }
    double avg_list_length() const {
        return trials ? static_cast<double>(list_length_sum) / trials : 0.0;
    }
    double avg_candidates() const {
        return trials ? static_cast<double>(candidates_sum) / trials : 0.0;
    }
    double avg_flops() const { return trials ? static_cast<double>(flops_sum) / trials : 0.0; }
    double noise_floor() const { return bits_sent ? 1.0 / static_cast<double>(bits_sent) : 0.0; }
};

struct SweepResult {
    std::vector<std::string> detectors;
    std::vector<double> snr_grid_db;
    std::vector<std::vector<CellAgg>> cells;  // [detector][snr]

    int detector_index(const std::string& name) const;
    const CellAgg& cell(const std::string& name, size_t snr_idx) const;
};

/// Runs the paired Monte Carlo sweep: every enabled detector sees the same
/// (H, bits, n) tuple at each trial. Deterministic for a given spec
/// regardless of the thread count.
SweepResult run_sweep(const ExperimentSpec& spec, int threads = 1);

/// Per-SNR avg_flops(detector) / avg_flops(ml). Throws MissingBaseline when
/// the sweep did not include the ML detector.
std::vector<std::pair<double, double>> flop_ratio(const SweepResult& result,
                                                  const std::string& detector);

void validate_spec(const ExperimentSpec& spec);

}  // namespace gsmdet
