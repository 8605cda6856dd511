#pragma once

#include <stdexcept>
#include <string>

#include "gsmdetect/sim.hpp"

namespace gsmdet {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses a flat key = value config file (# comments, blank lines allowed).
/// Keys: n_t, n_a, n_r, modulation, detectors, snr_db, runs, uses_per_run,
/// delta, c_lo_frac, c_hi_frac, rho_lo_db, rho_hi_db, lmin_scale, seed.
/// Unknown and duplicate keys are rejected with the offending line number.
ExperimentSpec parse_config(const std::string& path);

/// Parses config text directly (same grammar as parse_config).
ExperimentSpec parse_config_text(const std::string& text);

/// Named experiment presets matching the reference figure setups:
/// fig2 = (4,2,4) QPSK, fig3 = (16,2,4) QPSK, fig4a = (7,4,7) QPSK,
/// fig4b = (8,3,8) QPSK, fig5 = fig4a with delta = 0.5. Scale is "desk"
/// (runs / 10, SNR {0, 10, 12, 14, 16} dB) or "full" (2e4 runs, 0..30 dB).
ExperimentSpec preset(const std::string& name, const std::string& scale = "desk");

/// Writes the sweep as CSV with a fixed header and deterministic row order
/// (detector name ascending, then SNR ascending). Reals are shortest
/// round-trip decimals, so identical sweeps yield byte-identical files.
void emit_csv(const SweepResult& result, const std::string& path);

std::string csv_string(const SweepResult& result);

/// Full command-line front end; returns the process exit code
/// (0 success, 1 validation error, 2 runtime error).
int run_cli(int argc, const char* const* argv);

}  // namespace gsmdet
