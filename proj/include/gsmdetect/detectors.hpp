#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsmdetect/channel.hpp"
#include "gsmdetect/gsm.hpp"
#include "gsmdetect/modulation.hpp"
#include "gsmdetect/numerics.hpp"

namespace gsmdet {

struct TooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// List-control parameters. l_min interpolates linearly between c_lo*N_C at
/// rho_lo and c_hi*N_C at rho_hi; the interpolation runs on the dB scale by
/// default (rho_lo/rho_hi are quoted in dB), with a linear-scale switch for
/// sensitivity checks. The growth rate l_1 = l_min / sqrt(rho_linear) always
/// uses the linear SNR.
struct PbldParams {
    double c_lo_frac = 0.25;
    double c_hi_frac = 0.125;
    double rho_lo_db = 0.0;
    double rho_hi_db = 30.0;
    enum class Scale { Db, Linear } lmin_scale = Scale::Db;
};

struct PbldDerived {
    double l_min = 1.0;  // clamped to >= 1
    double l_1 = 0.0;
};

PbldDerived derive_pbld(const PbldParams& p, double rho_db, int n_c);

struct DetectionResult {
    int k_hat = -1;
    CVector x_hat;
    CVector s_hat;
    int candidates_examined = 0;
    int final_list_length = 0;
    std::uint64_t flops = 0;
    double epsilon_min = std::numeric_limits<double>::infinity();
    bool valid = true;
    std::vector<int> lambda_history;  // successive values taken by the list bound
};

/// Per-detector, per-realization accounting context. Lazily built channel
/// aids (gram factors, LLL reductions) are charged to the first detection of
/// this context that touches them, so each detector pays the build cost once
/// per channel realization, independent of other detectors sharing the cache.
struct DetectContext {
    FlopCounter fc;
    const ChannelRealization* chan = nullptr;
    std::vector<char> gram_charged;
    std::vector<char> lll_charged;

    void bind(const ChannelRealization& c) {
        if (chan != &c) {
            chan = &c;
            gram_charged.assign(static_cast<size_t>(c.n_combos()), 0);
            lll_charged.assign(static_cast<size_t>(c.n_combos()), 0);
        }
    }
};

struct Stage1Result {
    std::vector<int> order;          // combination indices, descending projection
    std::vector<CVector> w;          // per combination, ZF auxiliary w_i
    std::vector<double> projection;  // per combination, ||H_i w_i||
    std::vector<char> ok;            // per combination, false when gram was singular
};

/// Stage 1: rank all combinations by the norm of the orthogonal projection of
/// y onto their column spaces. Singular combinations sort last; ties break by
/// ascending combination index.
Stage1Result stage1_sort(const CVector& y, const ChannelRealization& chan,
                         DetectContext* ctx = nullptr);

/// Stage 2: LR-ZF candidate for the combination ranked j-th in Stage 1.
/// Reuses w from Stage 1, quantizes in the reduced domain, maps back with the
/// unimodular transform, and snaps every entry onto the constellation.
/// Throws RankDeficient when the combination's basis cannot be reduced.
CVector stage2_candidate(int j, const Stage1Result& s1, const ChannelRealization& chan,
                         const Constellation& c, DetectContext* ctx = nullptr);

/// Residual standardized by the noise-only statistics of ||n||^2
/// (mean N_R sigma^2, std sqrt(N_R) sigma^2). sigma2 == 0 maps to -inf for a
/// zero residual and +inf otherwise.
double quality_metric(double epsilon, int n_r, double sigma2);

/// ceil(max(l_min, exp(l_1 * phi))), capped at N_C.
int list_length(double phi, const PbldDerived& d, int n_c);

DetectionResult pbld_detect(const CVector& y, const ChannelRealization& chan,
                            const Constellation& c, const GsmMappingTable& table,
                            const PbldDerived& d, double sigma2, DetectContext* ctx = nullptr);

/// Precomputed per-realization products H_k x for every hypothesis, reused
/// across the channel uses that share one realization.
struct MlWorkspace {
    std::vector<CVector> symbol_vectors;      // M^{N_A}, lexicographic point order
    std::vector<std::vector<cplx>> products;  // [combo] -> hyp-major N_R blocks

    static MlWorkspace build(const ChannelRealization& chan, const Constellation& c, int n_a);
};

/// Exhaustive maximum-likelihood detection over all combinations and symbol
/// vectors. Guarded at N_C * M^{N_A} <= 2^20 (throws TooLarge). Flops are
/// charged with the closed-form cost of the naive enumeration.
DetectionResult ml_detect(const CVector& y, const ChannelRealization& chan,
                          const Constellation& c, const GsmMappingTable& table,
                          DetectContext* ctx = nullptr, const MlWorkspace* ws = nullptr);

/// Single-candidate baseline: PBLD with the list pinned to the top-ranked
/// combination.
DetectionResult lrzf_single_detect(const CVector& y, const ChannelRealization& chan,
                                   const Constellation& c, const GsmMappingTable& table,
                                   DetectContext* ctx = nullptr);

}  // namespace gsmdet
