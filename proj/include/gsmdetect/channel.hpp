#pragma once

#include <atomic>
#include <memory>
#include <stdexcept>
#include <vector>

#include "gsmdetect/gsm.hpp"
#include "gsmdetect/lattice_reduction.hpp"
#include "gsmdetect/numerics.hpp"
#include "gsmdetect/rng.hpp"

namespace gsmdet {

struct NotPSD : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// i.i.d. circularly-symmetric complex Gaussian entries, unit variance.
CMatrix draw_iid(int n_r, int n_t, Rng& rng);

/// Antenna correlation matrix with entries delta^(|i-j|^2).
CMatrix correlation_matrix(int n, double delta);

/// Principal square root of a real symmetric PSD matrix (eigendecomposition,
/// negative eigenvalues clamped at zero).
CMatrix matrix_sqrt_psd(const CMatrix& r);

/// Kronecker-correlated draw: R_RX^{1/2} * H_iid * R_TX^{1/2}, same delta on
/// both sides.
CMatrix draw_correlated(int n_r, int n_t, double delta, Rng& rng);

/// Per-complex-entry total noise variance sigma^2 = N_A / rho_linear.
struct NoiseModel {
    double sigma2 = 1.0;
};

CVector draw_noise(int n_r, const NoiseModel& noise, Rng& rng);

double snr_to_sigma2(double rho_db, int n_a);

/// One channel draw plus the per-combination submatrices and lazily cached
/// detection aids (gram factorizations, LLL reductions). Caches publish
/// entries through atomic pointers: an already-computed entry is read
/// wait-free; concurrent misses may compute twice (the result is identical).
class ChannelRealization {
  public:
    struct GramEntry {
        GramFactor factor;
    };
    struct LllEntry {
        bool failed = false;       // rank-deficient combination
        ReducedBasis rb;
        std::uint64_t build_flops = 0;
    };

    ChannelRealization(CMatrix h, const GsmMappingTable& table);
    ~ChannelRealization();

    ChannelRealization(const ChannelRealization&) = delete;
    ChannelRealization& operator=(const ChannelRealization&) = delete;

    const CMatrix& h() const noexcept { return h_; }
    int n_r() const noexcept { return h_.rows(); }
    int n_combos() const noexcept { return static_cast<int>(sub_.size()); }
    const CMatrix& sub(int i) const { return sub_[static_cast<size_t>(i)]; }

    const GramEntry& gram(int i) const;
    const LllEntry& lll(int i) const;

  private:
    CMatrix h_;
    std::vector<CMatrix> sub_;
    mutable std::vector<std::atomic<GramEntry*>> gram_cache_;
    mutable std::vector<std::atomic<LllEntry*>> lll_cache_;
};

}  // namespace gsmdet
