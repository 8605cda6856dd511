#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gsmdetect/numerics.hpp"

namespace gsmdet {

struct UnsupportedOrder : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadLength : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotAConstellationPoint : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using BitString = std::vector<std::uint8_t>;

/// Unit-energy square M-QAM with per-axis binary-reflected Gray labeling.
/// Every point equals a*d + b for a Gaussian integer d with coordinates in
/// [0, sqrt(M)); a and b drive the lattice-domain quantizer.
class Constellation {
  public:
    /// M in {4, 16, 64}; QPSK is 4-QAM. Throws UnsupportedOrder otherwise.
    static Constellation make(int order);

    int order() const noexcept { return order_; }
    int side() const noexcept { return side_; }
    int bits_per_symbol() const noexcept { return bits_per_symbol_; }
    const std::vector<cplx>& points() const noexcept { return points_; }
    double lattice_scale() const noexcept { return a_; }
    cplx lattice_offset() const noexcept { return b_; }

    /// Gray-labeled bit mapping; bits.size() must equal bits_per_symbol.
    /// First half of the bits addresses the in-phase axis, second half the
    /// quadrature axis, each big-endian reflected Gray.
    cplx map_bits(const BitString& bits) const;

    /// Inverse of map_bits; the input must be an exact constellation point
    /// (within 1e-9), else NotAConstellationPoint.
    BitString demap(cplx point) const;

    /// Nearest constellation point; ties go to the lexicographically smaller
    /// (real, imag) point.
    cplx quantize(cplx v) const;
    int quantize_index(cplx v) const;

    /// Index of an exact point (within tol), or -1.
    int index_of(cplx p, double tol = 1e-9) const;

  private:
    int order_ = 0;
    int side_ = 0;
    int bits_per_symbol_ = 0;
    double a_ = 0.0;
    cplx b_;
    std::vector<cplx> points_;  // indexed by side*d_re + d_im (lattice coords)
};

/// Lattice-reduced-domain quantizer: with x = a*d + b*1 and z = T^{-1}x,
/// returns a*round((z_tilde - b*T^{-1}*1)/a) + b*T^{-1}*1, rounding each
/// coordinate to the nearest Gaussian integer (ties to even).
CVector quantize_lr(const Constellation& c, const CVector& z_tilde, const CMatrix& t_inv,
                    FlopCounter* fc = nullptr);

}  // namespace gsmdet
