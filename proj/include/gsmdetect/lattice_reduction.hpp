#pragma once

#include <cstdint>
#include <stdexcept>

#include "gsmdetect/numerics.hpp"

namespace gsmdet {

struct RankDeficient : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// LLL-reduced basis h_tilde = h * t with Gaussian-integer unimodular t.
/// t_inv is the exact integer inverse, maintained through the elementary
/// column operations of the reduction (so t * t_inv = I holds exactly).
struct ReducedBasis {
    CMatrix h_tilde;
    CMatrix t;      // Gaussian-integer entries
    CMatrix t_inv;  // exact Gaussian-integer inverse
    std::uint64_t reduce_flops = 0;
};

/// Complex LLL on the columns of h (Lovasz parameter delta_lll, default 3/4).
/// Size reduction rounds Gram-Schmidt coefficients to the nearest Gaussian
/// integer. Throws RankDeficient when the basis degenerates numerically.
ReducedBasis lll_reduce(const CMatrix& h, double delta_lll = 0.75, FlopCounter* fc = nullptr);

/// Checks size reduction (|Re mu| <= 1/2, |Im mu| <= 1/2) and the Lovasz
/// condition on the orthogonalized columns of rb.h_tilde.
bool verify_reduced(const ReducedBasis& rb, double delta_lll = 0.75);

}  // namespace gsmdet
