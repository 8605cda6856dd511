#pragma once

#include <stdexcept>
#include <vector>

#include "gsmdetect/modulation.hpp"
#include "gsmdetect/numerics.hpp"

namespace gsmdet {

struct BadGeometry : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadIndex : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GsmEncoded {
    int combo_index = 0;
    CVector x;  // n_a active symbols, combo order
    CVector s;  // n_t sparse transmit vector
};

/// GSM spatial codec: the first 2^p (p maximal) antenna combinations in
/// lexicographic order are the valid codewords. Spatial bits select the
/// combination index big-endian; the remaining bits map one symbol per
/// active antenna in combo order. Both conventions affect BER and are
/// pinned here for reproducibility.
class GsmMappingTable {
  public:
    static GsmMappingTable build(int n_t, int n_a);

    int n_t() const noexcept { return n_t_; }
    int n_a() const noexcept { return n_a_; }
    int n_c() const noexcept { return n_c_; }
    int spatial_bits() const noexcept { return spatial_bits_; }
    const std::vector<std::vector<int>>& combos() const noexcept { return combos_; }

    int bits_per_use(const Constellation& c) const {
        return spatial_bits_ + n_a_ * c.bits_per_symbol();
    }

    GsmEncoded encode(const Constellation& c, const BitString& bits) const;
    CVector reconstruct(int k_hat, const CVector& x_hat) const;
    BitString decode(const Constellation& c, int k_hat, const CVector& x_hat) const;

  private:
    int n_t_ = 0;
    int n_a_ = 0;
    int n_c_ = 0;
    int spatial_bits_ = 0;
    std::vector<std::vector<int>> combos_;
};

}  // namespace gsmdet
