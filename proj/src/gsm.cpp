#include "gsmdetect/gsm.hpp"

#include <cstdint>

namespace gsmdet {

namespace {

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

GsmMappingTable GsmMappingTable::build(int n_t, int n_a) {
    if (n_a < 1 || n_a > n_t) throw BadGeometry("need 1 <= N_A <= N_T");
    const std::uint64_t total = binomial(n_t, n_a);
    if (total < 2) throw BadGeometry("need at least 2 antenna combinations");

    GsmMappingTable t;
    t.n_t_ = n_t;
    t.n_a_ = n_a;
    t.n_c_ = 1;
    t.spatial_bits_ = 0;
    while (static_cast<std::uint64_t>(t.n_c_) * 2 <= total) {
        t.n_c_ *= 2;
        ++t.spatial_bits_;
    }

    // first n_c combinations in lexicographic order
    std::vector<int> combo(static_cast<size_t>(n_a));
    for (int i = 0; i < n_a; ++i) combo[i] = i;
    for (int count = 0; count < t.n_c_; ++count) {
        t.combos_.push_back(combo);
        // next lexicographic combination
        int i = n_a - 1;
        while (i >= 0 && combo[i] == n_t - n_a + i) --i;
        if (i < 0) break;
        ++combo[i];
        for (int j = i + 1; j < n_a; ++j) combo[j] = combo[j - 1] + 1;
    }
    return t;
}

GsmEncoded GsmMappingTable::encode(const Constellation& c, const BitString& bits) const {
    if (static_cast<int>(bits.size()) != bits_per_use(c))
        throw BadLength("payload length must equal bits per channel use");

    GsmEncoded out;
    for (int i = 0; i < spatial_bits_; ++i)
        out.combo_index = (out.combo_index << 1) | bits[static_cast<size_t>(i)];

    out.x.resize(static_cast<size_t>(n_a_));
    const int bps = c.bits_per_symbol();
    size_t pos = static_cast<size_t>(spatial_bits_);
    for (int a = 0; a < n_a_; ++a) {
        BitString sym(bits.begin() + pos, bits.begin() + pos + bps);
        out.x[static_cast<size_t>(a)] = c.map_bits(sym);
        pos += static_cast<size_t>(bps);
    }
    out.s = reconstruct(out.combo_index, out.x);
    return out;
}

CVector GsmMappingTable::reconstruct(int k_hat, const CVector& x_hat) const {
    if (k_hat < 0 || k_hat >= n_c_) throw BadIndex("combination index out of range");
    if (static_cast<int>(x_hat.size()) != n_a_)
        throw BadLength("symbol vector length must equal N_A");
    CVector s(static_cast<size_t>(n_t_), cplx(0.0, 0.0));
    const auto& combo = combos_[static_cast<size_t>(k_hat)];
    for (int a = 0; a < n_a_; ++a) s[static_cast<size_t>(combo[a])] = x_hat[static_cast<size_t>(a)];
    return s;
}

BitString GsmMappingTable::decode(const Constellation& c, int k_hat, const CVector& x_hat) const {
    if (k_hat < 0 || k_hat >= n_c_) throw BadIndex("combination index out of range");
    if (static_cast<int>(x_hat.size()) != n_a_)
        throw BadLength("symbol vector length must equal N_A");
    BitString bits;
    bits.reserve(static_cast<size_t>(bits_per_use(c)));
    for (int i = spatial_bits_ - 1; i >= 0; --i)
        bits.push_back(static_cast<std::uint8_t>((k_hat >> i) & 1));
    for (int a = 0; a < n_a_; ++a) {
        BitString sym = c.demap(x_hat[static_cast<size_t>(a)]);
        bits.insert(bits.end(), sym.begin(), sym.end());
    }
    return bits;
}

}  // namespace gsmdet
