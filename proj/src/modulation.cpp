#include "gsmdetect/modulation.hpp"

#include <cmath>

namespace gsmdet {

namespace {

int gray_encode(int v) { return v ^ (v >> 1); }

int gray_decode(int g) {
    int v = 0;
    for (; g; g >>= 1) v ^= g;
    return v;
}

int bits_to_int(const BitString& bits, size_t first, size_t count) {
    int v = 0;
    for (size_t i = 0; i < count; ++i) v = (v << 1) | bits[first + i];
    return v;
}

void int_to_bits(int v, size_t count, BitString& out) {
    for (size_t i = 0; i < count; ++i)
        out.push_back(static_cast<std::uint8_t>((v >> (count - 1 - i)) & 1));
}

// Nearest integer, ties to even (default FP rounding mode is to-nearest-even
// and is never changed by this library).
double round_half_even(double x) { return std::nearbyint(x); }

}  // namespace

Constellation Constellation::make(int order) {
    if (order != 4 && order != 16 && order != 64)
        throw UnsupportedOrder("constellation order must be 4, 16 or 64");
    Constellation c;
    c.order_ = order;
    c.side_ = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
    c.bits_per_symbol_ = static_cast<int>(std::lround(std::log2(static_cast<double>(order))));
    // raw per-axis amplitudes 2d-(K-1) give E|x|^2 = 2(K^2-1)/3
    const int k = c.side_;
    const double scale = 1.0 / std::sqrt(2.0 * (k * k - 1) / 3.0);
    c.a_ = 2.0 * scale;
    c.b_ = cplx(-(k - 1) * scale, -(k - 1) * scale);
    c.points_.resize(static_cast<size_t>(order));
    for (int dre = 0; dre < k; ++dre)
        for (int dim = 0; dim < k; ++dim)
            c.points_[static_cast<size_t>(dre) * k + dim] =
                c.a_ * cplx(dre, dim) + c.b_;
    return c;
}

cplx Constellation::map_bits(const BitString& bits) const {
    if (static_cast<int>(bits.size()) != bits_per_symbol_)
        throw BadLength("bit string length must equal bits per symbol");
    const size_t half = static_cast<size_t>(bits_per_symbol_) / 2;
    const int dre = gray_decode(bits_to_int(bits, 0, half));
    const int dim = gray_decode(bits_to_int(bits, half, half));
    return points_[static_cast<size_t>(dre) * side_ + dim];
}

BitString Constellation::demap(cplx point) const {
    const int idx = index_of(point);
    if (idx < 0) throw NotAConstellationPoint("value is not a constellation point");
    const int dre = idx / side_;
    const int dim = idx % side_;
    BitString out;
    const size_t half = static_cast<size_t>(bits_per_symbol_) / 2;
    int_to_bits(gray_encode(dre), half, out);
    int_to_bits(gray_encode(dim), half, out);
    return out;
}

int Constellation::index_of(cplx p, double tol) const {
    for (size_t i = 0; i < points_.size(); ++i)
        if (std::abs(p - points_[i]) <= tol) return static_cast<int>(i);
    return -1;
}

int Constellation::quantize_index(cplx v) const {
    int best = 0;
    double best_d = std::norm(v - points_[0]);
    for (size_t i = 1; i < points_.size(); ++i) {
        const double d = std::norm(v - points_[i]);
        const cplx& p = points_[i];
        const cplx& bp = points_[static_cast<size_t>(best)];
        if (d < best_d ||
            (d == best_d &&
             (p.real() < bp.real() || (p.real() == bp.real() && p.imag() < bp.imag())))) {
            best = static_cast<int>(i);
            best_d = d;
        }
    }
    return best;
}

cplx Constellation::quantize(cplx v) const { return points_[static_cast<size_t>(quantize_index(v))]; }

CVector quantize_lr(const Constellation& c, const CVector& z_tilde, const CMatrix& t_inv,
                    FlopCounter* fc) {
    const CVector ones(z_tilde.size(), cplx(1.0, 0.0));
    CVector shift = matvec(t_inv, ones, fc);
    const double a = c.lattice_scale();
    const cplx b = c.lattice_offset();
    CVector out(z_tilde.size());
    for (size_t i = 0; i < z_tilde.size(); ++i) {
        shift[i] *= b;
        const cplx u = (z_tilde[i] - shift[i]) / a;
        const cplx d(round_half_even(u.real()), round_half_even(u.imag()));
        out[i] = a * d + shift[i];
    }
    charge(fc, FlopKind::CMul, z_tilde.size());      // b * (T^{-1} 1)
    charge(fc, FlopKind::CAdd, 2 * z_tilde.size());  // subtract / add back
    charge(fc, FlopKind::RMul, 4 * z_tilde.size());  // scale by 1/a and a
    return out;
}

}  // namespace gsmdet
