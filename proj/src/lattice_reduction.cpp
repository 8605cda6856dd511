#include "gsmdetect/lattice_reduction.hpp"

#include <cmath>
#include <complex>
#include <vector>

namespace gsmdet {

namespace {

using gint = std::complex<long long>;

cplx round_gauss(cplx z) {
    return {std::nearbyint(z.real()), std::nearbyint(z.imag())};
}

// Gram-Schmidt orthogonalization of the columns in b.
// B[l] = ||b*_l||^2, mu[k][l] = <b*_l, b_k> / B[l] for l < k.
// Returns false when a column collapses (rank deficiency).
bool gso(const std::vector<CVector>& b, std::vector<CVector>& bstar,
         std::vector<std::vector<cplx>>& mu, std::vector<double>& B, FlopCounter* fc) {
    const size_t n = b.size();
    bstar.assign(n, {});
    mu.assign(n, std::vector<cplx>(n, cplx(0.0)));
    B.assign(n, 0.0);
    double bmax = 0.0;
    for (size_t k = 0; k < n; ++k) {
        bstar[k] = b[k];
        for (size_t l = 0; l < k; ++l) {
            mu[k][l] = vdot(bstar[l], b[k], fc) / B[l];
            charge(fc, FlopKind::CDiv, 1);
            for (size_t i = 0; i < bstar[k].size(); ++i) bstar[k][i] -= mu[k][l] * bstar[l][i];
            charge(fc, FlopKind::CMul, bstar[k].size());
            charge(fc, FlopKind::CAdd, bstar[k].size());
        }
        mu[k][k] = cplx(1.0);
        B[k] = norm2(bstar[k], fc);
        bmax = std::max(bmax, B[k]);
        if (!(B[k] > 0.0) || B[k] < 1e-26 * bmax) return false;
    }
    return true;
}

}  // namespace

ReducedBasis lll_reduce(const CMatrix& h, double delta_lll, FlopCounter* fc) {
    const int m = h.rows(), n = h.cols();
    if (m < n) throw RankDeficient("basis matrix must have at least as many rows as columns");

    FlopCounter local;
    std::vector<CVector> b(static_cast<size_t>(n), CVector(static_cast<size_t>(m)));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) b[static_cast<size_t>(j)][static_cast<size_t>(i)] = h(i, j);

    std::vector<std::vector<gint>> t(static_cast<size_t>(n), std::vector<gint>(static_cast<size_t>(n)));
    std::vector<std::vector<gint>> tinv = t;
    for (int i = 0; i < n; ++i) {
        t[static_cast<size_t>(i)][static_cast<size_t>(i)] = gint(1, 0);
        tinv[static_cast<size_t>(i)][static_cast<size_t>(i)] = gint(1, 0);
    }

    std::vector<CVector> bstar;
    std::vector<std::vector<cplx>> mu;
    std::vector<double> B;
    if (!gso(b, bstar, mu, B, &local)) throw RankDeficient("rank-deficient basis");

    // b_k -= q * b_l; column op on t, inverse row op on tinv
    auto reduce_pair = [&](size_t k, size_t l, cplx q) {
        const gint qi(static_cast<long long>(q.real()), static_cast<long long>(q.imag()));
        for (size_t i = 0; i < b[k].size(); ++i) b[k][i] -= q * b[l][i];
        local.charge(FlopKind::CMul, b[k].size());
        local.charge(FlopKind::CAdd, b[k].size());
        for (int i = 0; i < n; ++i) {
            t[static_cast<size_t>(i)][k] -= qi * t[static_cast<size_t>(i)][l];
            tinv[l][static_cast<size_t>(i)] += qi * tinv[k][static_cast<size_t>(i)];
        }
        local.charge(FlopKind::CMul, 2 * static_cast<std::uint64_t>(n));
        local.charge(FlopKind::CAdd, 2 * static_cast<std::uint64_t>(n));
        for (size_t j = 0; j <= l; ++j) mu[k][j] -= q * mu[l][j];
        local.charge(FlopKind::CMul, l + 1);
        local.charge(FlopKind::CAdd, l + 1);
    };

    size_t k = 1;
    int guard = 100000;
    while (k < static_cast<size_t>(n) && guard-- > 0) {
        for (size_t l = k; l-- > 0;) {
            const cplx q = round_gauss(mu[k][l]);
            if (q != cplx(0.0)) reduce_pair(k, l, q);
        }
        const double mu2 = std::norm(mu[k][k - 1]);
        local.charge(FlopKind::RMul, 2);
        local.charge(FlopKind::RAdd, 1);
        if (B[k] >= (delta_lll - mu2) * B[k - 1]) {
            ++k;
        } else {
            std::swap(b[k], b[k - 1]);
            for (int i = 0; i < n; ++i) std::swap(t[static_cast<size_t>(i)][k], t[static_cast<size_t>(i)][k - 1]);
            std::swap(tinv[k], tinv[k - 1]);
            if (!gso(b, bstar, mu, B, &local)) throw RankDeficient("rank-deficient basis");
            k = (k > 1) ? k - 1 : 1;
        }
    }

    ReducedBasis rb;
    rb.h_tilde = CMatrix(m, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) rb.h_tilde(i, j) = b[static_cast<size_t>(j)][static_cast<size_t>(i)];
    rb.t = CMatrix(n, n);
    rb.t_inv = CMatrix(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const gint& tv = t[static_cast<size_t>(i)][static_cast<size_t>(j)];
            const gint& iv = tinv[static_cast<size_t>(i)][static_cast<size_t>(j)];
            rb.t(i, j) = cplx(static_cast<double>(tv.real()), static_cast<double>(tv.imag()));
            rb.t_inv(i, j) = cplx(static_cast<double>(iv.real()), static_cast<double>(iv.imag()));
        }
    rb.reduce_flops = local.total;
    if (fc) fc->total += local.total;
    return rb;
}

bool verify_reduced(const ReducedBasis& rb, double delta_lll) {
    const int m = rb.h_tilde.rows(), n = rb.h_tilde.cols();
    std::vector<CVector> b(static_cast<size_t>(n), CVector(static_cast<size_t>(m)));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) b[static_cast<size_t>(j)][static_cast<size_t>(i)] = rb.h_tilde(i, j);
    std::vector<CVector> bstar;
    std::vector<std::vector<cplx>> mu;
    std::vector<double> B;
    if (!gso(b, bstar, mu, B, nullptr)) return false;
    constexpr double eps = 1e-9;
    for (int k = 1; k < n; ++k) {
        for (int l = 0; l < k; ++l) {
            const cplx m_kl = mu[static_cast<size_t>(k)][static_cast<size_t>(l)];
            if (std::abs(m_kl.real()) > 0.5 + eps || std::abs(m_kl.imag()) > 0.5 + eps)
                return false;
        }
        const double mu2 = std::norm(mu[static_cast<size_t>(k)][static_cast<size_t>(k - 1)]);
        if (B[static_cast<size_t>(k)] <
            (delta_lll - mu2) * B[static_cast<size_t>(k - 1)] - eps * B[static_cast<size_t>(k - 1)])
            return false;
    }
    return true;
}

}  // namespace gsmdet
