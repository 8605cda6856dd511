#include "gsmdetect/numerics.hpp"

#include <cmath>

namespace gsmdet {

namespace {
constexpr double kPivotTol = 1e-12;
}

CMatrix hermitian(const CMatrix& m) {
    CMatrix out(m.cols(), m.rows());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out(j, i) = std::conj(m(i, j));
    return out;
}

CVector matvec(const CMatrix& m, const CVector& v, FlopCounter* fc) {
    CVector out(static_cast<size_t>(m.rows()));
    for (int i = 0; i < m.rows(); ++i) {
        cplx acc = 0.0;
        for (int j = 0; j < m.cols(); ++j) acc += m(i, j) * v[j];
        out[i] = acc;
    }
    charge(fc, FlopKind::CMul, static_cast<std::uint64_t>(m.rows()) * m.cols());
    if (m.cols() > 1)
        charge(fc, FlopKind::CAdd, static_cast<std::uint64_t>(m.rows()) * (m.cols() - 1));
    return out;
}

CVector hermitian_matvec(const CMatrix& m, const CVector& v, FlopCounter* fc) {
    CVector out(static_cast<size_t>(m.cols()));
    for (int j = 0; j < m.cols(); ++j) {
        cplx acc = 0.0;
        for (int i = 0; i < m.rows(); ++i) acc += std::conj(m(i, j)) * v[i];
        out[j] = acc;
    }
    charge(fc, FlopKind::CMul, static_cast<std::uint64_t>(m.rows()) * m.cols());
    if (m.rows() > 1)
        charge(fc, FlopKind::CAdd, static_cast<std::uint64_t>(m.cols()) * (m.rows() - 1));
    return out;
}

CMatrix matmul(const CMatrix& a, const CMatrix& b, FlopCounter* fc) {
    CMatrix out(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < b.cols(); ++k) {
            cplx acc = 0.0;
            for (int j = 0; j < a.cols(); ++j) acc += a(i, j) * b(j, k);
            out(i, k) = acc;
        }
    const auto n = static_cast<std::uint64_t>(a.rows()) * b.cols();
    charge(fc, FlopKind::CMul, n * a.cols());
    if (a.cols() > 1) charge(fc, FlopKind::CAdd, n * (a.cols() - 1));
    return out;
}

CVector vec_sub(const CVector& a, const CVector& b, FlopCounter* fc) {
    CVector out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    charge(fc, FlopKind::CAdd, a.size());
    return out;
}

double norm2(const CVector& v, FlopCounter* fc) {
    double acc = 0.0;
    for (const cplx& z : v) acc += z.real() * z.real() + z.imag() * z.imag();
    charge(fc, FlopKind::RMul, 2 * v.size());
    if (!v.empty()) charge(fc, FlopKind::RAdd, 2 * v.size() - 1);
    return acc;
}

double norm(const CVector& v, FlopCounter* fc) {
    double n2 = norm2(v, fc);
    charge(fc, FlopKind::Sqrt, 1);
    return std::sqrt(n2);
}

cplx vdot(const CVector& a, const CVector& b, FlopCounter* fc) {
    cplx acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    charge(fc, FlopKind::CMul, a.size());
    if (a.size() > 1) charge(fc, FlopKind::CAdd, a.size() - 1);
    return acc;
}

namespace {

// Complex Cholesky of a Hermitian positive-definite gram matrix.
// Returns false when a pivot falls below kPivotTol times the largest seen.
bool cholesky(const CMatrix& a, CMatrix& l, FlopCounter* fc) {
    const int n = a.rows();
    l = CMatrix(n, n);
    double max_pivot = 0.0;
    for (int j = 0; j < n; ++j) {
        double d = a(j, j).real();
        for (int k = 0; k < j; ++k) {
            d -= std::norm(l(j, k));
            charge(fc, FlopKind::RMul, 2);
            charge(fc, FlopKind::RAdd, 2);
        }
        max_pivot = std::max(max_pivot, d);
        if (!(d > 0.0) || d < kPivotTol * max_pivot) return false;
        const double root = std::sqrt(d);
        charge(fc, FlopKind::Sqrt, 1);
        l(j, j) = root;
        for (int i = j + 1; i < n; ++i) {
            cplx acc = a(i, j);
            for (int k = 0; k < j; ++k) {
                acc -= l(i, k) * std::conj(l(j, k));
                charge(fc, FlopKind::CMul, 1);
                charge(fc, FlopKind::CAdd, 1);
            }
            l(i, j) = acc / root;
            charge(fc, FlopKind::CDiv, 1);
        }
    }
    return true;
}

// Column-pivoted modified Gram-Schmidt factorization h P = Q R.
// Returns false when R's diagonal collapses (numerically rank deficient).
bool pivoted_qr(const CMatrix& h, CMatrix& q, CMatrix& r, std::vector<int>& perm,
                FlopCounter* fc) {
    const int m = h.rows(), n = h.cols();
    q = CMatrix(m, n);
    r = CMatrix(n, n);
    perm.resize(n);
    std::vector<CVector> cols(n, CVector(static_cast<size_t>(m)));
    std::vector<int> remaining(n);
    for (int j = 0; j < n; ++j) {
        remaining[j] = j;
        for (int i = 0; i < m; ++i) cols[j][i] = h(i, j);
    }
    double max_diag = 0.0;
    for (int k = 0; k < n; ++k) {
        // pick the remaining column with the largest residual norm
        int best = k;
        double best_n2 = -1.0;
        for (int t = k; t < n; ++t) {
            double n2 = norm2(cols[remaining[t]], fc);
            if (n2 > best_n2) {
                best_n2 = n2;
                best = t;
            }
        }
        std::swap(remaining[k], remaining[best]);
        const int col = remaining[k];
        perm[k] = col;
        const double d = std::sqrt(best_n2);
        charge(fc, FlopKind::Sqrt, 1);
        max_diag = std::max(max_diag, d);
        if (!(d > 0.0) || d < kPivotTol * max_diag) return false;
        r(k, k) = d;
        for (int i = 0; i < m; ++i) {
            q(i, k) = cols[col][i] / d;
            charge(fc, FlopKind::CDiv, 1);
        }
        for (int t = k + 1; t < n; ++t) {
            const int c2 = remaining[t];
            cplx proj = 0.0;
            for (int i = 0; i < m; ++i) proj += std::conj(q(i, k)) * cols[c2][i];
            charge(fc, FlopKind::CMul, static_cast<std::uint64_t>(m));
            charge(fc, FlopKind::CAdd, static_cast<std::uint64_t>(m));
            r(k, t) = proj;  // R indexed in pivot order
            for (int i = 0; i < m; ++i) cols[c2][i] -= proj * q(i, k);
            charge(fc, FlopKind::CMul, static_cast<std::uint64_t>(m));
            charge(fc, FlopKind::CAdd, static_cast<std::uint64_t>(m));
        }
    }
    return true;
}

}  // namespace

GramFactor make_gram_factor(const CMatrix& h, FlopCounter* fc) {
    FlopCounter local;
    GramFactor gf;

    // Gram matrix h^H h (Hermitian; compute upper half, mirror).
    const int n = h.cols(), m = h.rows();
    CMatrix gram(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            cplx acc = 0.0;
            for (int k = 0; k < m; ++k) acc += std::conj(h(k, i)) * h(k, j);
            gram(i, j) = acc;
            gram(j, i) = std::conj(acc);
            local.charge(FlopKind::CMul, static_cast<std::uint64_t>(m));
            if (m > 1) local.charge(FlopKind::CAdd, static_cast<std::uint64_t>(m) - 1);
        }

    if (cholesky(gram, gf.chol_l, &local)) {
        gf.used_qr = false;
    } else {
        gf.used_qr = true;
        gf.singular = !pivoted_qr(h, gf.q, gf.r, gf.perm, &local);
    }
    gf.build_flops = local.total;
    if (fc) fc->total += local.total;
    return gf;
}

CVector gram_solve(const GramFactor& gf, const CMatrix& h, const CVector& rhs,
                   FlopCounter* fc) {
    if (gf.singular) throw SingularGram("gram matrix numerically singular");
    const int n = h.cols();

    if (!gf.used_qr) {
        CVector b = hermitian_matvec(h, rhs, fc);
        // forward solve L z = b
        CVector z(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            cplx acc = b[i];
            for (int k = 0; k < i; ++k) {
                acc -= gf.chol_l(i, k) * z[k];
                charge(fc, FlopKind::CMul, 1);
                charge(fc, FlopKind::CAdd, 1);
            }
            z[i] = acc / gf.chol_l(i, i).real();
            charge(fc, FlopKind::CDiv, 1);
        }
        // back solve L^H x = z
        CVector x(static_cast<size_t>(n));
        for (int i = n - 1; i >= 0; --i) {
            cplx acc = z[i];
            for (int k = i + 1; k < n; ++k) {
                acc -= std::conj(gf.chol_l(k, i)) * x[k];
                charge(fc, FlopKind::CMul, 1);
                charge(fc, FlopKind::CAdd, 1);
            }
            x[i] = acc / gf.chol_l(i, i).real();
            charge(fc, FlopKind::CDiv, 1);
        }
        return x;
    }

    // QR path: x = P R^{-1} Q^H rhs
    CVector b = hermitian_matvec(gf.q, rhs, fc);
    CVector t(static_cast<size_t>(n));
    for (int i = n - 1; i >= 0; --i) {
        cplx acc = b[i];
        for (int k = i + 1; k < n; ++k) {
            acc -= gf.r(i, k) * t[k];
            charge(fc, FlopKind::CMul, 1);
            charge(fc, FlopKind::CAdd, 1);
        }
        t[i] = acc / gf.r(i, i);
        charge(fc, FlopKind::CDiv, 1);
    }
    CVector x(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) x[gf.perm[k]] = t[k];
    return x;
}

CVector solve_gram(const CMatrix& h, const CVector& rhs, FlopCounter* fc) {
    GramFactor gf = make_gram_factor(h, fc);
    return gram_solve(gf, h, rhs, fc);
}

CVector project(const CMatrix& h, const CVector& y, FlopCounter* fc) {
    return matvec(h, solve_gram(h, y, fc), fc);
}

}  // namespace gsmdet
