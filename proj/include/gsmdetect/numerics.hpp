#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace gsmdet {

using cplx = std::complex<double>;

struct SingularGram : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Real-FLOP accounting kinds. Costs: complex multiply 6, complex add/sub 2,
/// real multiply 1, real add 1, complex division 11, square root 1.
enum class FlopKind { CMul, CAdd, RMul, RAdd, CDiv, Sqrt };

constexpr std::uint64_t flop_cost(FlopKind k) noexcept {
    switch (k) {
        case FlopKind::CMul: return 6;
        case FlopKind::CAdd: return 2;
        case FlopKind::RMul: return 1;
        case FlopKind::RAdd: return 1;
        case FlopKind::CDiv: return 11;
        case FlopKind::Sqrt: return 1;
    }
    return 0;
}

/// Accumulates real floating-point operation counts for one detection trial.
/// Never shared between concurrently running trials.
struct FlopCounter {
    std::uint64_t total = 0;

    void charge(FlopKind k, std::uint64_t n) noexcept { total += flop_cost(k) * n; }
    void reset() noexcept { total = 0; }
};

/// Null-safe charge helper; all kernels take an optional counter.
inline void charge(FlopCounter* fc, FlopKind k, std::uint64_t n) noexcept {
    if (fc) fc->charge(k, n);
}

/// Dense complex matrix, row-major.
class CMatrix {
  public:
    CMatrix() = default;
    CMatrix(int rows, int cols) : rows_(rows), cols_(cols), e_(static_cast<size_t>(rows) * cols) {}

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }

    cplx& operator()(int i, int j) { return e_[static_cast<size_t>(i) * cols_ + j]; }
    const cplx& operator()(int i, int j) const { return e_[static_cast<size_t>(i) * cols_ + j]; }

    std::vector<cplx>& data() noexcept { return e_; }
    const std::vector<cplx>& data() const noexcept { return e_; }

    static CMatrix identity(int n) {
        CMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<cplx> e_;
};

using CVector = std::vector<cplx>;

// Elementwise / BLAS-1/2 kernels. All charge the counter when given one.
CMatrix hermitian(const CMatrix& m);
CVector matvec(const CMatrix& m, const CVector& v, FlopCounter* fc = nullptr);
CVector hermitian_matvec(const CMatrix& m, const CVector& v, FlopCounter* fc = nullptr);  // m^H v
CMatrix matmul(const CMatrix& a, const CMatrix& b, FlopCounter* fc = nullptr);
CVector vec_sub(const CVector& a, const CVector& b, FlopCounter* fc = nullptr);
double norm2(const CVector& v, FlopCounter* fc = nullptr);   // squared Euclidean norm
double norm(const CVector& v, FlopCounter* fc = nullptr);
cplx vdot(const CVector& a, const CVector& b, FlopCounter* fc = nullptr);  // a^H b

/// Cached least-squares factorization of a tall matrix h. The common path is
/// a Cholesky factor of h^H h; degenerate draws fall back to a column-pivoted
/// orthogonal factorization of h itself. A factor whose smallest pivot is
/// below 1e-12 times the largest is flagged singular.
struct GramFactor {
    bool singular = false;
    bool used_qr = false;
    CMatrix chol_l;            // lower triangular, h^H h = L L^H
    CMatrix q;                 // orthonormal columns (QR path)
    CMatrix r;                 // upper triangular (QR path)
    std::vector<int> perm;     // column permutation (QR path)
    std::uint64_t build_flops = 0;
};

GramFactor make_gram_factor(const CMatrix& h, FlopCounter* fc = nullptr);

/// Least-squares solve using a prebuilt factor: (h^H h)^{-1} h^H rhs.
/// Throws SingularGram when the factor is flagged singular.
CVector gram_solve(const GramFactor& gf, const CMatrix& h, const CVector& rhs,
                   FlopCounter* fc = nullptr);

/// One-shot least-squares solve (h^H h)^{-1} h^H rhs.
CVector solve_gram(const CMatrix& h, const CVector& rhs, FlopCounter* fc = nullptr);

/// Orthogonal projection of y onto span(h), computed as h * solve_gram(h, y).
/// The projector matrix is never materialized.
CVector project(const CMatrix& h, const CVector& y, FlopCounter* fc = nullptr);

}  // namespace gsmdet
