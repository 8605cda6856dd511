#include "gsmdetect/channel.hpp"

#include <cmath>

namespace gsmdet {

CMatrix draw_iid(int n_r, int n_t, Rng& rng) {
    CMatrix h(n_r, n_t);
    const double comp = 1.0 / std::sqrt(2.0);  // variance 1/2 per component
    for (int i = 0; i < n_r; ++i)
        for (int j = 0; j < n_t; ++j) h(i, j) = cplx(comp * rng.gauss(), comp * rng.gauss());
    return h;
}

CMatrix correlation_matrix(int n, double delta) {
    CMatrix r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int d = i - j;
            // exponent |i-j|^2, as used by the Kronecker model here
            r(i, j) = (d == 0) ? 1.0 : std::pow(delta, static_cast<double>(d) * d);
        }
    return r;
}

namespace {

// Cyclic Jacobi eigendecomposition of a real symmetric matrix.
// a is destroyed; returns eigenvalues in w, eigenvectors in columns of v.
void jacobi_eig(std::vector<std::vector<double>>& a, std::vector<double>& w,
                std::vector<std::vector<double>>& v) {
    const int n = static_cast<int>(a.size());
    v.assign(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n), 0.0));
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)][static_cast<size_t>(i)] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a[static_cast<size_t>(p)][static_cast<size_t>(q)] * a[static_cast<size_t>(p)][static_cast<size_t>(q)];
        if (off < 1e-28) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const double apq = a[static_cast<size_t>(p)][static_cast<size_t>(q)];
                if (std::abs(apq) < 1e-30) continue;
                const double theta =
                    (a[static_cast<size_t>(q)][static_cast<size_t>(q)] - a[static_cast<size_t>(p)][static_cast<size_t>(p)]) / (2.0 * apq);
                const double tsign = (theta >= 0.0) ? 1.0 : -1.0;
                const double tval = tsign / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(tval * tval + 1.0);
                const double s = tval * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = a[static_cast<size_t>(i)][static_cast<size_t>(p)];
                    const double aiq = a[static_cast<size_t>(i)][static_cast<size_t>(q)];
                    a[static_cast<size_t>(i)][static_cast<size_t>(p)] = c * aip - s * aiq;
                    a[static_cast<size_t>(i)][static_cast<size_t>(q)] = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = a[static_cast<size_t>(p)][static_cast<size_t>(i)];
                    const double aqi = a[static_cast<size_t>(q)][static_cast<size_t>(i)];
                    a[static_cast<size_t>(p)][static_cast<size_t>(i)] = c * api - s * aqi;
                    a[static_cast<size_t>(q)][static_cast<size_t>(i)] = s * api + c * aqi;
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = v[static_cast<size_t>(i)][static_cast<size_t>(p)];
                    const double viq = v[static_cast<size_t>(i)][static_cast<size_t>(q)];
                    v[static_cast<size_t>(i)][static_cast<size_t>(p)] = c * vip - s * viq;
                    v[static_cast<size_t>(i)][static_cast<size_t>(q)] = s * vip + c * viq;
                }
            }
    }
    w.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) w[static_cast<size_t>(i)] = a[static_cast<size_t>(i)][static_cast<size_t>(i)];
}

}  // namespace

CMatrix matrix_sqrt_psd(const CMatrix& r) {
    const int n = r.rows();
    std::vector<std::vector<double>> a(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (std::abs(r(i, j).imag()) > 1e-12)
                throw NotPSD("matrix square root expects a real symmetric matrix");
            a[static_cast<size_t>(i)][static_cast<size_t>(j)] = r(i, j).real();
        }
    std::vector<double> w;
    std::vector<std::vector<double>> v;
    jacobi_eig(a, w, v);
    for (double& lam : w) {
        if (lam < -1e-6) throw NotPSD("matrix is not positive semidefinite");
        lam = (lam < 1e-12) ? 0.0 : std::sqrt(lam);
    }
    CMatrix out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k)
                acc += v[static_cast<size_t>(i)][static_cast<size_t>(k)] * w[static_cast<size_t>(k)] * v[static_cast<size_t>(j)][static_cast<size_t>(k)];
            out(i, j) = acc;
        }
    return out;
}

CMatrix draw_correlated(int n_r, int n_t, double delta, Rng& rng) {
    CMatrix h = draw_iid(n_r, n_t, rng);
    if (delta == 0.0) return h;
    const CMatrix rrx = matrix_sqrt_psd(correlation_matrix(n_r, delta));
    const CMatrix rtx = matrix_sqrt_psd(correlation_matrix(n_t, delta));
    return matmul(matmul(rrx, h), rtx);
}

CVector draw_noise(int n_r, const NoiseModel& noise, Rng& rng) {
    CVector n(static_cast<size_t>(n_r));
    const double comp = std::sqrt(noise.sigma2 / 2.0);
    for (int i = 0; i < n_r; ++i) n[static_cast<size_t>(i)] = cplx(comp * rng.gauss(), comp * rng.gauss());
    return n;
}

double snr_to_sigma2(double rho_db, int n_a) {
    return static_cast<double>(n_a) / std::pow(10.0, rho_db / 10.0);
}

ChannelRealization::ChannelRealization(CMatrix h, const GsmMappingTable& table)
    : h_(std::move(h)),
      gram_cache_(static_cast<size_t>(table.n_c())),
      lll_cache_(static_cast<size_t>(table.n_c())) {
    sub_.reserve(static_cast<size_t>(table.n_c()));
    for (const auto& combo : table.combos()) {
        CMatrix hi(h_.rows(), table.n_a());
        for (int j = 0; j < table.n_a(); ++j)
            for (int i = 0; i < h_.rows(); ++i) hi(i, j) = h_(i, combo[static_cast<size_t>(j)]);
        sub_.push_back(std::move(hi));
    }
    for (auto& p : gram_cache_) p.store(nullptr, std::memory_order_relaxed);
    for (auto& p : lll_cache_) p.store(nullptr, std::memory_order_relaxed);
}

ChannelRealization::~ChannelRealization() {
    for (auto& p : gram_cache_) delete p.load(std::memory_order_relaxed);
    for (auto& p : lll_cache_) delete p.load(std::memory_order_relaxed);
}

const ChannelRealization::GramEntry& ChannelRealization::gram(int i) const {
    auto& slot = gram_cache_[static_cast<size_t>(i)];
    GramEntry* e = slot.load(std::memory_order_acquire);
    if (e) return *e;
    auto fresh = std::make_unique<GramEntry>();
    fresh->factor = make_gram_factor(sub_[static_cast<size_t>(i)]);
    GramEntry* expected = nullptr;
    if (slot.compare_exchange_strong(expected, fresh.get(), std::memory_order_acq_rel))
        return *fresh.release();
    return *expected;  // another thread won; identical content
}

const ChannelRealization::LllEntry& ChannelRealization::lll(int i) const {
    auto& slot = lll_cache_[static_cast<size_t>(i)];
    LllEntry* e = slot.load(std::memory_order_acquire);
    if (e) return *e;
    auto fresh = std::make_unique<LllEntry>();
    try {
        fresh->rb = lll_reduce(sub_[static_cast<size_t>(i)]);
        fresh->build_flops = fresh->rb.reduce_flops;
    } catch (const RankDeficient&) {
        fresh->failed = true;
    }
    LllEntry* expected = nullptr;
    if (slot.compare_exchange_strong(expected, fresh.get(), std::memory_order_acq_rel))
        return *fresh.release();
    return *expected;
}

}  // namespace gsmdet
