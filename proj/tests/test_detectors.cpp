#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "gsmdetect/detectors.hpp"
#include "testutil.hpp"

using namespace gsmdet;
using testutil::random_cvector;
using testutil::vec_dist;

namespace {

BitString random_bits(int n, Rng& rng) {
    BitString b(static_cast<size_t>(n));
    for (auto& x : b) x = static_cast<std::uint8_t>(rng.bit());
    return b;
}

// Independent naive enumerator: scans every combination and symbol tuple
// through the full channel matrix. Used as an oracle for ml_detect.
std::pair<int, CVector> naive_ml(const CVector& y, const ChannelRealization& chan,
                                 const Constellation& c, const GsmMappingTable& table) {
    double best = std::numeric_limits<double>::infinity();
    int best_k = -1;
    CVector best_x;
    std::uint64_t hyps = 1;
    for (int a = 0; a < table.n_a(); ++a) hyps *= static_cast<std::uint64_t>(c.order());
    for (int k = 0; k < table.n_c(); ++k) {
        for (std::uint64_t h = 0; h < hyps; ++h) {
            CVector x(static_cast<size_t>(table.n_a()));
            std::uint64_t rem = h;
            for (int a = table.n_a() - 1; a >= 0; --a) {
                x[static_cast<size_t>(a)] = c.points()[static_cast<size_t>(rem % c.order())];
                rem /= static_cast<std::uint64_t>(c.order());
            }
            const CVector s = table.reconstruct(k, x);
            const CVector r = vec_sub(y, matvec(chan.h(), s));
            const double e2 = norm2(r);
            if (e2 < best) {
                best = e2;
                best_k = k;
                best_x = x;
            }
        }
    }
    return {best_k, best_x};
}

}  // namespace

TEST_CASE("derive_pbld") {
    PbldParams p;  // defaults: c_lo = N_C/4, c_hi = N_C/8, 0..30 dB
    const int n_c = 32;
    SUBCASE("endpoints of the interpolation") {
        CHECK(derive_pbld(p, 0.0, n_c).l_min == doctest::Approx(8.0));
        CHECK(derive_pbld(p, 30.0, n_c).l_min == doctest::Approx(4.0));
        CHECK(derive_pbld(p, 15.0, n_c).l_min == doctest::Approx(6.0));
    }
    SUBCASE("growth rate uses linear snr") {
        const PbldDerived d = derive_pbld(p, 10.0, n_c);
        CHECK(d.l_1 == doctest::Approx(d.l_min / std::sqrt(10.0)));
        const PbldDerived d0 = derive_pbld(p, 0.0, n_c);
        CHECK(d0.l_1 == doctest::Approx(d0.l_min));
    }
    SUBCASE("clamped at one beyond rho_hi") {
        PbldParams steep;
        steep.c_lo_frac = 0.25;
        steep.c_hi_frac = 0.01;
        CHECK(derive_pbld(steep, 300.0, 4).l_min == 1.0);
    }
    SUBCASE("c_hi must stay below c_lo") {
        PbldParams bad;
        bad.c_hi_frac = 0.5;
        bad.c_lo_frac = 0.25;
        CHECK_THROWS(derive_pbld(bad, 0.0, n_c));
    }
    SUBCASE("linear-scale switch") {
        PbldParams lin = p;
        lin.lmin_scale = PbldParams::Scale::Linear;
        // l_min(x) = (c_hi - c_lo)/(x_hi - x_lo) * x + c_lo with x_hi - x_lo = 999
        const double mid_db = 10.0 * std::log10(999.0 / 2.0);
        CHECK(derive_pbld(lin, mid_db, n_c).l_min == doctest::Approx(6.0));
    }
}

TEST_CASE("stage1_sort axis example") {
    const GsmMappingTable t = GsmMappingTable::build(2, 1);
    ChannelRealization chan(CMatrix::identity(2), t);
    const CVector y{cplx(2, 0), cplx(0.5, 0)};
    const Stage1Result s1 = stage1_sort(y, chan);
    CHECK(s1.order[0] == 0);
    CHECK(s1.order[1] == 1);
    CHECK(s1.projection[0] == doctest::Approx(2.0));
    CHECK(s1.projection[1] == doctest::Approx(0.5));
}

TEST_CASE("stage1_sort ranks the true subspace first under orthogonal combos") {
    const GsmMappingTable t = GsmMappingTable::build(4, 2);
    const Constellation c = Constellation::make(4);
    ChannelRealization chan(CMatrix::identity(4), t);
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const GsmEncoded e = t.encode(c, random_bits(6, rng));
        const CVector y = matvec(chan.h(), e.s);
        const Stage1Result s1 = stage1_sort(y, chan);
        CHECK(s1.order[0] == e.combo_index);
    }
}

TEST_CASE("stage1 sorting key equals projection norm") {
    const GsmMappingTable t = GsmMappingTable::build(4, 2);
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        ChannelRealization chan(draw_iid(4, 4, rng), t);
        const CVector y = random_cvector(4, rng);
        const Stage1Result s1 = stage1_sort(y, chan);
        for (int i = 0; i < t.n_c(); ++i) {
            const CVector wy = project(chan.sub(i), y);
            CHECK(s1.projection[static_cast<size_t>(i)] ==
                  doctest::Approx(norm(wy)).epsilon(1e-9));
        }
        // descending with index tie-break
        for (size_t j = 1; j < s1.order.size(); ++j) {
            const double a = s1.projection[static_cast<size_t>(s1.order[j - 1])];
            const double b = s1.projection[static_cast<size_t>(s1.order[j])];
            CHECK((a > b || (a == b && s1.order[j - 1] < s1.order[j])));
        }
    }
}

TEST_CASE("stage2_candidate") {
    const GsmMappingTable t = GsmMappingTable::build(4, 2);
    const Constellation c = Constellation::make(4);
    Rng rng(9);
    SUBCASE("noise-free recovery at the true combination") {
        for (int trial = 0; trial < 200; ++trial) {
            ChannelRealization chan(draw_iid(4, 4, rng), t);
            const GsmEncoded e = t.encode(c, random_bits(6, rng));
            const CVector y = matvec(chan.sub(e.combo_index), e.x);
            const Stage1Result s1 = stage1_sort(y, chan);
            int j = 0;
            while (s1.order[static_cast<size_t>(j)] != e.combo_index) ++j;
            const CVector cand = stage2_candidate(j, s1, chan, c);
            CHECK(vec_dist(cand, e.x) < 1e-9);
        }
    }
    SUBCASE("identity transform reduces to plain ZF quantization") {
        ChannelRealization chan(CMatrix::identity(4), t);  // orthonormal columns
        for (int trial = 0; trial < 100; ++trial) {
            const CVector y = random_cvector(4, rng);
            const Stage1Result s1 = stage1_sort(y, chan);
            for (int j = 0; j < t.n_c(); ++j) {
                const int i = s1.order[static_cast<size_t>(j)];
                const CVector cand = stage2_candidate(j, s1, chan, c);
                for (int a = 0; a < t.n_a(); ++a)
                    CHECK(std::abs(cand[static_cast<size_t>(a)] -
                                   c.quantize(s1.w[static_cast<size_t>(i)][static_cast<size_t>(a)])) < 1e-12);
            }
        }
    }
    SUBCASE("candidates always land in the alphabet") {
        for (int trial = 0; trial < 500; ++trial) {
            ChannelRealization chan(draw_iid(4, 4, rng), t);
            const CVector y = random_cvector(4, rng);
            const Stage1Result s1 = stage1_sort(y, chan);
            for (int j = 0; j < t.n_c(); ++j) {
                const CVector cand = stage2_candidate(j, s1, chan, c);
                for (const cplx& v : cand) CHECK(c.index_of(v) >= 0);
            }
        }
    }
}

TEST_CASE("quality_metric") {
    CHECK(quality_metric(std::sqrt(4 * 0.5), 4, 0.5) == doctest::Approx(0.0));
    CHECK(quality_metric(0.0, 4, 0.5) == doctest::Approx(-2.0));  // -sqrt(N_R)
    CHECK(quality_metric(std::sqrt(3.0), 4, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("list_length") {
    PbldDerived d;
    d.l_min = 4.0;
    d.l_1 = 0.5;
    CHECK(list_length(0.0, d, 64) == 4);     // exp(0) = 1 < l_min
    CHECK(list_length(-100.0, d, 64) == 4);  // vanishing exponential
    CHECK(list_length(6.0, d, 64) == 21);    // ceil(e^3)
    CHECK(list_length(6.0, d, 16) == 16);    // capped at N_C
    CHECK(list_length(1e9, d, 64) == 64);    // overflow-safe cap
    d.l_min = 1.0;
    CHECK(list_length(-1e9, d, 64) == 1);
}

TEST_CASE("pbld_detect") {
    const GsmMappingTable t = GsmMappingTable::build(4, 2);
    const Constellation c = Constellation::make(4);
    const PbldParams params;
    Rng rng(10);

    SUBCASE("noise-free exactness") {
        const PbldDerived d = derive_pbld(params, 20.0, t.n_c());
        for (int trial = 0; trial < 200; ++trial) {
            ChannelRealization chan(draw_iid(4, 4, rng), t);
            const GsmEncoded e = t.encode(c, random_bits(6, rng));
            const CVector y = matvec(chan.h(), e.s);
            const DetectionResult res = pbld_detect(y, chan, c, t, d, 0.0);
            CHECK(res.valid);
            CHECK(res.k_hat == e.combo_index);
            CHECK(vec_dist(res.x_hat, e.x) < 1e-12);
            CHECK(vec_dist(res.s_hat, e.s) < 1e-12);
            CHECK(res.candidates_examined >= 1);
        }
    }

    SUBCASE("full-list mode equals brute-force best LR-ZF candidate") {
        PbldDerived full;
        full.l_min = static_cast<double>(t.n_c());
        full.l_1 = 1.0;
        const double sigma2 = 2.0;  // heavy noise
        for (int trial = 0; trial < 500; ++trial) {
            ChannelRealization chan(draw_iid(4, 4, rng), t);
            const GsmEncoded e = t.encode(c, random_bits(6, rng));
            CVector y = matvec(chan.h(), e.s);
            const CVector n = draw_noise(4, NoiseModel{sigma2}, rng);
            for (size_t i = 0; i < y.size(); ++i) y[i] += n[i];

            const DetectionResult res = pbld_detect(y, chan, c, t, full, sigma2);
            CHECK(res.candidates_examined == t.n_c());

            // brute force over all combinations
            const Stage1Result s1 = stage1_sort(y, chan);
            double best = std::numeric_limits<double>::infinity();
            int best_k = -1;
            CVector best_x;
            for (int j = 0; j < t.n_c(); ++j) {
                const CVector cand = stage2_candidate(j, s1, chan, c);
                const int i = s1.order[static_cast<size_t>(j)];
                const double eps = norm(vec_sub(y, matvec(chan.sub(i), cand)));
                if (eps < best) {
                    best = eps;
                    best_k = i;
                    best_x = cand;
                }
            }
            CHECK(res.k_hat == best_k);
            CHECK(res.epsilon_min == best);
            CHECK(vec_dist(res.x_hat, best_x) == 0.0);
        }
    }

    SUBCASE("hand-traced early termination with l_min = 1") {
        PbldDerived d;
        d.l_min = 1.0;
        d.l_1 = 1.0;
        ChannelRealization chan(CMatrix::identity(2), GsmMappingTable::build(2, 1));
        const GsmMappingTable t2 = GsmMappingTable::build(2, 1);
        const Constellation c4 = Constellation::make(4);
        // transmit on antenna 0, noise-free; first candidate is exact so
        // lambda(phi) = max(1, exp(-inf)) = 1 terminates the loop at j = 1
        const CVector y{c4.points()[2], cplx(0, 0)};
        const DetectionResult res = pbld_detect(y, chan, c4, t2, d, 0.25);
        CHECK(res.k_hat == 0);
        CHECK(res.candidates_examined == 1);
        CHECK(res.final_list_length == 1);
        CHECK(res.epsilon_min == doctest::Approx(0.0));
    }

    SUBCASE("lambda assignments never increase") {
        const double sigma2 = snr_to_sigma2(6.0, 2);
        const PbldDerived d = derive_pbld(params, 6.0, t.n_c());
        for (int trial = 0; trial < 2000; ++trial) {
            ChannelRealization chan(draw_iid(4, 4, rng), t);
            const GsmEncoded e = t.encode(c, random_bits(6, rng));
            CVector y = matvec(chan.h(), e.s);
            const CVector n = draw_noise(4, NoiseModel{sigma2}, rng);
            for (size_t i = 0; i < y.size(); ++i) y[i] += n[i];
            const DetectionResult res = pbld_detect(y, chan, c, t, d, sigma2);
            for (size_t i = 1; i < res.lambda_history.size(); ++i)
                CHECK(res.lambda_history[i] <= res.lambda_history[i - 1]);
            CHECK(res.candidates_examined <= t.n_c());
            CHECK(res.candidates_examined >= 1);
        }
    }

    SUBCASE("determinism") {
        ChannelRealization chan(draw_iid(4, 4, rng), t);
        const CVector y = random_cvector(4, rng);
        const PbldDerived d = derive_pbld(params, 10.0, t.n_c());
        const DetectionResult a = pbld_detect(y, chan, c, t, d, 0.2);
        const DetectionResult b = pbld_detect(y, chan, c, t, d, 0.2);
        CHECK(a.k_hat == b.k_hat);
        CHECK(a.epsilon_min == b.epsilon_min);
        CHECK(a.candidates_examined == b.candidates_examined);
        DetectContext ca, cb;
        const DetectionResult fa = pbld_detect(y, chan, c, t, d, 0.2, &ca);
        const DetectionResult fb = pbld_detect(y, chan, c, t, d, 0.2, &cb);
        CHECK(fa.flops > 0);
        // second context charges the cached factorizations identically
        CHECK(fa.flops == fb.flops);
    }
}

TEST_CASE("ml_detect") {
    const GsmMappingTable t = GsmMappingTable::build(4, 2);
    const Constellation c = Constellation::make(4);
    Rng rng(11);

    SUBCASE("noise-free exactness") {
        for (int trial = 0; trial < 100; ++trial) {
            ChannelRealization chan(draw_iid(4, 4, rng), t);
            const GsmEncoded e = t.encode(c, random_bits(6, rng));
            const CVector y = matvec(chan.h(), e.s);
            const DetectionResult res = ml_detect(y, chan, c, t);
            CHECK(res.k_hat == e.combo_index);
            CHECK(vec_dist(res.x_hat, e.x) == 0.0);
        }
    }
    SUBCASE("matches the naive enumerator") {
        const double sigma2 = snr_to_sigma2(8.0, 2);
        for (int trial = 0; trial < 200; ++trial) {
            ChannelRealization chan(draw_iid(4, 4, rng), t);
            const GsmEncoded e = t.encode(c, random_bits(6, rng));
            CVector y = matvec(chan.h(), e.s);
            const CVector n = draw_noise(4, NoiseModel{sigma2}, rng);
            for (size_t i = 0; i < y.size(); ++i) y[i] += n[i];
            const DetectionResult res = ml_detect(y, chan, c, t);
            const auto [k, x] = naive_ml(y, chan, c, t);
            CHECK(res.k_hat == k);
            CHECK(vec_dist(res.x_hat, x) == 0.0);
        }
    }
    SUBCASE("enumeration guard") {
        const GsmMappingTable big = GsmMappingTable::build(16, 8);  // N_C = 8192
        const Constellation c64 = Constellation::make(64);
        Rng r2(1);
        ChannelRealization chan(draw_iid(8, 16, r2), big);
        CHECK_THROWS_AS(ml_detect(CVector(8), chan, c64, big), TooLarge);
    }
}

TEST_CASE("residual dominance chain ml <= pbld <= lrzf") {
    const GsmMappingTable t = GsmMappingTable::build(4, 2);
    const Constellation c = Constellation::make(4);
    const PbldParams params;
    Rng rng(12);
    for (double snr_db : {2.0, 10.0}) {
        const double sigma2 = snr_to_sigma2(snr_db, 2);
        const PbldDerived d = derive_pbld(params, snr_db, t.n_c());
        for (int trial = 0; trial < 500; ++trial) {
            ChannelRealization chan(draw_iid(4, 4, rng), t);
            const GsmEncoded e = t.encode(c, random_bits(6, rng));
            CVector y = matvec(chan.h(), e.s);
            const CVector n = draw_noise(4, NoiseModel{sigma2}, rng);
            for (size_t i = 0; i < y.size(); ++i) y[i] += n[i];
            const double e_ml = ml_detect(y, chan, c, t).epsilon_min;
            const double e_pb = pbld_detect(y, chan, c, t, d, sigma2).epsilon_min;
            const double e_zf = lrzf_single_detect(y, chan, c, t).epsilon_min;
            CHECK(e_ml <= e_pb + 1e-12);
            CHECK(e_pb <= e_zf + 1e-12);
        }
    }
}

TEST_CASE("lrzf_single equals pbld with a pinned unit list") {
    const GsmMappingTable t = GsmMappingTable::build(4, 2);
    const Constellation c = Constellation::make(4);
    Rng rng(13);
    PbldDerived unit;
    unit.l_min = 1.0;
    unit.l_1 = 0.0;  // exp(0) = 1: lambda stays pinned at 1
    for (int trial = 0; trial < 200; ++trial) {
        ChannelRealization chan(draw_iid(4, 4, rng), t);
        const CVector y = random_cvector(4, rng);
        const DetectionResult a = lrzf_single_detect(y, chan, c, t);
        const DetectionResult b = pbld_detect(y, chan, c, t, unit, 1.0);
        CHECK(a.k_hat == b.k_hat);
        CHECK(vec_dist(a.x_hat, b.x_hat) == 0.0);
    }
}
