#include "gsmdetect/detectors.hpp"

#include <algorithm>
#include <cmath>

namespace gsmdet {

PbldDerived derive_pbld(const PbldParams& p, double rho_db, int n_c) {
    const double c_lo = p.c_lo_frac * n_c;
    const double c_hi = p.c_hi_frac * n_c;
    if (!(c_hi < c_lo)) throw std::invalid_argument("list control requires c_hi < c_lo");

    double x, x_lo, x_hi;
    if (p.lmin_scale == PbldParams::Scale::Db) {
        x = rho_db;
        x_lo = p.rho_lo_db;
        x_hi = p.rho_hi_db;
    } else {
        x = std::pow(10.0, rho_db / 10.0);
        x_lo = std::pow(10.0, p.rho_lo_db / 10.0);
        x_hi = std::pow(10.0, p.rho_hi_db / 10.0);
    }
    PbldDerived d;
    d.l_min = (c_hi - c_lo) / (x_hi - x_lo) * x + c_lo;
    if (d.l_min < 1.0) d.l_min = 1.0;  // the loop always examines candidate 1
    d.l_1 = d.l_min / std::sqrt(std::pow(10.0, rho_db / 10.0));
    return d;
}

namespace {

// Charge the one-time build cost of a cached channel aid to this context.
void charge_gram_build(DetectContext* ctx, const ChannelRealization& chan, int i) {
    if (!ctx) return;
    ctx->bind(chan);
    if (!ctx->gram_charged[static_cast<size_t>(i)]) {
        ctx->gram_charged[static_cast<size_t>(i)] = 1;
        ctx->fc.total += chan.gram(i).factor.build_flops;
    }
}

void charge_lll_build(DetectContext* ctx, const ChannelRealization& chan, int i) {
    if (!ctx) return;
    ctx->bind(chan);
    if (!ctx->lll_charged[static_cast<size_t>(i)]) {
        ctx->lll_charged[static_cast<size_t>(i)] = 1;
        ctx->fc.total += chan.lll(i).build_flops;
    }
}

}  // namespace

Stage1Result stage1_sort(const CVector& y, const ChannelRealization& chan, DetectContext* ctx) {
    const int n_c = chan.n_combos();
    FlopCounter* fc = ctx ? &ctx->fc : nullptr;
    Stage1Result out;
    out.order.resize(static_cast<size_t>(n_c));
    out.w.resize(static_cast<size_t>(n_c));
    out.projection.assign(static_cast<size_t>(n_c), -std::numeric_limits<double>::infinity());
    out.ok.assign(static_cast<size_t>(n_c), 0);

    for (int i = 0; i < n_c; ++i) {
        out.order[static_cast<size_t>(i)] = i;
        charge_gram_build(ctx, chan, i);
        const GramFactor& gf = chan.gram(i).factor;
        if (gf.singular) continue;  // sorted last with projection -inf
        out.w[static_cast<size_t>(i)] = gram_solve(gf, chan.sub(i), y, fc);
        out.projection[static_cast<size_t>(i)] =
            norm(matvec(chan.sub(i), out.w[static_cast<size_t>(i)], fc), fc);
        out.ok[static_cast<size_t>(i)] = 1;
    }
    std::stable_sort(out.order.begin(), out.order.end(), [&](int a, int b) {
        const double pa = out.projection[static_cast<size_t>(a)];
        const double pb = out.projection[static_cast<size_t>(b)];
        if (pa != pb) return pa > pb;
        return a < b;
    });
    return out;
}

CVector stage2_candidate(int j, const Stage1Result& s1, const ChannelRealization& chan,
                         const Constellation& c, DetectContext* ctx) {
    const int i = s1.order[static_cast<size_t>(j)];
    if (!s1.ok[static_cast<size_t>(i)])
        throw RankDeficient("combination skipped: singular gram in stage 1");
    charge_lll_build(ctx, chan, i);
    const auto& entry = chan.lll(i);
    if (entry.failed) throw RankDeficient("combination basis could not be reduced");
    FlopCounter* fc = ctx ? &ctx->fc : nullptr;

    const CVector z_tilde = matvec(entry.rb.t_inv, s1.w[static_cast<size_t>(i)], fc);
    const CVector z_hat = quantize_lr(c, z_tilde, entry.rb.t_inv, fc);
    CVector cand = matvec(entry.rb.t, z_hat, fc);
    // LR quantization is unbounded; snap every entry onto the alphabet
    for (cplx& v : cand) v = c.quantize(v);
    if (fc) {
        const auto m = static_cast<std::uint64_t>(c.order()) * cand.size();
        fc->charge(FlopKind::CAdd, m);
        fc->charge(FlopKind::RMul, 2 * m);
        fc->charge(FlopKind::RAdd, m);
    }
    return cand;
}

double quality_metric(double epsilon, int n_r, double sigma2) {
    if (sigma2 <= 0.0)
        return (epsilon > 0.0) ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
    return (epsilon * epsilon - n_r * sigma2) / (std::sqrt(static_cast<double>(n_r)) * sigma2);
}

int list_length(double phi, const PbldDerived& d, int n_c) {
    double grown;
    const double arg = d.l_1 * phi;
    if (arg > 50.0)
        grown = std::numeric_limits<double>::infinity();
    else
        grown = std::exp(arg);
    const double val = std::max(d.l_min, grown);
    if (!(val < static_cast<double>(n_c))) return n_c;
    int lam = static_cast<int>(std::ceil(val));
    return std::max(lam, 1);
}

DetectionResult pbld_detect(const CVector& y, const ChannelRealization& chan,
                            const Constellation& c, const GsmMappingTable& table,
                            const PbldDerived& d, double sigma2, DetectContext* ctx) {
    if (ctx) {
        ctx->bind(chan);
        ctx->fc.reset();
    }
    FlopCounter* fc = ctx ? &ctx->fc : nullptr;
    const Stage1Result s1 = stage1_sort(y, chan, ctx);
    const int n_c = chan.n_combos();
    const int n_r = chan.n_r();

    DetectionResult res;
    res.lambda_history.push_back(n_c);
    int lambda = n_c;
    double eps_min = std::numeric_limits<double>::infinity();
    int j = 1;
    for (; j <= lambda && j <= n_c; ++j) {
        double eps = std::numeric_limits<double>::infinity();
        CVector cand;
        try {
            cand = stage2_candidate(j - 1, s1, chan, c, ctx);
            const int i = s1.order[static_cast<size_t>(j - 1)];
            const CVector r = vec_sub(y, matvec(chan.sub(i), cand, fc), fc);
            eps = norm(r, fc);
        } catch (const RankDeficient&) {
            // degenerate combination, recorded with eps = +inf
        }
        if (eps < eps_min) {
            eps_min = eps;
            res.k_hat = s1.order[static_cast<size_t>(j - 1)];
            res.x_hat = std::move(cand);
            const double phi = quality_metric(eps, n_r, sigma2);
            lambda = list_length(phi, d, n_c);
            res.lambda_history.push_back(lambda);
        }
    }
    res.candidates_examined = j - 1;
    res.final_list_length = lambda;
    res.epsilon_min = eps_min;
    if (res.k_hat < 0) {
        // every combination degenerate: best-effort output, flagged invalid
        res.valid = false;
        res.k_hat = s1.order[0];
        res.x_hat.assign(static_cast<size_t>(table.n_a()), c.quantize(cplx(0.0, 0.0)));
    }
    res.s_hat = table.reconstruct(res.k_hat, res.x_hat);
    res.flops = ctx ? ctx->fc.total : 0;
    return res;
}

MlWorkspace MlWorkspace::build(const ChannelRealization& chan, const Constellation& c, int n_a) {
    MlWorkspace ws;
    const int m = c.order();
    std::uint64_t hyps = 1;
    for (int a = 0; a < n_a; ++a) hyps *= static_cast<std::uint64_t>(m);
    ws.symbol_vectors.resize(hyps, CVector(static_cast<size_t>(n_a)));
    for (std::uint64_t h = 0; h < hyps; ++h) {
        std::uint64_t rem = h;
        for (int a = n_a - 1; a >= 0; --a) {
            ws.symbol_vectors[h][static_cast<size_t>(a)] =
                c.points()[static_cast<size_t>(rem % m)];
            rem /= static_cast<std::uint64_t>(m);
        }
    }
    const int n_r = chan.n_r();
    ws.products.resize(static_cast<size_t>(chan.n_combos()));
    for (int k = 0; k < chan.n_combos(); ++k) {
        auto& block = ws.products[static_cast<size_t>(k)];
        block.resize(hyps * static_cast<size_t>(n_r));
        for (std::uint64_t h = 0; h < hyps; ++h) {
            const CVector v = matvec(chan.sub(k), ws.symbol_vectors[h]);
            std::copy(v.begin(), v.end(), block.begin() + static_cast<size_t>(h) * n_r);
        }
    }
    return ws;
}

DetectionResult ml_detect(const CVector& y, const ChannelRealization& chan,
                          const Constellation& c, const GsmMappingTable& table,
                          DetectContext* ctx, const MlWorkspace* ws) {
    if (ctx) {
        ctx->bind(chan);
        ctx->fc.reset();
    }
    const int n_c = chan.n_combos();
    const int n_r = chan.n_r();
    const int n_a = table.n_a();
    std::uint64_t per_combo = 1;
    for (int a = 0; a < n_a; ++a) per_combo *= static_cast<std::uint64_t>(c.order());
    const std::uint64_t hyps = per_combo * static_cast<std::uint64_t>(n_c);
    if (hyps > (1ULL << 20)) throw TooLarge("ML enumeration guard exceeded");

    MlWorkspace local;
    if (!ws) {
        local = MlWorkspace::build(chan, c, n_a);
        ws = &local;
    }

    double best = std::numeric_limits<double>::infinity();
    int best_k = 0;
    std::uint64_t best_h = 0;
    for (int k = 0; k < n_c; ++k) {
        const auto& block = ws->products[static_cast<size_t>(k)];
        for (std::uint64_t h = 0; h < per_combo; ++h) {
            const cplx* v = block.data() + static_cast<size_t>(h) * n_r;
            double acc = 0.0;
            for (int i = 0; i < n_r; ++i) {
                const double dr = y[static_cast<size_t>(i)].real() - v[i].real();
                const double di = y[static_cast<size_t>(i)].imag() - v[i].imag();
                acc += dr * dr + di * di;
                if (acc >= best) break;  // strict improvement only; safe to abandon
            }
            if (acc < best) {
                best = acc;
                best_k = k;
                best_h = h;
            }
        }
    }

    if (ctx) {
        // closed-form cost of the naive enumeration: per hypothesis one
        // matvec, one vector subtraction and one norm
        const std::uint64_t per_hyp =
            flop_cost(FlopKind::CMul) * static_cast<std::uint64_t>(n_r) * n_a +
            flop_cost(FlopKind::CAdd) * static_cast<std::uint64_t>(n_r) * (n_a > 1 ? n_a - 1 : 0) +
            flop_cost(FlopKind::CAdd) * static_cast<std::uint64_t>(n_r) +
            flop_cost(FlopKind::RMul) * 2 * static_cast<std::uint64_t>(n_r) +
            flop_cost(FlopKind::RAdd) * (2 * static_cast<std::uint64_t>(n_r) - 1) +
            flop_cost(FlopKind::Sqrt);
        ctx->fc.total += hyps * per_hyp;
    }

    DetectionResult res;
    res.k_hat = best_k;
    res.x_hat = ws->symbol_vectors[best_h];
    res.s_hat = table.reconstruct(best_k, res.x_hat);
    res.candidates_examined = n_c;
    res.final_list_length = n_c;
    res.epsilon_min = std::sqrt(best);
    res.flops = ctx ? ctx->fc.total : 0;
    return res;
}

DetectionResult lrzf_single_detect(const CVector& y, const ChannelRealization& chan,
                                   const Constellation& c, const GsmMappingTable& table,
                                   DetectContext* ctx) {
    if (ctx) {
        ctx->bind(chan);
        ctx->fc.reset();
    }
    FlopCounter* fc = ctx ? &ctx->fc : nullptr;
    const Stage1Result s1 = stage1_sort(y, chan, ctx);
    const int n_c = chan.n_combos();

    DetectionResult res;
    res.final_list_length = 1;
    for (int j = 0; j < n_c; ++j) {
        try {
            CVector cand = stage2_candidate(j, s1, chan, c, ctx);
            const int i = s1.order[static_cast<size_t>(j)];
            const CVector r = vec_sub(y, matvec(chan.sub(i), cand, fc), fc);
            res.epsilon_min = norm(r, fc);
            res.k_hat = i;
            res.x_hat = std::move(cand);
            res.candidates_examined = j + 1;
            break;
        } catch (const RankDeficient&) {
            continue;
        }
    }
    if (res.k_hat < 0) {
        res.valid = false;
        res.k_hat = s1.order[0];
        res.x_hat.assign(static_cast<size_t>(table.n_a()), c.quantize(cplx(0.0, 0.0)));
        res.candidates_examined = n_c;
    }
    res.s_hat = table.reconstruct(res.k_hat, res.x_hat);
    res.flops = ctx ? ctx->fc.total : 0;
    return res;
}

}  // namespace gsmdet
