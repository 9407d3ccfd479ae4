#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "gdce/dataset.hpp"
#include "gdce/diffusion.hpp"
#include "gdce/errors.hpp"
#include "gdce/graph.hpp"
#include "gdce/linalg.hpp"
#include "gdce/parallel.hpp"
#include "gdce/rng.hpp"

namespace gdce {

// Conditioning target: a concrete value from a finite vocabulary, or the
// explicit null (unconditional) token. The null token has no parameters of
// its own — it is the absence of the condition embedding.
struct Condition {
    bool is_null = true;
    int value = 0;

    static Condition null() { return {}; }
    static Condition of(int v) { return {false, v}; }

    bool operator==(const Condition&) const = default;
};

// Architecture hyperparameters, fixed at model creation and serialized.
struct DenoiserConfig {
    int a = 1;
    int b = 2;
    int hidden = 64;
    int layers = 3;
    int T = 200;
    std::vector<int> vocab;    // sorted condition values
    bool struct_feats = false;

    bool operator==(const DenoiserConfig&) const = default;

    void validate() const {
        if (a < 1 || b < 2) throw std::invalid_argument("DenoiserConfig: need a >= 1, b >= 2");
        if (hidden < 2 || hidden % 2 != 0)
            throw std::invalid_argument("DenoiserConfig: hidden must be even and >= 2");
        if (layers < 1) throw std::invalid_argument("DenoiserConfig: layers must be >= 1");
        if (T < 1) throw std::invalid_argument("DenoiserConfig: T must be >= 1");
        if (vocab.empty() || !std::is_sorted(vocab.begin(), vocab.end()))
            throw std::invalid_argument("DenoiserConfig: vocab must be non-empty and sorted");
    }

    // row into the condition table, or -1 for the null token
    int cond_index(Condition c) const {
        if (c.is_null) return -1;
        auto it = std::lower_bound(vocab.begin(), vocab.end(), c.value);
        if (it == vocab.end() || *it != c.value)
            throw std::invalid_argument("condition value " + std::to_string(c.value) +
                                        " outside vocabulary");
        return static_cast<int>(it - vocab.begin());
    }
};

struct LayerParams {
    Mat a1, a2, a3, a0;  // pair update
    Mat b1, b2, b0;      // pair -> node messages
    Mat c1, c2, c3, c0;  // node update
    Mat d1, d2, d3, d0;  // global update

    bool operator==(const LayerParams&) const = default;
};

// All trainable parameters. Used both for the model and (same shapes) for
// gradient accumulators.
struct DenoiserParams {
    DenoiserConfig cfg;

    Mat wx, bx;    // node one-hot embed: a -> d
    Mat we, be;    // edge one-hot embed: b -> d
    Mat wt, bt;    // sinusoidal time features -> d
    Mat ctab;      // condition table: |vocab| x d, zero-initialized
    Mat wdeg;      // d x 1, degree feature (only when struct_feats)
    Mat wdens;     // d x 1, global density feature (only when struct_feats)
    std::vector<LayerParams> layers;
    Mat ox_w, ox_b;  // node head: d -> a
    Mat oe_w, oe_b;  // edge head: d -> b

    bool operator==(const DenoiserParams&) const = default;

    template <typename Self>
    static auto entry_list(Self& s) {
        using MatPtr = std::conditional_t<std::is_const_v<Self>, const Mat*, Mat*>;
        std::vector<std::pair<std::string, MatPtr>> out;
        auto add = [&](std::string name, MatPtr m) { out.emplace_back(std::move(name), m); };
        add("wx", &s.wx); add("bx", &s.bx);
        add("we", &s.we); add("be", &s.be);
        add("wt", &s.wt); add("bt", &s.bt);
        add("ctab", &s.ctab);
        add("wdeg", &s.wdeg); add("wdens", &s.wdens);
        for (std::size_t l = 0; l < s.layers.size(); ++l) {
            auto& lp = s.layers[l];
            const std::string pre = "layer" + std::to_string(l) + ".";
            add(pre + "a1", &lp.a1); add(pre + "a2", &lp.a2); add(pre + "a3", &lp.a3);
            add(pre + "a0", &lp.a0);
            add(pre + "b1", &lp.b1); add(pre + "b2", &lp.b2); add(pre + "b0", &lp.b0);
            add(pre + "c1", &lp.c1); add(pre + "c2", &lp.c2); add(pre + "c3", &lp.c3);
            add(pre + "c0", &lp.c0);
            add(pre + "d1", &lp.d1); add(pre + "d2", &lp.d2); add(pre + "d3", &lp.d3);
            add(pre + "d0", &lp.d0);
        }
        add("ox_w", &s.ox_w); add("ox_b", &s.ox_b);
        add("oe_w", &s.oe_w); add("oe_b", &s.oe_b);
        return out;
    }
    auto entries() { return entry_list(*this); }
    auto entries() const { return entry_list(*this); }

    std::size_t count() const {
        std::size_t total = 0;
        for (auto& [name, m] : entries()) total += m->size();
        return total;
    }

    void zero() {
        for (auto& [name, m] : entries()) m->zero();
    }
    void accumulate(const DenoiserParams& g) {
        auto dst = entries();
        auto src = g.entries();
        for (std::size_t i = 0; i < dst.size(); ++i) axpy(1.0, *src[i].second, *dst[i].second);
    }
    void scale(double s) {
        for (auto& [name, m] : entries())
            for (double& v : m->a) v *= s;
    }
};

inline DenoiserParams make_params(const DenoiserConfig& cfg) {
    cfg.validate();
    const int d = cfg.hidden;
    DenoiserParams p;
    p.cfg = cfg;
    p.wx = Mat(d, cfg.a); p.bx = Mat(1, d);
    p.we = Mat(d, cfg.b); p.be = Mat(1, d);
    p.wt = Mat(d, d);     p.bt = Mat(1, d);
    p.ctab = Mat(static_cast<int>(cfg.vocab.size()), d);
    p.wdeg = Mat(d, 1);
    p.wdens = Mat(d, 1);
    p.layers.resize(static_cast<std::size_t>(cfg.layers));
    for (auto& lp : p.layers) {
        lp.a1 = lp.a2 = lp.a3 = Mat(d, d); lp.a0 = Mat(1, d);
        lp.b1 = lp.b2 = Mat(d, d);         lp.b0 = Mat(1, d);
        lp.c1 = lp.c2 = lp.c3 = Mat(d, d); lp.c0 = Mat(1, d);
        lp.d1 = lp.d2 = lp.d3 = Mat(d, d); lp.d0 = Mat(1, d);
    }
    p.ox_w = Mat(cfg.a, d); p.ox_b = Mat(1, cfg.a);
    p.oe_w = Mat(cfg.b, d); p.oe_b = Mat(1, cfg.b);
    return p;
}

inline void init_params(DenoiserParams& p, Rng& rng) {
    auto xavier = [&](Mat& w) {
        const double lim = std::sqrt(6.0 / (w.rows + w.cols));
        for (double& v : w.a) v = (2.0 * uniform01(rng) - 1.0) * lim;
    };
    xavier(p.wx); xavier(p.we); xavier(p.wt);
    xavier(p.wdeg); xavier(p.wdens);
    for (auto& lp : p.layers) {
        xavier(lp.a1); xavier(lp.a2); xavier(lp.a3);
        xavier(lp.b1); xavier(lp.b2);
        xavier(lp.c1); xavier(lp.c2); xavier(lp.c3);
        xavier(lp.d1); xavier(lp.d2); xavier(lp.d3);
    }
    xavier(p.ox_w); xavier(p.oe_w);
    // biases and the condition table stay zero: the null condition is the
    // all-zeros embedding, so untrained values coincide with it exactly
}

namespace detail {

// One-hot / structural encoding of a graph state.
struct Encoded {
    int n = 0;
    int num_pairs = 0;
    Mat x;                    // n x a
    Mat ep;                   // P x b
    std::vector<int> pi, pj;  // pair p = (pi[p], pj[p]), i < j lexicographic
    Mat deg;                  // n x 1, degrees in the noisy graph / (n-1)
    Mat dens;                 // 1 x 1, fraction of non-empty pairs
};

inline Encoded encode(const GraphInstance& g) {
    Encoded e;
    e.n = g.n;
    e.num_pairs = g.n * (g.n - 1) / 2;
    e.x = Mat(g.n, g.a);
    for (int i = 0; i < g.n; ++i) e.x.at(i, g.node_cat[i]) = 1.0;
    e.ep = Mat(e.num_pairs, g.b);
    e.pi.resize(static_cast<std::size_t>(e.num_pairs));
    e.pj.resize(static_cast<std::size_t>(e.num_pairs));
    e.deg = Mat(g.n, 1);
    e.dens = Mat(1, 1);
    int filled = 0;
    for (int i = 0, p = 0; i < g.n; ++i) {
        for (int j = i + 1; j < g.n; ++j, ++p) {
            e.pi[p] = i;
            e.pj[p] = j;
            const int c = g.edge(i, j);
            e.ep.at(p, c) = 1.0;
            if (c != 0) {
                e.deg.at(i, 0) += 1.0;
                e.deg.at(j, 0) += 1.0;
                ++filled;
            }
        }
    }
    if (g.n > 1) {
        for (double& v : e.deg.a) v /= g.n - 1;
        e.dens.at(0, 0) = static_cast<double>(filled) / e.num_pairs;
    }
    return e;
}

inline Mat pair_sum(const Encoded& e, const Mat& h) {  // S_p = H_i + H_j
    Mat s(e.num_pairs, h.cols);
    for (int p = 0; p < e.num_pairs; ++p) {
        const double* hi = h.row(e.pi[p]);
        const double* hj = h.row(e.pj[p]);
        double* sp = s.row(p);
        for (int c = 0; c < h.cols; ++c) sp[c] = hi[c] + hj[c];
    }
    return s;
}

inline void pair_sum_backward(const Encoded& e, const Mat& ds, Mat& dh) {
    for (int p = 0; p < e.num_pairs; ++p) {
        const double* sp = ds.row(p);
        double* di = dh.row(e.pi[p]);
        double* dj = dh.row(e.pj[p]);
        for (int c = 0; c < ds.cols; ++c) {
            di[c] += sp[c];
            dj[c] += sp[c];
        }
    }
}

inline Mat scatter_mean(const Encoded& e, const Mat& u) {  // M_i = mean over pairs at i
    Mat m(e.n, u.cols);
    if (e.n < 2) return m;
    const double inv = 1.0 / (e.n - 1);
    for (int p = 0; p < e.num_pairs; ++p) {
        const double* up = u.row(p);
        double* mi = m.row(e.pi[p]);
        double* mj = m.row(e.pj[p]);
        for (int c = 0; c < u.cols; ++c) {
            mi[c] += inv * up[c];
            mj[c] += inv * up[c];
        }
    }
    return m;
}

inline void scatter_mean_backward(const Encoded& e, const Mat& dm, Mat& du) {
    if (e.n < 2) return;
    const double inv = 1.0 / (e.n - 1);
    for (int p = 0; p < e.num_pairs; ++p) {
        const double* di = dm.row(e.pi[p]);
        const double* dj = dm.row(e.pj[p]);
        double* dp = du.row(p);
        for (int c = 0; c < dm.cols; ++c) dp[c] += inv * (di[c] + dj[c]);
    }
}

inline Mat sinusoidal_features(int t, int dim) {
    Mat f(1, dim);
    const int half = dim / 2;
    for (int k = 0; k < half; ++k) {
        const double freq = std::pow(10000.0, -2.0 * k / dim);
        f.a[2 * k] = std::sin(t * freq);
        f.a[2 * k + 1] = std::cos(t * freq);
    }
    return f;
}

inline void softmax_rows(const Mat& logits, Mat& probs) {
    probs = logits;
    for (int r = 0; r < probs.rows; ++r) {
        double* row = probs.row(r);
        double mx = row[0];
        for (int c = 1; c < probs.cols; ++c) mx = std::max(mx, row[c]);
        double total = 0.0;
        for (int c = 0; c < probs.cols; ++c) {
            row[c] = std::exp(row[c] - mx);
            total += row[c];
        }
        for (int c = 0; c < probs.cols; ++c) row[c] /= total;
    }
}

struct LayerTrace {
    Mat s;           // pair sums of the layer input
    Mat et, f1;      // pair update activation, residual output
    Mat u, m;        // messages, node aggregates
    Mat nt, h1;      // node update activation, residual output
    Mat hbar, fbar;  // pooled features
    Mat gt, g1;      // global update activation, residual output
};

struct ForwardTrace {
    Encoded enc;
    Mat sinfeat;
    int cond_row = -1;
    Mat h0, f0, g0;
    std::vector<LayerTrace> layer;
    Mat logits_x, logits_e;
    Mat px, pe;
};

inline void forward(const DenoiserParams& p, const GraphInstance& g_t, int t, Condition c,
                    ForwardTrace& tr) {
    const auto& cfg = p.cfg;
    if (t < 1 || t > cfg.T) throw std::invalid_argument("predict: t out of range");
    if (g_t.a != cfg.a || g_t.b != cfg.b)
        throw std::invalid_argument("predict: category count mismatch with model");
    const int d = cfg.hidden;

    tr.enc = encode(g_t);
    tr.cond_row = cfg.cond_index(c);
    tr.sinfeat = sinusoidal_features(t, d);
    const auto& e = tr.enc;

    tr.h0 = Mat(e.n, d);
    gemm_nt(e.x, p.wx, tr.h0);
    add_row_broadcast(tr.h0, p.bx);
    if (cfg.struct_feats) gemm_nt(e.deg, p.wdeg, tr.h0);

    tr.f0 = Mat(e.num_pairs, d);
    gemm_nt(e.ep, p.we, tr.f0);
    add_row_broadcast(tr.f0, p.be);

    tr.g0 = mean_rows(tr.h0);
    gemm_nt(tr.sinfeat, p.wt, tr.g0);
    axpy(1.0, p.bt, tr.g0);
    if (tr.cond_row >= 0)
        for (int k = 0; k < d; ++k) tr.g0.a[k] += p.ctab.at(tr.cond_row, k);
    if (cfg.struct_feats) gemm_nt(e.dens, p.wdens, tr.g0);

    tr.layer.assign(static_cast<std::size_t>(cfg.layers), {});
    const Mat* h = &tr.h0;
    const Mat* f = &tr.f0;
    const Mat* g = &tr.g0;
    for (int l = 0; l < cfg.layers; ++l) {
        auto& lp = p.layers[l];
        auto& lt = tr.layer[l];

        lt.s = pair_sum(e, *h);

        Mat gl(1, d);  // per-layer global injection for the pair update
        gemm_nt(*g, lp.a3, gl);
        axpy(1.0, lp.a0, gl);
        lt.et = Mat(e.num_pairs, d);
        gemm_nt(*f, lp.a1, lt.et);
        gemm_nt(lt.s, lp.a2, lt.et);
        add_row_broadcast(lt.et, gl);
        tanh_inplace(lt.et);
        lt.f1 = *f;
        axpy(1.0, lt.et, lt.f1);

        lt.u = Mat(e.num_pairs, d);
        gemm_nt(lt.f1, lp.b1, lt.u);
        gemm_nt(lt.s, lp.b2, lt.u);
        add_row_broadcast(lt.u, lp.b0);
        tanh_inplace(lt.u);
        lt.m = scatter_mean(e, lt.u);

        Mat gn(1, d);
        gemm_nt(*g, lp.c3, gn);
        axpy(1.0, lp.c0, gn);
        lt.nt = Mat(e.n, d);
        gemm_nt(*h, lp.c1, lt.nt);
        gemm_nt(lt.m, lp.c2, lt.nt);
        add_row_broadcast(lt.nt, gn);
        tanh_inplace(lt.nt);
        lt.h1 = *h;
        axpy(1.0, lt.nt, lt.h1);

        lt.hbar = mean_rows(lt.h1);
        lt.fbar = e.num_pairs > 0 ? mean_rows(lt.f1) : Mat(1, d);
        lt.gt = Mat(1, d);
        gemm_nt(*g, lp.d1, lt.gt);
        gemm_nt(lt.hbar, lp.d2, lt.gt);
        gemm_nt(lt.fbar, lp.d3, lt.gt);
        axpy(1.0, lp.d0, lt.gt);
        tanh_inplace(lt.gt);
        lt.g1 = *g;
        axpy(1.0, lt.gt, lt.g1);

        h = &lt.h1;
        f = &lt.f1;
        g = &lt.g1;
    }

    tr.logits_x = Mat(e.n, cfg.a);
    gemm_nt(*h, p.ox_w, tr.logits_x);
    add_row_broadcast(tr.logits_x, p.ox_b);
    // pair rows serve (i,j) and (j,i) at once, so the edge logits are
    // symmetric before normalization by construction
    tr.logits_e = Mat(e.num_pairs, cfg.b);
    gemm_nt(*f, p.oe_w, tr.logits_e);
    add_row_broadcast(tr.logits_e, p.oe_b);

    softmax_rows(tr.logits_x, tr.px);
    softmax_rows(tr.logits_e, tr.pe);
}

// Cross-entropy gradients flow in through dlogits; everything else is the
// reverse of forward(). Gradients are accumulated into `grad`.
inline void backward(const DenoiserParams& p, const ForwardTrace& tr, const Mat& dlogits_x,
                     const Mat& dlogits_e, DenoiserParams& grad) {
    const auto& cfg = p.cfg;
    const auto& e = tr.enc;
    const int d = cfg.hidden;

    const Mat* h_last = cfg.layers > 0 ? &tr.layer.back().h1 : &tr.h0;
    const Mat* f_last = cfg.layers > 0 ? &tr.layer.back().f1 : &tr.f0;

    Mat dh(e.n, d), df(e.num_pairs, d), dg(1, d);
    gemm_tn(dlogits_x, *h_last, grad.ox_w);
    add_col_sums(dlogits_x, grad.ox_b);
    gemm_nn(dlogits_x, p.ox_w, dh);
    gemm_tn(dlogits_e, *f_last, grad.oe_w);
    add_col_sums(dlogits_e, grad.oe_b);
    gemm_nn(dlogits_e, p.oe_w, df);

    for (int l = cfg.layers - 1; l >= 0; --l) {
        const auto& lp = p.layers[l];
        auto& gl = grad.layers[l];
        const auto& lt = tr.layer[l];
        const Mat& hin = l == 0 ? tr.h0 : tr.layer[l - 1].h1;
        const Mat& fin = l == 0 ? tr.f0 : tr.layer[l - 1].f1;
        const Mat& gin = l == 0 ? tr.g0 : tr.layer[l - 1].g1;

        // global residual g1 = gin + tanh(Ga)
        Mat dga(1, d);
        tanh_backward(lt.gt, dg, dga);
        Mat dgin = dg;
        gemm_tn(dga, gin, gl.d1);
        gemm_nn(dga, lp.d1, dgin);
        gemm_tn(dga, lt.hbar, gl.d2);
        Mat dhbar(1, d);
        gemm_nn(dga, lp.d2, dhbar);
        gemm_tn(dga, lt.fbar, gl.d3);
        Mat dfbar(1, d);
        gemm_nn(dga, lp.d3, dfbar);
        axpy(1.0, dga, gl.d0);

        // pooled means feed back into every row
        Mat dh1 = dh;
        for (int r = 0; r < e.n; ++r)
            for (int c = 0; c < d; ++c) dh1.at(r, c) += dhbar.a[c] / e.n;
        Mat df1 = df;
        if (e.num_pairs > 0)
            for (int r = 0; r < e.num_pairs; ++r)
                for (int c = 0; c < d; ++c) df1.at(r, c) += dfbar.a[c] / e.num_pairs;

        // node residual h1 = hin + tanh(Na)
        Mat dna(e.n, d);
        tanh_backward(lt.nt, dh1, dna);
        Mat dhin = dh1;
        gemm_tn(dna, hin, gl.c1);
        gemm_nn(dna, lp.c1, dhin);
        gemm_tn(dna, lt.m, gl.c2);
        Mat dm(e.n, d);
        gemm_nn(dna, lp.c2, dm);
        Mat dna_sum(1, d);
        add_col_sums(dna, dna_sum);
        gemm_tn(dna_sum, gin, gl.c3);
        gemm_nn(dna_sum, lp.c3, dgin);
        axpy(1.0, dna_sum, gl.c0);

        // messages
        Mat du(e.num_pairs, d);
        scatter_mean_backward(e, dm, du);
        Mat dua(e.num_pairs, d);
        tanh_backward(lt.u, du, dua);
        gemm_tn(dua, lt.f1, gl.b1);
        gemm_nn(dua, lp.b1, df1);  // f1 also feeds the messages
        gemm_tn(dua, lt.s, gl.b2);
        Mat ds(e.num_pairs, d);
        gemm_nn(dua, lp.b2, ds);
        Mat dua_sum(1, d);
        add_col_sums(dua, dua_sum);
        axpy(1.0, dua_sum, gl.b0);

        // pair residual f1 = fin + tanh(Ea)
        Mat dea(e.num_pairs, d);
        tanh_backward(lt.et, df1, dea);
        Mat dfin = df1;
        gemm_tn(dea, fin, gl.a1);
        gemm_nn(dea, lp.a1, dfin);
        gemm_tn(dea, lt.s, gl.a2);
        gemm_nn(dea, lp.a2, ds);
        Mat dea_sum(1, d);
        add_col_sums(dea, dea_sum);
        gemm_tn(dea_sum, gin, gl.a3);
        gemm_nn(dea_sum, lp.a3, dgin);
        axpy(1.0, dea_sum, gl.a0);

        // pair sums S = H_i + H_j
        pair_sum_backward(e, ds, dhin);

        dh = std::move(dhin);
        df = std::move(dfin);
        dg = std::move(dgin);
    }

    // embeddings
    Mat dh0 = dh;
    for (int r = 0; r < e.n; ++r)
        for (int c = 0; c < d; ++c) dh0.at(r, c) += dg.a[c] / e.n;
    gemm_tn(dg, tr.sinfeat, grad.wt);
    axpy(1.0, dg, grad.bt);
    if (tr.cond_row >= 0)
        for (int k = 0; k < d; ++k) grad.ctab.at(tr.cond_row, k) += dg.a[k];
    if (cfg.struct_feats)
        for (int k = 0; k < d; ++k) grad.wdens.at(k, 0) += dg.a[k] * e.dens.at(0, 0);

    gemm_tn(dh0, e.x, grad.wx);
    add_col_sums(dh0, grad.bx);
    if (cfg.struct_feats)
        for (int r = 0; r < e.n; ++r)
            for (int k = 0; k < d; ++k) grad.wdeg.at(k, 0) += dh0.at(r, k) * e.deg.at(r, 0);

    gemm_tn(df, e.ep, grad.we);
    add_col_sums(df, grad.be);
}

}  // namespace detail

/// Denoiser forward pass: clean-graph category distributions given a noisy
/// graph, timestep, and condition. Permutation equivariant.
inline DenoiserOutput predict(const DenoiserParams& p, const GraphInstance& g_t, int t,
                              Condition c) {
    detail::ForwardTrace tr;
    detail::forward(p, g_t, t, c, tr);
    DenoiserOutput out;
    out.n = g_t.n;
    out.a = p.cfg.a;
    out.b = p.cfg.b;
    out.px = std::move(tr.px.a);
    out.pe = std::move(tr.pe.a);
    return out;
}

/// Mean node cross-entropy plus lambda_e times mean edge cross-entropy against
/// the clean graph's one-hot categories. Log-probabilities are floored at -30.
inline double loss(const DenoiserOutput& pred, const GraphInstance& g0, double lambda_e) {
    if (pred.n != g0.n || pred.a != g0.a || pred.b != g0.b)
        throw std::invalid_argument("loss: shape mismatch");
    auto clamped_log = [](double v) { return std::max(std::log(std::max(v, 0.0)), -30.0); };
    double node_ce = 0.0;
    for (int i = 0; i < g0.n; ++i) node_ce -= clamped_log(pred.node_row(i)[g0.node_cat[i]]);
    node_ce /= g0.n;
    double edge_ce = 0.0;
    const int num_pairs = g0.n * (g0.n - 1) / 2;
    for (int i = 0; i < g0.n; ++i)
        for (int j = i + 1; j < g0.n; ++j)
            edge_ce -= clamped_log(pred.edge_row(i, j)[g0.edge(i, j)]);
    if (num_pairs > 0) edge_ce /= num_pairs;
    return node_ce + lambda_e * edge_ce;
}

struct TrainMeta {
    std::uint64_t steps = 0;
    std::uint64_t seed = 0;
    double final_loss = 0.0;
    double p_uncond = 0.1;
    double lambda_e = 1.0;

    bool operator==(const TrainMeta&) const = default;
};

// Self-describing model artifact: parameters, architecture, condition
// vocabulary, the transition model, and training metadata.
struct ModelCheckpoint {
    DenoiserParams params;
    TransitionModel tm;
    TrainMeta meta;

    bool operator==(const ModelCheckpoint&) const = default;
};

struct TrainConfig {
    int T = 200;
    int hidden = 64;
    int layers = 3;
    bool struct_feats = false;
    double lr = 3e-4;
    double p_uncond = 0.1;
    double lambda_e = 1.0;
    double grad_clip = 1.0;
    int steps = 40000;
    int batch = 16;
    std::uint64_t seed = 1;
    int threads = 1;
    int log_every = 500;
    std::string loss_csv;  // telemetry path; empty disables
};

namespace detail {

// loss + gradient step for one training sample; returns the loss
inline double backprop_sample(const DenoiserParams& p, const GraphInstance& g_t,
                              const GraphInstance& g0, int t, Condition c, double lambda_e,
                              DenoiserParams& grad) {
    ForwardTrace tr;
    forward(p, g_t, t, c, tr);

    const auto& e = tr.enc;
    Mat dlx = tr.px;
    for (int i = 0; i < e.n; ++i) dlx.at(i, g0.node_cat[i]) -= 1.0;
    for (double& v : dlx.a) v /= e.n;
    Mat dle = tr.pe;
    for (int i = 0, q = 0; i < e.n; ++i)
        for (int j = i + 1; j < e.n; ++j, ++q) dle.at(q, g0.edge(i, j)) -= 1.0;
    if (e.num_pairs > 0)
        for (double& v : dle.a) v *= lambda_e / e.num_pairs;

    backward(p, tr, dlx, dle, grad);

    DenoiserOutput out;
    out.n = e.n;
    out.a = p.cfg.a;
    out.b = p.cfg.b;
    out.px = tr.px.a;
    out.pe = tr.pe.a;
    return loss(out, g0, lambda_e);
}

struct Adam {
    double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<double> m, v;
    std::uint64_t step = 0;

    explicit Adam(double lr_, std::size_t count) : lr(lr_), m(count, 0.0), v(count, 0.0) {}

    void update(DenoiserParams& p, const DenoiserParams& grad) {
        ++step;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        auto pe = p.entries();
        auto ge = grad.entries();
        std::size_t k = 0;
        for (std::size_t i = 0; i < pe.size(); ++i) {
            Mat& w = *pe[i].second;
            const Mat& g = *ge[i].second;
            for (std::size_t j = 0; j < w.a.size(); ++j, ++k) {
                m[k] = beta1 * m[k] + (1.0 - beta1) * g.a[j];
                v[k] = beta2 * v[k] + (1.0 - beta2) * g.a[j] * g.a[j];
                w.a[j] -= lr * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + eps);
            }
        }
    }
};

inline double grad_norm(const DenoiserParams& g) {
    double sq = 0.0;
    for (auto& [name, m] : g.entries())
        for (double v : m->a) sq += v * v;
    return std::sqrt(sq);
}

}  // namespace detail

// Checkpoint reals are stored as 32-bit floats; parameters are snapped to that
// grid once at the end of training so save/load round-trips bitwise.
inline void snap_params_to_f32(DenoiserParams& p) {
    for (auto& [name, m] : p.entries())
        for (double& v : m->a) v = static_cast<double>(static_cast<float>(v));
}

/// Conditioning-dropout training loop: sample a graph and a timestep, noise the
/// graph forward, replace the condition by null with probability p_uncond, and
/// minimize the denoising cross-entropy with Adam. Deterministic under a fixed
/// seed for any thread count (per-sample RNG streams, fixed reduction order).
inline ModelCheckpoint train(const LabeledDataset& ds, const TrainConfig& cfg,
                             const ModelCheckpoint* resume = nullptr) {
    if (ds.size() == 0) throw std::invalid_argument("train: empty dataset");
    if (cfg.steps < 1 || cfg.batch < 1) throw std::invalid_argument("train: bad steps/batch");

    std::vector<int> vocab = ds.labels;
    std::sort(vocab.begin(), vocab.end());
    vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());

    DenoiserConfig dc;
    dc.a = ds.a;
    dc.b = ds.b;
    dc.hidden = cfg.hidden;
    dc.layers = cfg.layers;
    dc.T = cfg.T;
    dc.vocab = vocab;
    dc.struct_feats = cfg.struct_feats;

    ModelCheckpoint ckpt;
    if (resume) {
        if (resume->params.cfg.T != cfg.T)
            throw DataError("train: checkpoint T=" + std::to_string(resume->params.cfg.T) +
                            " does not match configured T=" + std::to_string(cfg.T));
        if (resume->params.cfg.a != ds.a || resume->params.cfg.b != ds.b ||
            resume->params.cfg.vocab != vocab)
            throw DataError("train: checkpoint categories/vocabulary do not match dataset");
        ckpt = *resume;
    } else {
        ckpt.params = make_params(dc);
        Rng init_rng = make_stream({cfg.seed, 0x1217});
        init_params(ckpt.params, init_rng);
        ckpt.tm = TransitionModel(ds.marginal_x, ds.marginal_e, build_schedule(cfg.T));
    }
    DenoiserParams& params = ckpt.params;
    const TransitionModel& tm = ckpt.tm;

    std::vector<GraphInstance> dense;
    dense.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) dense.push_back(to_dense(ds.graphs[i]));

    std::ofstream csv;
    if (!cfg.loss_csv.empty()) {
        csv.open(cfg.loss_csv);
        if (!csv) throw DataError("train: cannot open " + cfg.loss_csv);
        csv << "step,loss\n";
    }

    detail::Adam opt(cfg.lr, params.count());
    std::vector<DenoiserParams> grads(static_cast<std::size_t>(cfg.batch));
    std::vector<double> losses(static_cast<std::size_t>(cfg.batch));
    for (auto& g : grads) g = make_params(dc);
    DenoiserParams total = make_params(dc);

    double window_sum = 0.0;
    int window_count = 0;
    double last_window_avg = 0.0;

    for (int step = 0; step < cfg.steps; ++step) {
        parallel_for(static_cast<std::size_t>(cfg.batch), cfg.threads, [&](std::size_t k) {
            Rng rng = make_stream({cfg.seed, 0xBA7C, static_cast<std::uint64_t>(step), k});
            const int idx = uniform_int(rng, 0, static_cast<int>(ds.size()) - 1);
            const int t = uniform_int(rng, 1, cfg.T);
            const GraphInstance& g0 = dense[static_cast<std::size_t>(idx)];
            const GraphInstance g_t = forward_sample(tm, g0, t, rng);
            const Condition c = uniform01(rng) < cfg.p_uncond
                                    ? Condition::null()
                                    : Condition::of(ds.labels[static_cast<std::size_t>(idx)]);
            grads[k].zero();
            losses[k] = detail::backprop_sample(params, g_t, g0, t, c, cfg.lambda_e, grads[k]);
        });

        total.zero();
        double batch_loss = 0.0;
        for (int k = 0; k < cfg.batch; ++k) {
            total.accumulate(grads[static_cast<std::size_t>(k)]);
            batch_loss += losses[static_cast<std::size_t>(k)];
        }
        total.scale(1.0 / cfg.batch);
        batch_loss /= cfg.batch;
        if (!std::isfinite(batch_loss))
            throw NumericalError("train: loss diverged (non-finite) at step " +
                                 std::to_string(step));

        const double norm = detail::grad_norm(total);
        if (norm > cfg.grad_clip) total.scale(cfg.grad_clip / norm);
        opt.update(params, total);

        window_sum += batch_loss;
        ++window_count;
        if ((step + 1) % cfg.log_every == 0 || step + 1 == cfg.steps) {
            last_window_avg = window_sum / window_count;
            if (csv.is_open()) csv << (step + 1) << "," << last_window_avg << "\n";
            window_sum = 0.0;
            window_count = 0;
        }
    }

    snap_params_to_f32(params);
    ckpt.meta.steps = resume ? resume->meta.steps + static_cast<std::uint64_t>(cfg.steps)
                             : static_cast<std::uint64_t>(cfg.steps);
    ckpt.meta.seed = cfg.seed;
    ckpt.meta.final_loss = last_window_avg;
    ckpt.meta.p_uncond = cfg.p_uncond;
    ckpt.meta.lambda_e = cfg.lambda_e;
    return ckpt;
}

}  // namespace gdce
