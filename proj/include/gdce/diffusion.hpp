#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "gdce/errors.hpp"
#include "gdce/graph.hpp"
#include "gdce/rng.hpp"
#include "gdce/schedule.hpp"

namespace gdce {

enum class Slot { node, edge };

// Per-node / per-edge clean-graph category distributions, as predicted by the
// denoiser. Edge rows are kept for unordered pairs (i<j); the full tensor is
// symmetric by construction and the diagonal is a point mass on category 0.
struct DenoiserOutput {
    int n = 0;
    int a = 1;
    int b = 2;
    std::vector<double> px;   // n x a, row-major
    std::vector<double> pe;   // P x b, row-major over pairs (i<j) in lexicographic order

    static int pair_index(int i, int j, int n) {
        if (i > j) std::swap(i, j);
        return i * n - i * (i + 1) / 2 + (j - i - 1);
    }
    std::span<const double> node_row(int i) const {
        return {px.data() + static_cast<std::size_t>(i) * a, static_cast<std::size_t>(a)};
    }
    std::span<const double> edge_row(int i, int j) const {
        return {pe.data() + static_cast<std::size_t>(pair_index(i, j, n)) * b,
                static_cast<std::size_t>(b)};
    }
};

// Marginal-noise transition family: Q^t = alpha^t I + (1 - alpha^t) 1 m^T,
// sharing one schedule between nodes and edges but with separate marginals.
struct TransitionModel {
    std::vector<double> m_x;
    std::vector<double> m_e;
    NoiseSchedule schedule;

    TransitionModel() = default;

    bool operator==(const TransitionModel&) const = default;

    TransitionModel(std::vector<double> mx, std::vector<double> me, NoiseSchedule sched)
        : m_x(floor_and_normalize(std::move(mx))),
          m_e(floor_and_normalize(std::move(me))),
          schedule(std::move(sched)) {}

    int a() const { return static_cast<int>(m_x.size()); }
    int b() const { return static_cast<int>(m_e.size()); }
    int T() const { return schedule.T; }
    const std::vector<double>& marginal(Slot which) const {
        return which == Slot::node ? m_x : m_e;
    }

    // strictly positive marginals keep the posterior well defined
    static std::vector<double> floor_and_normalize(std::vector<double> m) {
        if (m.empty()) throw std::invalid_argument("TransitionModel: empty marginal");
        double total = 0.0;
        for (double& v : m) {
            if (v < 0.0) throw std::invalid_argument("TransitionModel: negative marginal");
            v = std::max(v, 1e-6);
            total += v;
        }
        for (double& v : m) v /= total;
        return m;
    }
};

namespace detail {

inline std::vector<double> marginal_form_matrix(const std::vector<double>& m, double alpha) {
    const auto k = m.size();
    std::vector<double> q(k * k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            q[i * k + j] = (1.0 - alpha) * m[j] + (i == j ? alpha : 0.0);
    return q;
}

}  // namespace detail

/// Row-stochastic single-step matrix Q^t, with [Q^t]_{ij} the probability of
/// category i at step t-1 becoming j at step t.
inline std::vector<double> transition_matrix(const TransitionModel& tm, int t, Slot which) {
    if (t < 1 || t > tm.T()) throw std::invalid_argument("transition_matrix: t out of range");
    return detail::marginal_form_matrix(tm.marginal(which), tm.schedule.alpha[t]);
}

/// Cumulative matrix Qbar^t = Q^1 ... Q^t; for the marginal family this is the
/// same form with alpha replaced by alpha_bar. t = 0 gives the identity.
inline std::vector<double> cumulative_transition(const TransitionModel& tm, int t, Slot which) {
    if (t < 0 || t > tm.T()) throw std::invalid_argument("cumulative_transition: t out of range");
    return detail::marginal_form_matrix(tm.marginal(which), tm.schedule.alpha_bar[t]);
}

/// Sample a noisy graph G_t: every node category and every upper-triangle edge
/// category is drawn from its row of Qbar^t, then mirrored. t = 0 copies G.
inline GraphInstance forward_sample(const TransitionModel& tm, const GraphInstance& g, int t,
                                    Rng& rng) {
    if (t < 0 || t > tm.T()) throw std::invalid_argument("forward_sample: t out of range");
    if (g.a != tm.a() || g.b != tm.b())
        throw std::invalid_argument("forward_sample: category count mismatch");
    GraphInstance out = g;
    if (t == 0) return out;
    const double ab = tm.schedule.alpha_bar[t];

    std::vector<double> row(static_cast<std::size_t>(std::max(tm.a(), tm.b())));
    auto sample_slot = [&](const std::vector<double>& m, int cur) {
        const int k = static_cast<int>(m.size());
        for (int c = 0; c < k; ++c) row[c] = (1.0 - ab) * m[c] + (c == cur ? ab : 0.0);
        return sample_categorical(rng, {row.data(), static_cast<std::size_t>(k)});
    };

    for (int i = 0; i < g.n; ++i) out.node_cat[i] = sample_slot(tm.m_x, g.node_cat[i]);
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j) out.set_edge(i, j, sample_slot(tm.m_e, g.edge(i, j)));
    return out;
}

/// Exact Bayes posterior q(x^{t-1} = k | x^t, x^0) on the forward chain:
/// proportional to Q^t[k, x_t] * Qbar^{t-1}[x_0, k].
inline std::vector<double> posterior(const TransitionModel& tm, int x_t, int x_0, int t,
                                     Slot which) {
    if (t < 1 || t > tm.T()) throw std::invalid_argument("posterior: t out of range");
    const auto& m = tm.marginal(which);
    const int k = static_cast<int>(m.size());
    if (x_t < 0 || x_t >= k || x_0 < 0 || x_0 >= k)
        throw std::invalid_argument("posterior: category out of range");
    const double alpha = tm.schedule.alpha[t];
    const double ab_prev = tm.schedule.alpha_bar[t - 1];
    std::vector<double> p(static_cast<std::size_t>(k));
    double total = 0.0;
    for (int c = 0; c < k; ++c) {
        const double step = (1.0 - alpha) * m[x_t] + (c == x_t ? alpha : 0.0);
        const double prior = (1.0 - ab_prev) * m[c] + (c == x_0 ? ab_prev : 0.0);
        p[c] = step * prior;
        total += p[c];
    }
    for (double& v : p) v /= total;
    return p;
}

namespace detail {

// posterior rows for all (x_t, x_0) pairs of one slot kind, contiguous k*k*k
inline std::vector<double> posterior_table(const TransitionModel& tm, int t, Slot which) {
    const int k = which == Slot::node ? tm.a() : tm.b();
    std::vector<double> table(static_cast<std::size_t>(k) * k * k);
    for (int xt = 0; xt < k; ++xt)
        for (int x0 = 0; x0 < k; ++x0) {
            auto p = posterior(tm, xt, x0, t, which);
            std::copy(p.begin(), p.end(),
                      table.begin() + (static_cast<std::size_t>(xt) * k + x0) * k);
        }
    return table;
}

inline void check_simplex_rows(const std::vector<double>& rows, int k, const char* what) {
    for (std::size_t off = 0; off < rows.size(); off += k) {
        double total = 0.0;
        for (int c = 0; c < k; ++c) total += rows[off + c];
        if (std::abs(total - 1.0) > 1e-6)
            throw std::invalid_argument(std::string(what) + ": row not on the simplex");
    }
}

}  // namespace detail

// Per-node and per-pair reverse-step distributions over categories.
struct ReverseStepDistributions {
    int n = 0;
    int a = 1;
    int b = 2;
    std::vector<double> nodes;  // n x a
    std::vector<double> edges;  // P x b, pairs (i<j) lexicographic
};

/// p(x^{t-1} | G_t) = sum_x q(x^{t-1} | x^t, x^0 = x) * pred(x^0 = x), applied
/// independently per node and per upper-triangle edge.
inline ReverseStepDistributions reverse_step_distribution(const TransitionModel& tm,
                                                          const GraphInstance& g_t,
                                                          const DenoiserOutput& pred, int t) {
    if (t < 1 || t > tm.T())
        throw std::invalid_argument("reverse_step_distribution: t out of range");
    if (pred.n != g_t.n || pred.a != g_t.a || pred.b != g_t.b)
        throw std::invalid_argument("reverse_step_distribution: shape mismatch");
    detail::check_simplex_rows(pred.px, pred.a, "reverse_step_distribution: pred node");
    detail::check_simplex_rows(pred.pe, pred.b, "reverse_step_distribution: pred edge");

    const int n = g_t.n, a = g_t.a, b = g_t.b;
    ReverseStepDistributions out;
    out.n = n;
    out.a = a;
    out.b = b;
    out.nodes.assign(static_cast<std::size_t>(n) * a, 0.0);
    out.edges.assign(static_cast<std::size_t>(n) * (n - 1) / 2 * b, 0.0);

    const auto node_tab = detail::posterior_table(tm, t, Slot::node);
    const auto edge_tab = detail::posterior_table(tm, t, Slot::edge);

    auto mix = [](const std::vector<double>& tab, int k, int xt, std::span<const double> pred_row,
                  double* dst) {
        for (int x0 = 0; x0 < k; ++x0) {
            const double w = pred_row[x0];
            const double* post = tab.data() + (static_cast<std::size_t>(xt) * k + x0) * k;
            for (int c = 0; c < k; ++c) dst[c] += w * post[c];
        }
        double total = 0.0;
        for (int c = 0; c < k; ++c) total += dst[c];
        for (int c = 0; c < k; ++c) dst[c] /= total;
    };

    for (int i = 0; i < n; ++i)
        mix(node_tab, a, g_t.node_cat[i], pred.node_row(i),
            out.nodes.data() + static_cast<std::size_t>(i) * a);
    for (int i = 0, p = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++p)
            mix(edge_tab, b, g_t.edge(i, j), pred.edge_row(i, j),
                out.edges.data() + static_cast<std::size_t>(p) * b);
    return out;
}

/// Draw G_{t-1}: independent categorical draws per node and per upper-triangle
/// edge from the reverse-step distributions, mirrored to keep symmetry.
inline GraphInstance sample_step(const TransitionModel& tm, const GraphInstance& g_t,
                                 const DenoiserOutput& pred, int t, Rng& rng) {
    const auto dist = reverse_step_distribution(tm, g_t, pred, t);
    GraphInstance out(g_t.n, g_t.a, g_t.b);
    out.label = g_t.label;
    for (int i = 0; i < g_t.n; ++i)
        out.node_cat[i] = sample_categorical(
            rng, {dist.nodes.data() + static_cast<std::size_t>(i) * g_t.a,
                  static_cast<std::size_t>(g_t.a)});
    for (int i = 0, p = 0; i < g_t.n; ++i)
        for (int j = i + 1; j < g_t.n; ++j, ++p)
            out.set_edge(i, j,
                         sample_categorical(
                             rng, {dist.edges.data() + static_cast<std::size_t>(p) * g_t.b,
                                   static_cast<std::size_t>(g_t.b)}));
    return out;
}

}  // namespace gdce
