#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "gdce/checkpoint.hpp"
#include "gdce/denoiser.hpp"
#include "gdce/diffusion.hpp"
#include "gdce/graph.hpp"
#include "gdce/rng.hpp"

namespace gdce {

struct GuidanceConfig {
    double s = 2.0;        // guidance scale
    int tau = 50;          // perturbation depth, in [0, T]
    int num_samples = 100; // counterfactuals per input
    std::uint64_t seed = 1;
};

/// Classifier-free guidance on one category distribution: log-space
/// extrapolation (1+s) log p_cond - s log p_uncond, renormalized.
inline std::vector<double> cfg_combine(std::span<const double> p_cond,
                                       std::span<const double> p_uncond, double s) {
    if (p_cond.size() != p_uncond.size())
        throw std::invalid_argument("cfg_combine: size mismatch");
    const auto k = p_cond.size();
    std::vector<double> logit(k);
    double mx = -1e300;
    for (std::size_t c = 0; c < k; ++c) {
        const double lc = std::log(std::max(p_cond[c], 1e-12));
        const double lu = std::log(std::max(p_uncond[c], 1e-12));
        logit[c] = (1.0 + s) * lc - s * lu;
        mx = std::max(mx, logit[c]);
    }
    double total = 0.0;
    for (double& v : logit) {
        v = std::exp(v - mx);
        total += v;
    }
    for (double& v : logit) v /= total;
    return logit;
}

/// Guided combination of a conditional/unconditional prediction pair, applied
/// per node row and per edge row.
inline DenoiserOutput cfg_combine_output(const DenoiserOutput& cond, const DenoiserOutput& uncond,
                                         double s) {
    if (cond.n != uncond.n || cond.a != uncond.a || cond.b != uncond.b)
        throw std::invalid_argument("cfg_combine_output: shape mismatch");
    DenoiserOutput out;
    out.n = cond.n;
    out.a = cond.a;
    out.b = cond.b;
    out.px.resize(cond.px.size());
    out.pe.resize(cond.pe.size());
    for (std::size_t off = 0; off < cond.px.size(); off += cond.a) {
        auto row = cfg_combine({cond.px.data() + off, static_cast<std::size_t>(cond.a)},
                               {uncond.px.data() + off, static_cast<std::size_t>(cond.a)}, s);
        std::copy(row.begin(), row.end(), out.px.begin() + off);
    }
    for (std::size_t off = 0; off < cond.pe.size(); off += cond.b) {
        auto row = cfg_combine({cond.pe.data() + off, static_cast<std::size_t>(cond.b)},
                               {uncond.pe.data() + off, static_cast<std::size_t>(cond.b)}, s);
        std::copy(row.begin(), row.end(), out.pe.begin() + off);
    }
    return out;
}

namespace detail {

// guided reverse chain from t = start down to 1, in place
inline void guided_reverse(const ModelCheckpoint& ckpt, GraphInstance& g, Condition y1, double s,
                           int start, Rng& rng) {
    for (int t = start; t >= 1; --t) {
        const DenoiserOutput cond = predict(ckpt.params, g, t, y1);
        const DenoiserOutput uncond = predict(ckpt.params, g, t, Condition::null());
        const DenoiserOutput guided = cfg_combine_output(cond, uncond, s);
        g = sample_step(ckpt.tm, g, guided, t, rng);
    }
}

}  // namespace detail

/// Counterfactual generation: forward-noise the input to depth tau, then run
/// the guided reverse chain down to 0 under the target condition. tau = 0
/// returns the input unchanged; the node count is preserved throughout.
inline GraphInstance generate_counterfactual(const ModelCheckpoint& ckpt, const GraphInstance& g,
                                             Condition y1, const GuidanceConfig& cfg, Rng& rng) {
    if (y1.is_null)
        throw std::invalid_argument("generate_counterfactual: target condition must not be null");
    ckpt.params.cfg.cond_index(y1);  // vocabulary check
    if (cfg.tau < 0 || cfg.tau > ckpt.tm.T())
        throw std::invalid_argument("generate_counterfactual: tau out of range");
    GraphInstance out = forward_sample(ckpt.tm, g, cfg.tau, rng);
    detail::guided_reverse(ckpt, out, y1, cfg.s, cfg.tau, rng);
    out.label = y1.value;
    return out;
}

/// Input-independent baseline: draw G_T from the marginal prior and run the
/// guided reverse chain from T. Returns num_samples graphs.
inline std::vector<GraphInstance> free_generate(const ModelCheckpoint& ckpt, int n, Condition y1,
                                                double s, int num_samples, Rng& rng) {
    if (y1.is_null) throw std::invalid_argument("free_generate: target condition must not be null");
    ckpt.params.cfg.cond_index(y1);
    std::vector<GraphInstance> out;
    out.reserve(static_cast<std::size_t>(num_samples));
    const auto& tm = ckpt.tm;
    for (int k = 0; k < num_samples; ++k) {
        GraphInstance g(n, tm.a(), tm.b());
        for (int i = 0; i < n; ++i)
            g.node_cat[i] = sample_categorical(rng, {tm.m_x.data(), tm.m_x.size()});
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                g.set_edge(i, j, sample_categorical(rng, {tm.m_e.data(), tm.m_e.size()}));
        detail::guided_reverse(ckpt, g, y1, s, tm.T(), rng);
        g.label = y1.value;
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace gdce
