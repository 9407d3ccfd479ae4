#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>

#include "gdce/graph.hpp"

namespace gdce {

inline constexpr int kMaxExactNodes = 8;  // bound for n!-flavored exact searches

// Relabeling-invariant key: the lexicographically minimal upper-triangle
// adjacency bitstring (column order, matching graph6) over all orderings.
// Equal keys <=> isomorphic graphs.
struct CanonicalForm {
    std::uint8_t n = 0;
    std::uint64_t bits = 0;

    auto operator<=>(const CanonicalForm&) const = default;
};

namespace detail {

struct CanonSearch {
    const SimpleGraph* g;
    int n;
    int total_bits;
    std::uint64_t best;
    int order[kMaxExactNodes + 3];

    // Place vertices one at a time; after k+1 placements the first C(k+1,2)
    // key bits are fixed, so any partial key above the incumbent's prefix dies.
    void rec(int k, std::uint64_t used, std::uint64_t key, int keybits) {
        if (k == n) {
            if (key < best) best = key;
            return;
        }
        for (int v = 0; v < n; ++v) {
            if ((used >> v) & 1) continue;
            std::uint64_t bits = 0;
            for (int i = 0; i < k; ++i) bits = (bits << 1) | (g->has_edge(order[i], v) ? 1 : 0);
            const std::uint64_t cand = (key << k) | bits;
            const int cbits = keybits + k;
            if (cand > (best >> (total_bits - cbits))) continue;
            order[k] = v;
            rec(k + 1, used | (1ULL << v), cand, cbits);
        }
    }
};

}  // namespace detail

inline CanonicalForm canonical_form(const SimpleGraph& g, int max_nodes = kMaxExactNodes) {
    if (g.n > max_nodes)
        throw std::invalid_argument("canonical_form: n exceeds exact-search bound");
    if (g.n > 11) throw std::invalid_argument("canonical_form: key capacity is 64 bits (n <= 11)");
    if (g.n == 1) return {1, 0};
    detail::CanonSearch s;
    s.g = &g;
    s.n = g.n;
    s.total_bits = g.n * (g.n - 1) / 2;
    s.best = ~0ULL >> (64 - s.total_bits);
    s.rec(0, 0, 0, 0);
    return {static_cast<std::uint8_t>(g.n), s.best};
}

// Rebuild the canonical representative from its key.
inline SimpleGraph canonical_graph(const CanonicalForm& cf) {
    SimpleGraph g(cf.n);
    const int total = cf.n * (cf.n - 1) / 2;
    int bit = total - 1;  // bits were appended LSB-last in column order
    for (int j = 1; j < cf.n; ++j)
        for (int i = 0; i < j; ++i, --bit)
            if ((cf.bits >> bit) & 1) g.add_edge(i, j);
    return g;
}

struct CanonicalFormHash {
    std::size_t operator()(const CanonicalForm& c) const {
        return std::hash<std::uint64_t>()(c.bits * 0x9e3779b97f4a7c15ULL + c.n);
    }
};

}  // namespace gdce
