#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gdce/errors.hpp"

namespace gdce {

// Undirected simple graph on n <= 64 vertices, adjacency kept as bitmask rows.
struct SimpleGraph {
    int n = 0;
    std::vector<std::uint64_t> adj;

    SimpleGraph() = default;
    explicit SimpleGraph(int n_) : n(n_), adj(static_cast<std::size_t>(n_), 0) {
        if (n_ < 1 || n_ > 64) throw std::invalid_argument("SimpleGraph: n must be in [1,64]");
    }

    bool has_edge(int i, int j) const { return (adj[i] >> j) & 1ULL; }

    void add_edge(int i, int j) {
        if (i == j) throw std::invalid_argument("SimpleGraph: self-loop");
        adj[i] |= 1ULL << j;
        adj[j] |= 1ULL << i;
    }

    void remove_edge(int i, int j) {
        adj[i] &= ~(1ULL << j);
        adj[j] &= ~(1ULL << i);
    }

    int degree(int i) const { return std::popcount(adj[i]); }

    int edge_count() const {
        int twice = 0;
        for (auto row : adj) twice += std::popcount(row);
        return twice / 2;
    }

    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (has_edge(i, j)) out.emplace_back(i, j);
        return out;
    }

    bool operator==(const SimpleGraph& o) const = default;
};

inline bool is_connected(const SimpleGraph& g) {
    if (g.n == 1) return true;
    std::uint64_t seen = 1ULL;
    std::uint64_t frontier = 1ULL;
    const std::uint64_t all = (g.n == 64) ? ~0ULL : (1ULL << g.n) - 1;
    while (frontier) {
        std::uint64_t next = 0;
        std::uint64_t f = frontier;
        while (f) {
            int v = std::countr_zero(f);
            f &= f - 1;
            next |= g.adj[v];
        }
        frontier = next & ~seen;
        seen |= frontier;
        if (seen == all) return true;
    }
    return seen == all;
}

// Categorical graph: per-node category over a classes, per-pair edge category
// over b classes (0 = no edge), symmetric, no self-loops. Stored as category
// indices; the one-hot invariants hold by construction.
struct GraphInstance {
    int n = 0;
    int a = 1;
    int b = 2;
    std::vector<int> node_cat;        // n entries in [0, a)
    std::vector<int> edge_cat;        // n*n entries in [0, b), symmetric, diag 0
    int label = kNoLabel;

    static constexpr int kNoLabel = INT32_MIN;

    GraphInstance() = default;
    GraphInstance(int n_, int a_, int b_)
        : n(n_), a(a_), b(b_),
          node_cat(static_cast<std::size_t>(n_), 0),
          edge_cat(static_cast<std::size_t>(n_) * n_, 0) {
        if (n_ < 1) throw std::invalid_argument("GraphInstance: n must be >= 1");
        if (a_ < 1 || b_ < 2) throw std::invalid_argument("GraphInstance: need a >= 1, b >= 2");
    }

    int edge(int i, int j) const { return edge_cat[static_cast<std::size_t>(i) * n + j]; }

    void set_edge(int i, int j, int cat) {
        edge_cat[static_cast<std::size_t>(i) * n + j] = cat;
        edge_cat[static_cast<std::size_t>(j) * n + i] = cat;
    }

    bool operator==(const GraphInstance& o) const = default;
};

inline void validate(const GraphInstance& g) {
    if (g.n < 1 || g.a < 1 || g.b < 2) throw DataError("GraphInstance: bad dimensions");
    if (static_cast<int>(g.node_cat.size()) != g.n ||
        static_cast<int>(g.edge_cat.size()) != g.n * g.n)
        throw DataError("GraphInstance: shape mismatch");
    for (int c : g.node_cat)
        if (c < 0 || c >= g.a) throw DataError("GraphInstance: node category out of range");
    for (int i = 0; i < g.n; ++i) {
        if (g.edge(i, i) != 0) throw DataError("GraphInstance: nonzero diagonal");
        for (int j = 0; j < g.n; ++j) {
            int c = g.edge(i, j);
            if (c < 0 || c >= g.b) throw DataError("GraphInstance: edge category out of range");
            if (c != g.edge(j, i)) throw DataError("GraphInstance: asymmetric edge tensor");
        }
    }
}

inline GraphInstance to_dense(const SimpleGraph& g) {
    GraphInstance out(g.n, 1, 2);
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            if (g.has_edge(i, j)) out.set_edge(i, j, 1);
    out.label = g.edge_count();
    return out;
}

inline SimpleGraph from_dense(const GraphInstance& g) {
    if (g.a != 1 || g.b != 2)
        throw std::invalid_argument("from_dense: requires a=1, b=2");
    SimpleGraph out(g.n);
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            if (g.edge(i, j) == 1) out.add_edge(i, j);
    return out;
}

}  // namespace gdce
