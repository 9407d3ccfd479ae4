#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/boyer_myrvold_planar_test.hpp>

#include "gdce/graph.hpp"

namespace gdce {

/// Exact planarity test (Boyer-Myrvold edge addition).
inline bool is_planar(const SimpleGraph& g) {
    if (g.n <= 4) return true;
    const int m = g.edge_count();
    if (m > 3 * g.n - 6) return false;
    using BoostGraph =
        boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS,
                              boost::property<boost::vertex_index_t, int>>;
    BoostGraph bg(static_cast<std::size_t>(g.n));
    for (auto [i, j] : g.edges()) boost::add_edge(i, j, bg);
    return boost::boyer_myrvold_planarity_test(bg);
}

namespace detail {

// Branch sets for minor search: connected vertex subsets as bitmasks, plus the
// closed neighborhood of each subset for the "linked by an edge" test.
struct MinorSearchTables {
    std::vector<std::uint32_t> subsets;    // connected nonempty subsets
    std::vector<std::uint32_t> neighbors;  // union of adjacencies per subset
};

inline MinorSearchTables build_tables(const SimpleGraph& g) {
    MinorSearchTables t;
    const std::uint32_t full = (1u << g.n) - 1;
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        // connectivity of the induced subgraph via bitmask BFS
        std::uint32_t start = mask & (~mask + 1);
        std::uint32_t seen = start, frontier = start;
        while (frontier) {
            std::uint32_t next = 0, f = frontier;
            while (f) {
                int v = std::countr_zero(f);
                f &= f - 1;
                next |= static_cast<std::uint32_t>(g.adj[v]) & mask;
            }
            frontier = next & ~seen;
            seen |= frontier;
        }
        if (seen != mask) continue;
        std::uint32_t nb = 0, m = mask;
        while (m) {
            int v = std::countr_zero(m);
            m &= m - 1;
            nb |= static_cast<std::uint32_t>(g.adj[v]);
        }
        t.subsets.push_back(mask);
        t.neighbors.push_back(nb);
    }
    return t;
}

inline bool has_k5_minor(const MinorSearchTables& t) {
    const int ns = static_cast<int>(t.subsets.size());
    std::uint32_t chosen_nb[5];
    // DFS over ascending subset indices; every chosen pair must be linked.
    auto rec = [&](auto&& self, int depth, int from, std::uint32_t used) -> bool {
        if (depth == 5) return true;
        for (int s = from; s < ns; ++s) {
            const std::uint32_t mask = t.subsets[s];
            if (mask & used) continue;
            bool ok = true;
            for (int d = 0; d < depth; ++d)
                if (!(chosen_nb[d] & mask)) { ok = false; break; }
            if (!ok) continue;
            chosen_nb[depth] = t.neighbors[s];
            if (self(self, depth + 1, s + 1, used | mask)) return true;
        }
        return false;
    };
    return rec(rec, 0, 0, 0);
}

inline bool has_k33_minor(const MinorSearchTables& t) {
    const int ns = static_cast<int>(t.subsets.size());
    std::uint32_t a_nb[3];
    // pick the A side (ascending), then the B side from disjoint subsets that
    // see all three A branch sets
    auto rec_b = [&](auto&& self, int depth, int from, std::uint32_t used) -> bool {
        if (depth == 3) return true;
        for (int s = from; s < ns; ++s) {
            const std::uint32_t mask = t.subsets[s];
            if (mask & used) continue;
            if (!(a_nb[0] & mask) || !(a_nb[1] & mask) || !(a_nb[2] & mask)) continue;
            if (self(self, depth + 1, s + 1, used | mask)) return true;
        }
        return false;
    };
    auto rec_a = [&](auto&& self, int depth, int from, std::uint32_t used) -> bool {
        if (depth == 3) return rec_b(rec_b, 0, 0, used);
        for (int s = from; s < ns; ++s) {
            const std::uint32_t mask = t.subsets[s];
            if (mask & used) continue;
            a_nb[depth] = t.neighbors[s];
            if (self(self, depth + 1, s + 1, used | mask)) return true;
        }
        return false;
    };
    return rec_a(rec_a, 0, 0, 0);
}

}  // namespace detail

/// Planarity by exhaustive K5 / K3,3 minor search. Exponential; n <= 8 only.
/// Cross-validation oracle for is_planar.
inline bool is_planar_oracle(const SimpleGraph& g) {
    if (g.n > 8) throw std::invalid_argument("is_planar_oracle: n > 8");
    if (g.n <= 4) return true;
    auto tables = detail::build_tables(g);
    if (detail::has_k5_minor(tables)) return false;
    if (g.n >= 6 && detail::has_k33_minor(tables)) return false;
    return true;
}

}  // namespace gdce
