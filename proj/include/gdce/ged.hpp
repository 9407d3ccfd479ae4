#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gdce/canonical.hpp"
#include "gdce/graph.hpp"

namespace gdce {

namespace detail {

struct GedSearch {
    const SimpleGraph* g1;
    const SimpleGraph* g2;
    int n;
    int e1_total, e2_total;
    std::vector<int> ord;  // g1 vertices, high degree first
    int best;
    int image[kMaxExactNodes + 3];
    int e1_inside, e2_inside;  // edges fully inside the placed prefix / its image

    void rec(int k, std::uint64_t used, int cost) {
        if (cost >= best) return;
        if (k == n) {
            best = cost;
            return;
        }
        // remaining mismatches are at least the remaining edge-count gap
        const int rem1 = e1_total - e1_inside;
        const int rem2 = e2_total - e2_inside;
        if (cost + std::abs(rem1 - rem2) >= best) return;

        const int u = ord[k];
        for (int q = 0; q < n; ++q) {
            if ((used >> q) & 1) continue;
            int add = 0, add1 = 0, add2 = 0;
            for (int i = 0; i < k; ++i) {
                const bool a = g1->has_edge(ord[i], u);
                const bool b = g2->has_edge(image[i], q);
                add += a != b;
                add1 += a;
                add2 += b;
            }
            image[k] = q;
            e1_inside += add1;
            e2_inside += add2;
            rec(k + 1, used | (1ULL << q), cost + add);
            e1_inside -= add1;
            e2_inside -= add2;
        }
    }
};

}  // namespace detail

/// Exact edge edit distance between same-order graphs: the minimum over all
/// node bijections of the symmetric difference of the edge sets, unit cost per
/// edge insertion or deletion. Branch and bound; n <= 8.
inline int ged(const SimpleGraph& g1, const SimpleGraph& g2, int max_nodes = kMaxExactNodes) {
    if (g1.n != g2.n) throw std::invalid_argument("ged: node counts differ");
    if (g1.n > max_nodes) throw std::invalid_argument("ged: n exceeds exact-search bound");
    const int n = g1.n;
    if (n == 1) return 0;

    detail::GedSearch s;
    s.g1 = &g1;
    s.g2 = &g2;
    s.n = n;
    s.e1_total = g1.edge_count();
    s.e2_total = g2.edge_count();
    s.ord.resize(n);
    std::iota(s.ord.begin(), s.ord.end(), 0);
    std::sort(s.ord.begin(), s.ord.end(),
              [&](int x, int y) { return g1.degree(x) > g1.degree(y); });

    // identity bijection seeds the incumbent
    int ident = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) ident += g1.has_edge(i, j) != g2.has_edge(i, j);
    s.best = ident;
    if (ident > 0) {
        s.e1_inside = s.e2_inside = 0;
        s.rec(0, 0, 0);
    }
    return s.best;
}

}  // namespace gdce
