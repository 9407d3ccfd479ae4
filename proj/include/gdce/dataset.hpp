#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gdce/canonical.hpp"
#include "gdce/errors.hpp"
#include "gdce/graph.hpp"
#include "gdce/graph6.hpp"
#include "gdce/planarity.hpp"
#include "gdce/rng.hpp"
#include "gdce/version.hpp"

namespace gdce {

// Benchmark corpus: isomorphism-class representatives, stored in canonical
// labeling and sorted by canonical key, labeled by edge count.
struct LabeledDataset {
    int n = 0;
    int a = 1;
    int b = 2;
    std::vector<SimpleGraph> graphs;
    std::vector<int> labels;
    std::vector<double> marginal_x;  // empirical node-category distribution
    std::vector<double> marginal_e;  // empirical edge-category distribution
    std::string method;              // enumeration method identifiers

    std::size_t size() const { return graphs.size(); }
};

namespace detail {

inline void finalize_dataset(LabeledDataset& ds, std::set<CanonicalForm>&& keys) {
    for (const auto& key : keys) {
        SimpleGraph g = canonical_graph(key);
        ds.graphs.push_back(g);
        ds.labels.push_back(g.edge_count());
    }
    ds.marginal_x.assign(1, 1.0);
    const double pair_slots =
        static_cast<double>(ds.graphs.size()) * (ds.n * (ds.n - 1) / 2);
    double edge_slots = 0;
    for (int lab : ds.labels) edge_slots += lab;
    const double p = ds.n >= 2 && !ds.graphs.empty() ? edge_slots / pair_slots : 0.0;
    ds.marginal_e = {1.0 - p, p};
}

}  // namespace detail

/// All non-isomorphic connected planar graphs on n nodes, built by vertex
/// augmentation: grow every planar representative by one vertex attached in
/// all possible ways, dedupe by canonical form, keep the connected ones.
inline LabeledDataset enumerate_connected_planar(int n) {
    if (n < 1 || n > kMaxExactNodes)
        throw std::invalid_argument("enumerate_connected_planar: n must be in [1,8]");

    std::set<CanonicalForm> level = {canonical_form(SimpleGraph(1))};
    for (int m = 2; m <= n; ++m) {
        std::set<CanonicalForm> next;
        for (const auto& key : level) {
            const SimpleGraph base = canonical_graph(key);
            for (std::uint32_t mask = 0; mask < (1u << (m - 1)); ++mask) {
                SimpleGraph g(m);
                for (int i = 0; i < m - 1; ++i) {
                    g.adj[i] = base.adj[i];
                    if ((mask >> i) & 1) g.add_edge(i, m - 1);
                }
                if (!is_planar(g)) continue;
                next.insert(canonical_form(g));
            }
        }
        level = std::move(next);
    }

    std::set<CanonicalForm> keep;
    for (const auto& key : level)
        if (is_connected(canonical_graph(key))) keep.insert(key);

    LabeledDataset ds;
    ds.n = n;
    ds.method = "vertex_augmentation";
    detail::finalize_dataset(ds, std::move(keep));
    return ds;
}

/// Independent enumeration of the same set: all labeled trees via Prufer
/// sequences, then exhaustive one-edge augmentation level by level, pruning
/// non-planar candidates and deduping by canonical form.
inline LabeledDataset enumerate_connected_planar_edge_augmentation(int n) {
    if (n < 1 || n > kMaxExactNodes)
        throw std::invalid_argument("enumerate_connected_planar: n must be in [1,8]");

    std::set<CanonicalForm> all;
    std::set<CanonicalForm> level;
    if (n == 1) {
        level.insert(canonical_form(SimpleGraph(1)));
    } else if (n == 2) {
        SimpleGraph k2(2);
        k2.add_edge(0, 1);
        level.insert(canonical_form(k2));
    } else {
        // Prufer decode covers every labeled tree exactly once
        std::vector<int> seq(static_cast<std::size_t>(n - 2), 0);
        const std::uint64_t total = [&] {
            std::uint64_t t = 1;
            for (int i = 0; i < n - 2; ++i) t *= static_cast<std::uint64_t>(n);
            return t;
        }();
        for (std::uint64_t code = 0; code < total; ++code) {
            std::uint64_t c = code;
            for (int i = 0; i < n - 2; ++i) {
                seq[i] = static_cast<int>(c % n);
                c /= n;
            }
            std::vector<int> deg(static_cast<std::size_t>(n), 1);
            for (int v : seq) deg[v]++;
            SimpleGraph tree(n);
            std::uint64_t leaves = 0;
            for (int v = 0; v < n; ++v)
                if (deg[v] == 1) leaves |= 1ULL << v;
            for (int v : seq) {
                const int leaf = std::countr_zero(leaves);
                leaves &= leaves - 1;
                tree.add_edge(leaf, v);
                if (--deg[v] == 1) leaves |= 1ULL << v;
            }
            tree.add_edge(std::countr_zero(leaves), n - 1);
            level.insert(canonical_form(tree));
        }
    }

    while (!level.empty()) {
        all.insert(level.begin(), level.end());
        std::set<CanonicalForm> next;
        for (const auto& key : level) {
            const SimpleGraph base = canonical_graph(key);
            for (int i = 0; i < n; ++i) {
                for (int j = i + 1; j < n; ++j) {
                    if (base.has_edge(i, j)) continue;
                    SimpleGraph g = base;
                    g.add_edge(i, j);
                    if (!is_planar(g)) continue;
                    next.insert(canonical_form(g));
                }
            }
        }
        level = std::move(next);
    }

    LabeledDataset ds;
    ds.n = n;
    ds.method = "edge_augmentation";
    detail::finalize_dataset(ds, std::move(all));
    return ds;
}

/// Stratified, seed-reproducible split by edge-count label. Every label keeps
/// at least one member in train; singleton classes go to train entirely.
inline std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds,
                                                       double test_fraction,
                                                       std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("split: test_fraction must be in (0,1)");

    std::map<int, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < ds.size(); ++i) by_label[ds.labels[i]].push_back(i);

    std::vector<bool> in_test(ds.size(), false);
    for (auto& [label, idxs] : by_label) {
        if (idxs.size() < 2) continue;
        Rng rng = make_stream({seed, 0x5317u, static_cast<std::uint64_t>(label)});
        for (std::size_t i = idxs.size(); i > 1; --i)
            std::swap(idxs[i - 1], idxs[uniform_int(rng, 0, static_cast<int>(i) - 1)]);
        auto k = static_cast<std::size_t>(test_fraction * static_cast<double>(idxs.size()));
        k = std::min(k, idxs.size() - 1);
        for (std::size_t i = 0; i < k; ++i) in_test[idxs[i]] = true;
    }

    LabeledDataset train, test;
    for (auto* part : {&train, &test}) {
        part->n = ds.n;
        part->a = ds.a;
        part->b = ds.b;
        part->marginal_x = ds.marginal_x;
        part->marginal_e = ds.marginal_e;  // shared prior: computed on the full corpus
        part->method = ds.method;
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto& part = in_test[i] ? test : train;
        part.graphs.push_back(ds.graphs[i]);
        part.labels.push_back(ds.labels[i]);
    }
    return {train, test};
}

inline constexpr int kDatasetFormatVersion = 1;

/// Writes graph6 lines to `path` and a key=value sidecar to `path + ".meta"`.
inline void save(const LabeledDataset& ds, const std::string& path) {
    std::ofstream g6(path);
    if (!g6) throw DataError("save: cannot open " + path);
    for (const auto& g : ds.graphs) g6 << graph6_encode(g) << "\n";
    g6.close();

    std::ofstream meta(path + ".meta");
    if (!meta) throw DataError("save: cannot open " + path + ".meta");
    meta << "format_version=" << kDatasetFormatVersion << "\n";
    meta << "tool_version=" << kVersion << "\n";
    meta << "n=" << ds.n << "\na=" << ds.a << "\nb=" << ds.b << "\n";
    meta << "count=" << ds.size() << "\n";
    meta << "method=" << ds.method << "\n";
    auto join = [](const auto& xs, auto fmt) {
        std::ostringstream os;
        for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << fmt(xs[i]);
        return os.str();
    };
    meta << "labels=" << join(ds.labels, [](int v) { return std::to_string(v); }) << "\n";
    auto fmt_real = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    meta << "marginal_x=" << join(ds.marginal_x, fmt_real) << "\n";
    meta << "marginal_e=" << join(ds.marginal_e, fmt_real) << "\n";
}

inline LabeledDataset load(const std::string& path) {
    std::ifstream g6(path);
    if (!g6) throw DataError("load: cannot open " + path);
    LabeledDataset ds;
    std::string line;
    int lineno = 0;
    for (; std::getline(g6, line); ) {
        ++lineno;
        if (line.empty()) continue;
        try {
            ds.graphs.push_back(graph6_decode(line));
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }

    std::ifstream meta(path + ".meta");
    if (!meta) throw DataError("load: cannot open " + path + ".meta");
    std::map<std::string, std::string> kv;
    while (std::getline(meta, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError(path + ".meta: malformed line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto need = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw DataError(path + ".meta: missing key " + key);
        return it->second;
    };
    try {
        if (std::stoi(need("format_version")) != kDatasetFormatVersion)
            throw DataError(path + ".meta: unsupported format_version " + need("format_version"));
        ds.n = std::stoi(need("n"));
        ds.a = std::stoi(need("a"));
        ds.b = std::stoi(need("b"));
        ds.method = need("method");
        auto split_list = [](const std::string& s) {
            std::vector<std::string> out;
            std::istringstream is(s);
            std::string tok;
            while (std::getline(is, tok, ',')) out.push_back(tok);
            return out;
        };
        for (const auto& tok : split_list(need("labels"))) ds.labels.push_back(std::stoi(tok));
        for (const auto& tok : split_list(need("marginal_x")))
            ds.marginal_x.push_back(std::stod(tok));
        for (const auto& tok : split_list(need("marginal_e")))
            ds.marginal_e.push_back(std::stod(tok));
        if (std::stoul(need("count")) != ds.graphs.size())
            throw DataError(path + ": graph count mismatch with metadata");
    } catch (const DataError&) {
        throw;
    } catch (const std::exception& e) {
        throw DataError(path + ".meta: malformed value (" + e.what() + ")");
    }

    if (ds.labels.size() != ds.graphs.size())
        throw DataError(path + ": graph/label count mismatch with metadata");
    for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
        if (ds.graphs[i].n != ds.n)
            throw DataError(path + ":" + std::to_string(i + 1) + ": node count != metadata n");
        if (ds.graphs[i].edge_count() != ds.labels[i])
            throw DataError(path + ":" + std::to_string(i + 1) + ": label != edge count");
        if (!is_connected(ds.graphs[i]) || !is_planar(ds.graphs[i]))
            throw DataError(path + ":" + std::to_string(i + 1) +
                            ": graph is not connected planar");
    }
    return ds;
}

}  // namespace gdce
