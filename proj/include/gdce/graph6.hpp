#pragma once

#include <string>
#include <string_view>

#include "gdce/errors.hpp"
#include "gdce/graph.hpp"

namespace gdce {

// graph6 text format: one printable line per graph. First byte is n+63
// (n <= 62 supported here), followed by the upper-triangle adjacency bits in
// column order, packed big-endian into 6-bit chunks, each chunk offset by 63.

inline std::string graph6_encode(const SimpleGraph& g) {
    if (g.n > 62) throw DataError("graph6_encode: n > 62 not supported");
    std::string out;
    out.push_back(static_cast<char>(g.n + 63));
    int chunk = 0, nbits = 0;
    for (int j = 1; j < g.n; ++j) {
        for (int i = 0; i < j; ++i) {
            chunk = (chunk << 1) | (g.has_edge(i, j) ? 1 : 0);
            if (++nbits == 6) {
                out.push_back(static_cast<char>(chunk + 63));
                chunk = 0;
                nbits = 0;
            }
        }
    }
    if (nbits > 0) out.push_back(static_cast<char>((chunk << (6 - nbits)) + 63));
    return out;
}

inline SimpleGraph graph6_decode(std::string_view s) {
    if (s.empty()) throw DataError("graph6: empty string");
    const int c0 = static_cast<unsigned char>(s[0]);
    if (c0 < 63 || c0 > 126) throw DataError("graph6: invalid byte at offset 0");
    if (c0 == 126) throw DataError("graph6: n > 62 not supported (offset 0)");
    const int n = c0 - 63;
    if (n < 1) throw DataError("graph6: n must be >= 1 (offset 0)");
    const int nbits = n * (n - 1) / 2;
    const int expect = 1 + (nbits + 5) / 6;
    if (static_cast<int>(s.size()) != expect)
        throw DataError("graph6: expected " + std::to_string(expect) + " bytes, got " +
                        std::to_string(s.size()));
    SimpleGraph g(n);
    int bit = 0;
    for (int j = 1; j < n; ++j) {
        for (int i = 0; i < j; ++i, ++bit) {
            const int byte_idx = 1 + bit / 6;
            const int c = static_cast<unsigned char>(s[byte_idx]);
            if (c < 63 || c > 126)
                throw DataError("graph6: invalid byte at offset " + std::to_string(byte_idx));
            if ((c - 63) >> (5 - bit % 6) & 1) g.add_edge(i, j);
        }
    }
    // trailing pad bits must be zero
    for (int pb = nbits; pb < 6 * ((nbits + 5) / 6); ++pb) {
        const int byte_idx = 1 + pb / 6;
        const int c = static_cast<unsigned char>(s[byte_idx]);
        if ((c - 63) >> (5 - pb % 6) & 1)
            throw DataError("graph6: nonzero padding at offset " + std::to_string(byte_idx));
    }
    return g;
}

}  // namespace gdce
