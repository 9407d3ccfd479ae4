#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace gdce {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent, reproducible stream keyed by a tuple of words.
// Used to give every sample its own generator so parallel order never matters.
inline Rng make_stream(std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = 0x8f1bbcdcbfa53e0bULL;
    for (std::uint64_t w : words) h = splitmix64(h ^ splitmix64(w));
    return Rng(h);
}

inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Draw an index from an (unnormalized is fine) nonnegative weight vector.
inline int sample_categorical(Rng& rng, std::span<const double> w) {
    double total = 0.0;
    for (double x : w) total += x;
    double u = uniform01(rng) * total;
    double acc = 0.0;
    for (int k = 0; k < static_cast<int>(w.size()); ++k) {
        acc += w[k];
        if (u < acc) return k;
    }
    return static_cast<int>(w.size()) - 1;
}

inline int uniform_int(Rng& rng, int lo, int hi) {  // inclusive bounds
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    auto k = static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(span));
    if (k >= span) k = span - 1;
    return lo + static_cast<int>(k);
}

}  // namespace gdce
