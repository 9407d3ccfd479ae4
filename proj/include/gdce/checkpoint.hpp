#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "gdce/denoiser.hpp"
#include "gdce/errors.hpp"

namespace gdce {

// Versioned binary container. Parameter arrays are shape-prefixed little-endian
// 32-bit reals; scalar metadata (marginals, loss) is stored as 64-bit reals so
// reloaded transition rows still sum to 1 at full precision. The whole payload
// is covered by an FNV-1a checksum.

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[8] = {'G', 'D', 'C', 'E', 'C', 'K', 'P', '1'};

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "checkpoint codec assumes a little-endian host");

struct ByteWriter {
    std::string buf;

    template <typename T>
    void raw(const T& v) {
        buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void u32(std::uint32_t v) { raw(v); }
    void u64(std::uint64_t v) { raw(v); }
    void f32(float v) { raw(v); }
    void f64(double v) { raw(v); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf.append(s);
    }
};

struct ByteReader {
    const std::string& buf;
    std::size_t pos = 0;

    template <typename T>
    T raw() {
        if (pos + sizeof(T) > buf.size()) throw DataError("checkpoint: truncated file");
        T v;
        std::memcpy(&v, buf.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }
    std::uint32_t u32() { return raw<std::uint32_t>(); }
    std::uint64_t u64() { return raw<std::uint64_t>(); }
    float f32() { return raw<float>(); }
    double f64() { return raw<double>(); }
    std::string str() {
        const auto len = u32();
        if (pos + len > buf.size()) throw DataError("checkpoint: truncated string");
        std::string s = buf.substr(pos, len);
        pos += len;
        return s;
    }
};

inline std::uint64_t fnv1a(const char* data, std::size_t len) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

inline void save_checkpoint(const ModelCheckpoint& ckpt, const std::string& path) {
    detail::ByteWriter w;
    w.buf.append(kCheckpointMagic, sizeof kCheckpointMagic);
    w.u32(kCheckpointVersion);

    const auto& cfg = ckpt.params.cfg;
    w.u32(static_cast<std::uint32_t>(cfg.a));
    w.u32(static_cast<std::uint32_t>(cfg.b));
    w.u32(static_cast<std::uint32_t>(cfg.hidden));
    w.u32(static_cast<std::uint32_t>(cfg.layers));
    w.u32(static_cast<std::uint32_t>(cfg.T));
    w.u32(cfg.struct_feats ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(cfg.vocab.size()));
    for (int v : cfg.vocab) w.raw(static_cast<std::int32_t>(v));

    w.u32(static_cast<std::uint32_t>(ckpt.tm.m_x.size()));
    for (double v : ckpt.tm.m_x) w.f64(v);
    w.u32(static_cast<std::uint32_t>(ckpt.tm.m_e.size()));
    for (double v : ckpt.tm.m_e) w.f64(v);

    w.u64(ckpt.meta.steps);
    w.u64(ckpt.meta.seed);
    w.f64(ckpt.meta.final_loss);
    w.f64(ckpt.meta.p_uncond);
    w.f64(ckpt.meta.lambda_e);

    const auto entries = ckpt.params.entries();
    w.u32(static_cast<std::uint32_t>(entries.size()));
    for (const auto& [name, m] : entries) {
        w.str(name);
        w.u32(2);
        w.u32(static_cast<std::uint32_t>(m->rows));
        w.u32(static_cast<std::uint32_t>(m->cols));
        for (double v : m->a) w.f32(static_cast<float>(v));
    }

    w.u64(detail::fnv1a(w.buf.data(), w.buf.size()));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_checkpoint: cannot open " + path);
    out.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
    if (!out) throw DataError("save_checkpoint: write failed for " + path);
}

inline ModelCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_checkpoint: cannot open " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < sizeof kCheckpointMagic + 12) throw DataError("checkpoint: truncated file");
    if (std::memcmp(buf.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0)
        throw DataError("checkpoint: bad magic (not a checkpoint file?)");

    std::uint64_t stored_sum;
    std::memcpy(&stored_sum, buf.data() + buf.size() - 8, 8);
    if (detail::fnv1a(buf.data(), buf.size() - 8) != stored_sum)
        throw DataError("checkpoint: checksum mismatch (file corrupted)");

    detail::ByteReader r{buf, sizeof kCheckpointMagic};
    const auto version = r.u32();
    if (version != kCheckpointVersion)
        throw DataError("checkpoint: unsupported version " + std::to_string(version));

    DenoiserConfig cfg;
    cfg.a = static_cast<int>(r.u32());
    cfg.b = static_cast<int>(r.u32());
    cfg.hidden = static_cast<int>(r.u32());
    cfg.layers = static_cast<int>(r.u32());
    cfg.T = static_cast<int>(r.u32());
    cfg.struct_feats = r.u32() != 0;
    cfg.vocab.resize(r.u32());
    for (auto& v : cfg.vocab) v = static_cast<int>(r.raw<std::int32_t>());

    std::vector<double> mx(r.u32());
    for (auto& v : mx) v = r.f64();
    std::vector<double> me(r.u32());
    for (auto& v : me) v = r.f64();

    ModelCheckpoint ckpt;
    ckpt.meta.steps = r.u64();
    ckpt.meta.seed = r.u64();
    ckpt.meta.final_loss = r.f64();
    ckpt.meta.p_uncond = r.f64();
    ckpt.meta.lambda_e = r.f64();

    ckpt.params = make_params(cfg);
    // assign marginals verbatim: the stored values are already floored and
    // normalized, and renormalizing is not a bitwise no-op
    auto check_simplex = [&](const std::vector<double>& m) {
        double total = 0.0;
        for (double v : m) {
            if (!(v > 0.0)) throw DataError("checkpoint: non-positive marginal entry");
            total += v;
        }
        if (std::abs(total - 1.0) > 1e-9) throw DataError("checkpoint: marginal not normalized");
    };
    check_simplex(mx);
    check_simplex(me);
    ckpt.tm.m_x = std::move(mx);
    ckpt.tm.m_e = std::move(me);
    ckpt.tm.schedule = build_schedule(cfg.T);

    auto entries = ckpt.params.entries();
    if (r.u32() != entries.size()) throw DataError("checkpoint: parameter array count mismatch");
    for (auto& [name, m] : entries) {
        if (r.str() != name) throw DataError("checkpoint: parameter order mismatch at " + name);
        if (r.u32() != 2) throw DataError("checkpoint: bad rank for " + name);
        const auto rows = static_cast<int>(r.u32());
        const auto cols = static_cast<int>(r.u32());
        if (rows != m->rows || cols != m->cols)
            throw DataError("checkpoint: shape mismatch for " + name);
        for (double& v : m->a) v = static_cast<double>(r.f32());
    }
    return ckpt;
}

/// Rejects a checkpoint whose categorical shape or vocabulary cannot serve a
/// dataset. Used by generation and evaluation entry points.
inline void check_compatible(const ModelCheckpoint& ckpt, const LabeledDataset& ds) {
    const auto& cfg = ckpt.params.cfg;
    if (cfg.a != ds.a || cfg.b != ds.b)
        throw DataError("checkpoint is for a=" + std::to_string(cfg.a) + ", b=" +
                        std::to_string(cfg.b) + " graphs but the dataset has a=" +
                        std::to_string(ds.a) + ", b=" + std::to_string(ds.b));
}

}  // namespace gdce
