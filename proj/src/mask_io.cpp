// SPDX-License-Identifier: MIT
#include "c2f/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>

namespace c2f {

namespace {

// Uniform integer in [0, bound) by rejection; the standard distributions are
// implementation-defined, mt19937_64 itself is not.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

// First `count` elements of a seeded Fisher-Yates shuffle of 0..n-1.
std::vector<Index> sample_without_replacement(Index n, Index count, std::uint64_t seed) {
    std::vector<Index> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), Index{0});
    std::mt19937_64 rng(seed);
    for (Index i = 0; i < count; ++i) {
        const auto j = i + static_cast<Index>(bounded(rng, static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(count));
    return pool;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

struct Reader {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (bytes.size() - pos < n) throw IoError("truncated mask file");
    }
    std::uint8_t u8() {
        need(1);
        return bytes[pos++];
    }
    std::uint64_t le(int width) {
        need(static_cast<std::size_t>(width));
        std::uint64_t v = 0;
        for (int b = 0; b < width; ++b) v |= static_cast<std::uint64_t>(bytes[pos++]) << (8 * b);
        return v;
    }
};

}  // namespace

MaskMode parse_mask_mode(const std::string& s) {
    if (s == "per-entry" || s == "per_entry" || s == "entry") return MaskMode::per_entry;
    if (s == "per-pixel" || s == "per_pixel" || s == "pixel") return MaskMode::per_pixel;
    throw std::invalid_argument("unknown mask mode '" + s + "'");
}

std::string to_string(MaskMode m) { return m == MaskMode::per_entry ? "per-entry" : "per-pixel"; }

ObservationMask generate_mask(const Shape& dims, double missing_ratio, std::uint64_t seed, MaskMode mode) {
    check_shape(dims);
    if (!(missing_ratio > 0.0 && missing_ratio < 1.0))
        throw std::invalid_argument("missing ratio must lie in (0, 1)");
    std::vector<std::uint8_t> flags(static_cast<std::size_t>(shape_size(dims)), 1);
    if (mode == MaskMode::per_entry) {
        const Index n = shape_size(dims);
        const auto missing = static_cast<Index>(std::floor(missing_ratio * static_cast<double>(n)));
        for (Index i : sample_without_replacement(n, missing, seed)) flags[static_cast<std::size_t>(i)] = 0;
    } else {
        if (dims.size() < 2) throw std::invalid_argument("per-pixel masks need at least two spatial modes");
        const Index sites = dims[0] * dims[1];
        const Index channels = shape_size(dims) / sites;
        const auto missing = static_cast<Index>(std::floor(missing_ratio * static_cast<double>(sites)));
        for (Index s : sample_without_replacement(sites, missing, seed))
            for (Index c = 0; c < channels; ++c) flags[static_cast<std::size_t>(s + c * sites)] = 0;
    }
    return ObservationMask(dims, std::move(flags));
}

std::vector<std::uint8_t> encode_mask(const MaskFile& file) {
    const auto& dims = file.mask.dims();
    if (dims.size() > 255) throw std::invalid_argument("mask order too large for the file format");
    std::vector<std::uint8_t> out = {'C', '2', 'F', 'M', kMaskFileVersion,
                                     static_cast<std::uint8_t>(file.mode == MaskMode::per_entry ? 0 : 1),
                                     static_cast<std::uint8_t>(dims.size())};
    for (Index d : dims) put_u32(out, static_cast<std::uint32_t>(d));
    put_u64(out, file.seed);
    put_u64(out, std::bit_cast<std::uint64_t>(file.missing_ratio));
    const auto flags = file.mask.flags();
    std::vector<std::uint8_t> packed((flags.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < flags.size(); ++i)
        if (flags[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    out.insert(out.end(), packed.begin(), packed.end());
    return out;
}

MaskFile decode_mask(const std::vector<std::uint8_t>& bytes) {
    Reader r{bytes};
    r.need(4);
    if (std::memcmp(bytes.data(), "C2FM", 4) != 0) throw IoError("not a mask file (bad magic)");
    r.pos = 4;
    if (const auto version = r.u8(); version != kMaskFileVersion)
        throw IoError("unsupported mask file version " + std::to_string(version));
    const auto mode_byte = r.u8();
    if (mode_byte > 1) throw IoError("bad mask mode byte");
    const auto order = r.u8();
    if (order == 0) throw IoError("mask file has no dimensions");
    Shape dims;
    for (int k = 0; k < order; ++k) dims.push_back(static_cast<Index>(r.le(4)));
    for (Index d : dims)
        if (d <= 0) throw IoError("mask file has a zero dimension");
    MaskFile out{ObservationMask(dims, false), 0, 0, mode_byte == 0 ? MaskMode::per_entry : MaskMode::per_pixel};
    out.seed = r.le(8);
    out.missing_ratio = std::bit_cast<double>(r.le(8));
    const auto n = static_cast<std::size_t>(shape_size(dims));
    r.need((n + 7) / 8);
    std::vector<std::uint8_t> flags(n);
    for (std::size_t i = 0; i < n; ++i) flags[i] = (bytes[r.pos + i / 8] >> (i % 8)) & 1u;
    r.pos += (n + 7) / 8;
    if (r.pos != bytes.size()) throw IoError("trailing bytes after mask data");
    out.mask = ObservationMask(std::move(dims), std::move(flags));
    return out;
}

void write_mask(const MaskFile& file, const std::filesystem::path& path) { write_bytes_atomic(path, encode_mask(file)); }

MaskFile read_mask(const std::filesystem::path& path) { return decode_mask(read_bytes(path)); }

}  // namespace c2f
