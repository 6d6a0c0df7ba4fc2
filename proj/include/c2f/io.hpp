// SPDX-License-Identifier: MIT
#pragma once

#include "c2f/observation_mask.hpp"
#include "c2f/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace c2f {

/// Raised for unreadable, undecodable or unwritable files.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Loads an 8-bit RGB PNG or binary PPM (P6) as an H x W x 3 tensor with
/// entries v / 255; element (row, col, channel).
Tensor load_image(const std::filesystem::path& path);
Tensor decode_ppm(const std::vector<std::uint8_t>& bytes);

/// Writes an H x W x 3 tensor, clamped to [0, 1] and rounded to 8 bits. The
/// format follows the extension (.png, otherwise PPM).
void save_image(const Tensor& image, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_ppm(const Tensor& image);
std::uint8_t quantize_pixel(double v);

enum class MaskMode { per_entry, per_pixel };

MaskMode parse_mask_mode(const std::string& s);
std::string to_string(MaskMode m);

/// Seeded random mask with floor(ratio * N) missing entries (per_entry) or
/// floor(ratio * H * W) missing spatial sites with every channel dropped
/// together (per_pixel). Identical across platforms for a given seed.
ObservationMask generate_mask(const Shape& dims, double missing_ratio, std::uint64_t seed,
                              MaskMode mode = MaskMode::per_entry);

/// Mask file: "C2FM", version byte, mode byte, order byte, dims (u32 LE),
/// seed (u64 LE), missing ratio (IEEE-754 binary64, LE), indicator bits
/// packed LSB-first in tensor linear order.
struct MaskFile {
    ObservationMask mask;
    std::uint64_t seed = 0;
    double missing_ratio = 0;
    MaskMode mode = MaskMode::per_entry;
};

inline constexpr std::uint8_t kMaskFileVersion = 1;

std::vector<std::uint8_t> encode_mask(const MaskFile& file);
MaskFile decode_mask(const std::vector<std::uint8_t>& bytes);
void write_mask(const MaskFile& file, const std::filesystem::path& path);
MaskFile read_mask(const std::filesystem::path& path);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_bytes_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace c2f
