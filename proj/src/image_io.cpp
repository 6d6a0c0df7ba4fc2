// SPDX-License-Identifier: MIT
#include "c2f/io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace c2f {

namespace {

bool has_png_signature(const std::vector<std::uint8_t>& bytes) {
    return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

Tensor from_rgb8(const std::uint8_t* rgb, Index h, Index w) {
    Tensor t({h, w, 3});
    for (Index r = 0; r < h; ++r)
        for (Index c = 0; c < w; ++c)
            for (Index ch = 0; ch < 3; ++ch) t(r, c, ch) = rgb[(r * w + c) * 3 + ch] / 255.0;
    return t;
}

std::vector<std::uint8_t> to_rgb8(const Tensor& image) {
    if (image.order() != 3 || image.dim(2) != 3)
        throw std::invalid_argument("image tensor must be H x W x 3, got " + shape_string(image.dims()));
    const Index h = image.dim(0), w = image.dim(1);
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(h * w * 3));
    for (Index r = 0; r < h; ++r)
        for (Index c = 0; c < w; ++c)
            for (Index ch = 0; ch < 3; ++ch) rgb[static_cast<std::size_t>((r * w + c) * 3 + ch)] = quantize_pixel(image(r, c, ch));
    return rgb;
}

Tensor decode_png(const std::vector<std::uint8_t>& bytes) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
        throw IoError(std::string("PNG decode failed: ") + img.message);
    if ((img.format & PNG_FORMAT_FLAG_COLOR) == 0) {
        png_image_free(&img);
        throw IoError("PNG is not an RGB image");
    }
    img.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, rgb.data(), 0, nullptr))
        throw IoError(std::string("PNG decode failed: ") + img.message);
    return from_rgb8(rgb.data(), img.height, img.width);
}

}  // namespace

std::uint8_t quantize_pixel(double v) {
    const double c = std::clamp(std::isnan(v) ? 0.0 : v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

Tensor decode_ppm(const std::vector<std::uint8_t>& bytes) {
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&] {
        skip_space();
        long v = 0;
        std::size_t start = pos;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) v = v * 10 + (bytes[pos++] - '0');
        if (pos == start || v <= 0 || v > (1L << 24)) throw IoError("malformed PPM header");
        return v;
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw IoError("not a binary PPM (P6)");
    pos = 2;
    const long w = read_int(), h = read_int(), maxval = read_int();
    if (maxval != 255) throw IoError("only 8-bit PPM is supported");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw IoError("malformed PPM header");
    ++pos;
    const auto need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3;
    if (bytes.size() - pos < need) throw IoError("truncated PPM pixel data");
    return from_rgb8(bytes.data() + pos, h, w);
}

std::vector<std::uint8_t> encode_ppm(const Tensor& image) {
    const auto rgb = to_rgb8(image);
    const std::string header = "P6\n" + std::to_string(image.dim(1)) + " " + std::to_string(image.dim(0)) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), rgb.begin(), rgb.end());
    return out;
}

Tensor load_image(const std::filesystem::path& path) {
    const auto bytes = read_bytes(path);
    if (has_png_signature(bytes)) return decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P') return decode_ppm(bytes);
    throw IoError("unsupported image format: " + path.string());
}

void save_image(const Tensor& image, const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext != ".png") {
        write_bytes_atomic(path, encode_ppm(image));
        return;
    }
    const auto rgb = to_rgb8(image);
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.dim(1));
    img.height = static_cast<png_uint_32>(image.dim(0));
    img.format = PNG_FORMAT_RGB;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&img, nullptr, &size, 0, rgb.data(), 0, nullptr))
        throw IoError(std::string("PNG encode failed: ") + img.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&img, out.data(), &size, 0, rgb.data(), 0, nullptr))
        throw IoError(std::string("PNG encode failed: ") + img.message);
    out.resize(size);
    write_bytes_atomic(path, out);
}

}  // namespace c2f
