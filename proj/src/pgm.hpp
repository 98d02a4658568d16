#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace wta {

struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels; // row-major

    GrayImage() = default;
    GrayImage(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), pixels(w * h, fill) {}

    std::uint8_t& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
    std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }

    bool operator==(const GrayImage&) const = default;
};

enum class PgmFormat { Ascii /* P2 */, Binary /* P5 */ };

// 8-bit P2/P5 only. Errors: ParseError (bad magic, malformed header, truncated
// or out-of-range raster), UnsupportedFormatError (maxval other than 255).
GrayImage parse_pgm(std::string_view bytes, const std::string& source = "<memory>");
GrayImage load_pgm(const std::string& path);

std::string encode_pgm(const GrayImage& img, PgmFormat format = PgmFormat::Binary);
void save_pgm(const GrayImage& img, const std::string& path, PgmFormat format = PgmFormat::Binary);

} // namespace wta
