#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace inspecta {

/// Fixed-size 8-bit grayscale pixel grid; the universal sample carrier.
/// Row-major, (x, y) = (column, row).
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    std::uint8_t at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }
    std::uint8_t& at(int x, int y) {
        return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    bool operator==(const Image&) const = default;
};

/// Binary PGM (P5), maxval 255. Throws IoError on malformed input.
Image read_pgm(const std::filesystem::path& path);

/// Canonical writer: "P5\n<w> <h>\n255\n" followed by raw rows.
void write_pgm(const Image& image, const std::filesystem::path& path);

}  // namespace inspecta
