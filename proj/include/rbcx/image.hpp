#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rbcx {

/// Row-major grayscale raster with intensities in [0, 1].
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
        if (w <= 0 || h <= 0)
            throw std::invalid_argument("GrayImage: non-positive dimensions");
    }

    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

    bool square() const { return width == height; }
    std::size_t size() const { return pixels.size(); }
};

/// Loads an 8- or 16-bit grayscale PNG or PGM and rescales to [0, 1].
/// Color inputs are rejected.
GrayImage load_image(const std::string& path);

/// Writes an 8-bit binary PGM (intensities clamped to [0, 1]).
void save_pgm(const GrayImage& img, const std::string& path);

}  // namespace rbcx
