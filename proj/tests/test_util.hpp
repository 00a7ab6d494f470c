#pragma once

#include <random>

#include "rbcx/image.hpp"
#include "rbcx/radon.hpp"

namespace rbcx::testutil {

inline GrayImage random_image(int side, std::mt19937& rng) {
    GrayImage img(side, side);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (auto& p : img.pixels) p = dist(rng);
    return img;
}

inline RadonProjection random_projection(int len, std::mt19937& rng, double angle = 0.0) {
    RadonProjection p;
    p.angle_deg = angle;
    p.bins.resize(len);
    std::uniform_real_distribution<double> dist(0.0, 10.0);
    for (auto& b : p.bins) b = dist(rng);
    return p;
}

}  // namespace rbcx::testutil
