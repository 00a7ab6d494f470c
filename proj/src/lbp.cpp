#include "rbcx/lbp.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace rbcx {

namespace {

int circular_transitions(unsigned code) {
    int t = 0;
    for (int i = 0; i < 8; ++i) {
        const unsigned a = (code >> i) & 1u;
        const unsigned b = (code >> ((i + 1) % 8)) & 1u;
        t += a != b;
    }
    return t;
}

// 256 -> histogram bin; uniform patterns (<= 2 transitions) get bins 0..57
// in pattern-value order, everything else collapses into bin 58
const std::array<int, 256>& uniform_lut() {
    static const std::array<int, 256> lut = [] {
        std::array<int, 256> t{};
        int next = 0;
        for (int c = 0; c < 256; ++c)
            t[c] = circular_transitions(static_cast<unsigned>(c)) <= 2 ? next++ : kLbpBins - 1;
        return t;
    }();
    return lut;
}

double bilinear(const GrayImage& img, double x, double y) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    const double v00 = img.at(x0, y0);
    const double v10 = img.at(x0 + 1, y0);
    const double v01 = img.at(x0, y0 + 1);
    const double v11 = img.at(x0 + 1, y0 + 1);
    // incremental form: exact when the four corners are equal, so the >= tie
    // rule behaves consistently on flat patches
    return v00 + fx * (v10 - v00) + fy * (v01 - v00) + fx * fy * (v11 - v10 - v01 + v00);
}

}  // namespace

LbpHistogram lbp_histogram(const GrayImage& img) {
    if (img.width < 3 || img.height < 3)
        throw std::invalid_argument("lbp_histogram: image smaller than 3x3");

    // sample offsets on the radius-1 circle, neighbor k at angle 2*pi*k/8
    std::array<double, 8> ox{}, oy{};
    for (int k = 0; k < 8; ++k) {
        ox[k] = std::cos(2.0 * M_PI * k / 8.0);
        oy[k] = -std::sin(2.0 * M_PI * k / 8.0);
    }

    const auto& lut = uniform_lut();
    LbpHistogram h;
    h.bins.assign(kLbpBins, 0.0);
    std::size_t count = 0;
    for (int y = 1; y < img.height - 1; ++y) {
        for (int x = 1; x < img.width - 1; ++x) {
            const double c = img.at(x, y);
            unsigned code = 0;
            for (int k = 0; k < 8; ++k) {
                double v;
                if (k % 2 == 0) {
                    v = img.at(x + static_cast<int>(std::lround(ox[k])),
                               y + static_cast<int>(std::lround(oy[k])));
                } else {
                    v = bilinear(img, x + ox[k], y + oy[k]);
                }
                if (v >= c) code |= 1u << k;
            }
            h.bins[lut[code]] += 1.0;
            ++count;
        }
    }
    if (count > 0)
        for (double& b : h.bins) b /= static_cast<double>(count);
    return h;
}

double lbp_distance(const LbpHistogram& a, const LbpHistogram& b) {
    if (a.bins.size() != b.bins.size())
        throw std::invalid_argument("lbp_distance: bin count mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.bins.size(); ++i) acc += std::abs(a.bins[i] - b.bins[i]);
    return acc;
}

}  // namespace rbcx
