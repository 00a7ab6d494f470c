#pragma once

#include <vector>

#include "rbcx/image.hpp"

namespace rbcx {

/// L1-normalized uniform LBP(8,1) histogram: 58 uniform bins + 1 catch-all.
struct LbpHistogram {
    std::vector<double> bins;
};

inline constexpr int kLbpBins = 59;

LbpHistogram lbp_histogram(const GrayImage& img);

/// Sum of absolute bin differences; in [0, 2] for normalized histograms.
double lbp_distance(const LbpHistogram& a, const LbpHistogram& b);

}  // namespace rbcx
