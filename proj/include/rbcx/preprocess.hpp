#pragma once

#include "rbcx/image.hpp"

namespace rbcx {

struct PreprocessConfig {
    int target_side = 64;
    double white_threshold_fraction = 0.98;
    double margin_band_fraction = 0.15;
    bool circle_enabled = true;
    bool landmark_removal_enabled = true;
    bool square_pad_enabled = true;

    void validate() const;
};

/// Pads to a square of side max(w, h); content centered, padding zero.
GrayImage square_pad(const GrayImage& img);

/// Replaces near-white pixels within the margin band by the median of the
/// boundary ring of their connected component.
GrayImage remove_bright_landmarks(const GrayImage& img, const PreprocessConfig& cfg);

/// Zeroes pixels outside the circle of diameter N inscribed in the square.
GrayImage apply_circular_mask(const GrayImage& img);

/// Box-filter (area average) resampling to target_side x target_side.
GrayImage downsample(const GrayImage& img, int target_side);

/// Full normalization chain: pad, landmark removal, circular mask, downsample.
GrayImage preprocess(const GrayImage& img, const PreprocessConfig& cfg);

}  // namespace rbcx
