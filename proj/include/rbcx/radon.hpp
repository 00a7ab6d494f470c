#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rbcx/image.hpp"

namespace rbcx {

/// One parallel-beam projection: line-integral sums at unit-spaced offsets,
/// center-cropped to the image side length.
struct RadonProjection {
    double angle_deg = 0.0;
    std::vector<double> bins;
};

struct ProjectionSet {
    std::string image_id;
    std::vector<RadonProjection> projections;
};

enum class BarcodeMethod { Median, MinMax };

/// Per-angle bit vectors from thresholded projections.
struct RadonBarcode {
    std::string image_id;
    BarcodeMethod method = BarcodeMethod::Median;
    std::vector<std::vector<bool>> codes;
};

/// The eight equidistant angles used throughout: 0, 22.5, ..., 157.5.
std::vector<double> default_angles();

/// Projection cropped to the central `width` bins (feature length used everywhere).
RadonProjection radon_projection(const GrayImage& img, double angle_deg);

/// Uncropped projection over the full support; its bin sum equals the image
/// mass exactly at every angle.
RadonProjection radon_projection_full(const GrayImage& img, double angle_deg);

ProjectionSet project_all(const GrayImage& img, const std::vector<double>& angles,
                          const std::string& image_id = {});

std::vector<bool> binarize_median(const RadonProjection& p);
std::vector<bool> binarize_minmax(const RadonProjection& p);

RadonBarcode make_barcode(const ProjectionSet& ps, BarcodeMethod method);

/// Minimum overlap-normalized L1 distance over integer shifts within
/// +/- floor(max_shift_fraction * L).
double shifted_distance(const RadonProjection& a, const RadonProjection& b,
                        double max_shift_fraction = 0.10);

/// Plain L1 / L2 between same-length projections (zero-shift distance).
double projection_l1(const RadonProjection& a, const RadonProjection& b);
double projection_l2(const RadonProjection& a, const RadonProjection& b);

/// MSB-first bit packing, the persistence wire form for codes.
std::vector<std::uint8_t> pack_bits(const std::vector<bool>& bits);
std::vector<bool> unpack_bits(const std::vector<std::uint8_t>& bytes, std::size_t bit_count);

}  // namespace rbcx
