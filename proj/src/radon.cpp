#include "rbcx/radon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rbcx {

std::vector<double> default_angles() {
    return {0.0, 22.5, 45.0, 67.5, 90.0, 112.5, 135.0, 157.5};
}

namespace {

// unit-mass tent of half-width a
inline double tent(double x, double a) {
    x = std::abs(x);
    return x >= a ? 0.0 : (1.0 - x / a) / a;
}

// Splat footprint: the projection of one pixel's bilinear footprint onto the
// rho axis, i.e. the convolution of tents of half-widths |cos| and |sin|.
// Piecewise quadratic, so per-interval Simpson between breakpoints is exact.
struct SplatKernel {
    double c, s;       // tent half-widths, c >= s after normalization
    double support;    // c + s

    explicit SplatKernel(double theta) {
        c = std::abs(std::cos(theta));
        s = std::abs(std::sin(theta));
        if (c < s) std::swap(c, s);
        support = (s < 1e-12 ? c : c + s);
    }

    double operator()(double d) const {
        if (s < 1e-12) return tent(d, c);
        const double lo = std::max(-c, d - s);
        const double hi = std::min(c, d + s);
        if (hi <= lo) return 0.0;
        double pts[6] = {lo, hi, 0.0, d, d - s, d + s};
        std::sort(pts, pts + 6);
        auto f = [&](double u) { return tent(u, c) * tent(d - u, s); };
        double acc = 0.0;
        for (int i = 0; i < 5; ++i) {
            const double a = std::clamp(pts[i], lo, hi);
            const double b = std::clamp(pts[i + 1], lo, hi);
            if (b <= a) continue;
            acc += (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
        }
        return acc;
    }
};

// Full-length projection over a symmetric support wide enough that every
// pixel's footprint fits; per-pixel weight normalization keeps the total mass
// exactly equal to the image mass.
std::vector<double> radon_full_bins(const GrayImage& img, double angle_deg, int* crop_out) {
    if (!img.square()) throw std::invalid_argument("radon_projection: image must be square");
    if (angle_deg < 0.0 || angle_deg >= 180.0)
        throw std::invalid_argument("radon_projection: angle out of [0, 180)");

    const int n = img.width;
    int full = static_cast<int>(std::ceil(std::sqrt(2.0) * n)) + 4;  // kernel tail margin
    if ((full - n) % 2 != 0) ++full;  // keep the center crop symmetric

    const double theta = angle_deg * M_PI / 180.0;
    const double c = std::cos(theta), s = std::sin(theta);
    const double center = (n - 1) / 2.0;
    const double bin_origin = -(full - 1) / 2.0;  // offset of bin 0 from rho = 0
    const SplatKernel kernel(theta);

    std::vector<double> bins(full, 0.0);
    double weights[8];
    for (int y = 0; y < n; ++y) {
        const double ry = (y - center) * s;
        for (int x = 0; x < n; ++x) {
            const double v = img.at(x, y);
            if (v == 0.0) continue;
            const double p = (x - center) * c + ry - bin_origin;
            const int j0 = static_cast<int>(std::ceil(p - kernel.support));
            const int j1 = static_cast<int>(std::floor(p + kernel.support));
            double total = 0.0;
            for (int j = j0; j <= j1; ++j) {
                weights[j - j0] = kernel(j - p);
                total += weights[j - j0];
            }
            for (int j = j0; j <= j1; ++j) bins[j] += v * weights[j - j0] / total;
        }
    }
    if (crop_out) *crop_out = (full - n) / 2;
    return bins;
}

}  // namespace

RadonProjection radon_projection_full(const GrayImage& img, double angle_deg) {
    RadonProjection out;
    out.angle_deg = angle_deg;
    out.bins = radon_full_bins(img, angle_deg, nullptr);
    return out;
}

RadonProjection radon_projection(const GrayImage& img, double angle_deg) {
    int crop = 0;
    auto full_bins = radon_full_bins(img, angle_deg, &crop);
    RadonProjection out;
    out.angle_deg = angle_deg;
    out.bins.assign(full_bins.begin() + crop, full_bins.begin() + crop + img.width);
    return out;
}

ProjectionSet project_all(const GrayImage& img, const std::vector<double>& angles,
                          const std::string& image_id) {
    if (angles.empty()) throw std::invalid_argument("project_all: empty angle list");
    for (std::size_t i = 1; i < angles.size(); ++i)
        if (angles[i] <= angles[i - 1])
            throw std::invalid_argument("project_all: angles must be strictly increasing");

    ProjectionSet ps;
    ps.image_id = image_id;
    ps.projections.reserve(angles.size());
    for (double a : angles) ps.projections.push_back(radon_projection(img, a));
    return ps;
}

std::vector<bool> binarize_median(const RadonProjection& p) {
    if (p.bins.empty()) throw std::invalid_argument("binarize_median: empty projection");
    std::vector<double> sorted = p.bins;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    std::vector<bool> bits(m);
    for (std::size_t i = 0; i < m; ++i) bits[i] = !(p.bins[i] < median);
    return bits;
}

std::vector<bool> binarize_minmax(const RadonProjection& p) {
    if (p.bins.empty()) throw std::invalid_argument("binarize_minmax: empty projection");
    const std::size_t m = p.bins.size();

    // 3-bin moving average, window shrunk at the edges
    std::vector<double> sm(m);
    for (std::size_t i = 0; i < m; ++i) {
        double acc = p.bins[i];
        int cnt = 1;
        if (i > 0) { acc += p.bins[i - 1]; ++cnt; }
        if (i + 1 < m) { acc += p.bins[i + 1]; ++cnt; }
        sm[i] = acc / cnt;
    }

    // rising segments (toward a maximum) are 1, falling are 0;
    // plateaus inherit the preceding direction
    std::vector<bool> bits(m, false);
    int dir = 0;
    std::size_t first_move = m;
    for (std::size_t i = 1; i < m; ++i) {
        if (sm[i] > sm[i - 1]) dir = 1;
        else if (sm[i] < sm[i - 1]) dir = -1;
        if (dir != 0 && first_move == m) first_move = i;
        bits[i] = dir > 0;
    }
    if (dir == 0) return bits;  // constant projection: all zeros
    // the leading run (including bit 0) takes the bit of the first movement
    const bool lead = sm[first_move] > sm[first_move - 1];
    for (std::size_t i = 0; i < first_move; ++i) bits[i] = lead;
    return bits;
}

RadonBarcode make_barcode(const ProjectionSet& ps, BarcodeMethod method) {
    RadonBarcode bc;
    bc.image_id = ps.image_id;
    bc.method = method;
    bc.codes.reserve(ps.projections.size());
    for (const auto& p : ps.projections)
        bc.codes.push_back(method == BarcodeMethod::Median ? binarize_median(p)
                                                           : binarize_minmax(p));
    return bc;
}

double projection_l1(const RadonProjection& a, const RadonProjection& b) {
    if (a.bins.size() != b.bins.size())
        throw std::invalid_argument("projection_l1: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.bins.size(); ++i) acc += std::abs(a.bins[i] - b.bins[i]);
    return acc;
}

double projection_l2(const RadonProjection& a, const RadonProjection& b) {
    if (a.bins.size() != b.bins.size())
        throw std::invalid_argument("projection_l2: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.bins.size(); ++i) {
        const double d = a.bins[i] - b.bins[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double shifted_distance(const RadonProjection& a, const RadonProjection& b,
                        double max_shift_fraction) {
    if (a.bins.size() != b.bins.size())
        throw std::invalid_argument("shifted_distance: length mismatch");
    if (a.angle_deg != b.angle_deg)
        throw std::invalid_argument("shifted_distance: angle mismatch");
    const int len = static_cast<int>(a.bins.size());
    if (len == 0) throw std::invalid_argument("shifted_distance: empty projections");

    const int max_shift = static_cast<int>(std::floor(max_shift_fraction * len));
    double best = std::numeric_limits<double>::infinity();
    for (int sh = -max_shift; sh <= max_shift; ++sh) {
        // compare a[i] with b shifted right by sh; overlap shrinks with |sh|
        const int lo = std::max(0, sh);
        const int hi = std::min(len, len + sh);
        const int overlap = hi - lo;
        if (overlap <= 0) continue;
        double acc = 0.0;
        for (int i = lo; i < hi; ++i) acc += std::abs(a.bins[i] - b.bins[i - sh]);
        // scale by len/overlap so short overlaps are not rewarded
        best = std::min(best, acc * len / overlap);
    }
    return best;
}

std::vector<std::uint8_t> pack_bits(const std::vector<bool>& bits) {
    std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    return bytes;
}

std::vector<bool> unpack_bits(const std::vector<std::uint8_t>& bytes, std::size_t bit_count) {
    if (bytes.size() * 8 < bit_count)
        throw std::invalid_argument("unpack_bits: byte buffer too short");
    std::vector<bool> bits(bit_count);
    for (std::size_t i = 0; i < bit_count; ++i)
        bits[i] = (bytes[i / 8] >> (7 - i % 8)) & 1u;
    return bits;
}

}  // namespace rbcx
