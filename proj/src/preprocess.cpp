#include "rbcx/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace rbcx {

void PreprocessConfig::validate() const {
    if (target_side < 8) throw std::invalid_argument("target_side must be >= 8");
    if (white_threshold_fraction <= 0 || white_threshold_fraction > 1)
        throw std::invalid_argument("white_threshold_fraction out of (0, 1]");
    if (margin_band_fraction < 0 || margin_band_fraction > 0.5)
        throw std::invalid_argument("margin_band_fraction out of [0, 0.5]");
}

GrayImage square_pad(const GrayImage& img) {
    if (img.square()) return img;
    const int side = std::max(img.width, img.height);
    GrayImage out(side, side, 0.0);
    // content centered; odd remainder goes to the trailing side
    const int x0 = (side - img.width) / 2;
    const int y0 = (side - img.height) / 2;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(x0 + x, y0 + y) = img.at(x, y);
    return out;
}

GrayImage remove_bright_landmarks(const GrayImage& img, const PreprocessConfig& cfg) {
    if (!img.square()) throw std::invalid_argument("remove_bright_landmarks: image must be square");
    const int n = img.width;
    const double maxv = *std::max_element(img.pixels.begin(), img.pixels.end());
    if (maxv <= 0.0) return img;

    const double thresh = cfg.white_threshold_fraction * maxv;
    const double band = cfg.margin_band_fraction * n;
    auto in_band = [&](int x, int y) {
        const int d = std::min(std::min(x, n - 1 - x), std::min(y, n - 1 - y));
        return d < band;
    };

    std::vector<char> removed(img.size(), 0);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            if (img.at(x, y) >= thresh && in_band(x, y)) removed[y * n + x] = 1;

    GrayImage out = img;
    std::vector<char> seen(img.size(), 0);
    std::vector<int> component, ring;
    for (int sy = 0; sy < n; ++sy) {
        for (int sx = 0; sx < n; ++sx) {
            const int start = sy * n + sx;
            if (!removed[start] || seen[start]) continue;
            component.clear();
            ring.clear();
            // flood fill one 8-connected component; the one-pixel dilation of
            // the component that is not itself removed forms the fill ring
            std::queue<int> q;
            q.push(start);
            seen[start] = 1;
            while (!q.empty()) {
                const int idx = q.front();
                q.pop();
                component.push_back(idx);
                const int cx = idx % n, cy = idx / n;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int x = cx + dx, y = cy + dy;
                        if (x < 0 || x >= n || y < 0 || y >= n) continue;
                        const int nidx = y * n + x;
                        if (removed[nidx]) {
                            if (!seen[nidx]) {
                                seen[nidx] = 1;
                                q.push(nidx);
                            }
                        } else {
                            ring.push_back(nidx);
                        }
                    }
                }
            }
            double fill = 0.0;
            if (!ring.empty()) {
                std::sort(ring.begin(), ring.end());
                ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
                std::vector<double> vals;
                vals.reserve(ring.size());
                for (int idx : ring) vals.push_back(img.pixels[idx]);
                std::sort(vals.begin(), vals.end());
                const std::size_t m = vals.size();
                fill = m % 2 ? vals[m / 2] : 0.5 * (vals[m / 2 - 1] + vals[m / 2]);
            }
            for (int idx : component) out.pixels[idx] = fill;
        }
    }
    return out;
}

GrayImage apply_circular_mask(const GrayImage& img) {
    if (!img.square()) throw std::invalid_argument("apply_circular_mask: image must be square");
    const int n = img.width;
    const double c = (n - 1) / 2.0;
    const double r = n / 2.0;
    const double r2 = r * r;
    GrayImage out = img;
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const double dx = x - c, dy = y - c;
            if (dx * dx + dy * dy > r2) out.at(x, y) = 0.0;
        }
    }
    return out;
}

namespace {

// exact fractional-overlap 1-D box resample of each row: w -> tw
std::vector<double> box_resample_rows(const std::vector<double>& src, int w, int h, int tw) {
    std::vector<double> dst(static_cast<std::size_t>(tw) * h, 0.0);
    const double scale = static_cast<double>(w) / tw;
    for (int y = 0; y < h; ++y) {
        const double* in = src.data() + static_cast<std::size_t>(y) * w;
        double* out = dst.data() + static_cast<std::size_t>(y) * tw;
        for (int x = 0; x < tw; ++x) {
            const double lo = x * scale, hi = (x + 1) * scale;
            double acc = 0.0;
            int k0 = static_cast<int>(std::floor(lo));
            int k1 = static_cast<int>(std::ceil(hi));
            k1 = std::min(k1, w);
            for (int k = k0; k < k1; ++k) {
                const double ov = std::min(hi, static_cast<double>(k + 1)) -
                                  std::max(lo, static_cast<double>(k));
                if (ov > 0) acc += in[k] * ov;
            }
            out[x] = acc / scale;
        }
    }
    return dst;
}

std::vector<double> transpose(const std::vector<double>& src, int w, int h) {
    std::vector<double> dst(src.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            dst[static_cast<std::size_t>(x) * h + y] = src[static_cast<std::size_t>(y) * w + x];
    return dst;
}

}  // namespace

GrayImage downsample(const GrayImage& img, int target_side) {
    if (!img.square()) throw std::invalid_argument("downsample: image must be square");
    if (img.width < target_side)
        throw std::invalid_argument("downsample: side smaller than target (no upsampling)");
    if (img.width == target_side) return img;

    const int n = img.width;
    auto rows = box_resample_rows(img.pixels, n, n, target_side);
    auto t = transpose(rows, target_side, n);
    auto cols = box_resample_rows(t, n, target_side, target_side);
    GrayImage out(target_side, target_side);
    out.pixels = transpose(cols, target_side, target_side);
    return out;
}

GrayImage preprocess(const GrayImage& img, const PreprocessConfig& cfg) {
    cfg.validate();
    GrayImage work = cfg.square_pad_enabled ? square_pad(img) : img;
    if (!work.square())
        throw std::invalid_argument("preprocess: non-square input with padding disabled");
    if (work.width < cfg.target_side) {
        // zero-pad small inputs up to the target so the chain never upsamples
        GrayImage padded(cfg.target_side, cfg.target_side, 0.0);
        const int off = (cfg.target_side - work.width) / 2;
        for (int y = 0; y < work.height; ++y)
            for (int x = 0; x < work.width; ++x)
                padded.at(off + x, off + y) = work.at(x, y);
        work = std::move(padded);
    }
    if (cfg.landmark_removal_enabled) work = remove_bright_landmarks(work, cfg);
    if (cfg.circle_enabled) work = apply_circular_mask(work);
    return downsample(work, cfg.target_side);
}

}  // namespace rbcx
