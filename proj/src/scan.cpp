#include "rbcx/scan.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rbcx {

int effective_threads() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* env = std::getenv("RBCX_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0 && v < 4096) return static_cast<int>(std::min<long>(v, hw));
    }
    return hw;
}

std::uint32_t hamming_words(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
    if (a.size() != b.size()) throw std::invalid_argument("hamming_words: length mismatch");
    std::uint32_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::popcount(a[i] ^ b[i]);
    return d;
}

namespace {

inline float l1_row(const float* q, const float* row, std::size_t len) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < len; ++i) acc += std::fabs(q[i] - row[i]);
    return acc;
}

inline float l2_row(const float* q, const float* row, std::size_t len) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < len; ++i) {
        const float d = q[i] - row[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

inline std::uint32_t ham_row(const std::uint64_t* q, const std::uint64_t* row, std::size_t words) {
    std::uint32_t acc = 0;
    for (std::size_t i = 0; i < words; ++i) acc += std::popcount(q[i] ^ row[i]);
    return acc;
}

void check_shapes(std::size_t qlen, std::size_t total, std::size_t count, std::size_t row_len,
                  std::size_t outlen) {
    if (qlen != row_len) throw std::invalid_argument("scan: query length != row length");
    if (total != count * row_len) throw std::invalid_argument("scan: entry buffer size mismatch");
    if (outlen != count) throw std::invalid_argument("scan: output size mismatch");
}

}  // namespace

void l1_scan_serial(std::span<const float> query, std::span<const float> entries,
                    std::size_t count, std::size_t row_len, std::span<float> out) {
    check_shapes(query.size(), entries.size(), count, row_len, out.size());
    for (std::size_t r = 0; r < count; ++r)
        out[r] = l1_row(query.data(), entries.data() + r * row_len, row_len);
}

void l1_scan_parallel(std::span<const float> query, std::span<const float> entries,
                      std::size_t count, std::size_t row_len, std::span<float> out) {
    check_shapes(query.size(), entries.size(), count, row_len, out.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(effective_threads())
#endif
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(count); ++r)
        out[r] = l1_row(query.data(), entries.data() + r * row_len, row_len);
}

void l2_scan_serial(std::span<const float> query, std::span<const float> entries,
                    std::size_t count, std::size_t row_len, std::span<float> out) {
    check_shapes(query.size(), entries.size(), count, row_len, out.size());
    for (std::size_t r = 0; r < count; ++r)
        out[r] = l2_row(query.data(), entries.data() + r * row_len, row_len);
}

void l2_scan_parallel(std::span<const float> query, std::span<const float> entries,
                      std::size_t count, std::size_t row_len, std::span<float> out) {
    check_shapes(query.size(), entries.size(), count, row_len, out.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(effective_threads())
#endif
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(count); ++r)
        out[r] = l2_row(query.data(), entries.data() + r * row_len, row_len);
}

void hamming_scan_serial(std::span<const std::uint64_t> query,
                         std::span<const std::uint64_t> entries, std::size_t count,
                         std::size_t row_words, std::span<std::uint32_t> out) {
    check_shapes(query.size(), entries.size(), count, row_words, out.size());
    for (std::size_t r = 0; r < count; ++r)
        out[r] = ham_row(query.data(), entries.data() + r * row_words, row_words);
}

void hamming_scan_parallel(std::span<const std::uint64_t> query,
                           std::span<const std::uint64_t> entries, std::size_t count,
                           std::size_t row_words, std::span<std::uint32_t> out) {
    check_shapes(query.size(), entries.size(), count, row_words, out.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(effective_threads())
#endif
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(count); ++r)
        out[r] = ham_row(query.data(), entries.data() + r * row_words, row_words);
}

}  // namespace rbcx
