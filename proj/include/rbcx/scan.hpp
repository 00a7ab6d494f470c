#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rbcx {

/// Thread cap from RBCX_THREADS (0 or unset = all hardware threads).
int effective_threads();

/// Popcount Hamming distance between two equal-length word spans.
std::uint32_t hamming_words(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

// Linear-scan distance kernels. `entries` holds `count` rows of `row_len`
// values back to back. The serial variants are the reference implementations;
// the parallel ones must produce identical output.

void l1_scan_serial(std::span<const float> query, std::span<const float> entries,
                    std::size_t count, std::size_t row_len, std::span<float> out);
void l1_scan_parallel(std::span<const float> query, std::span<const float> entries,
                      std::size_t count, std::size_t row_len, std::span<float> out);

void l2_scan_serial(std::span<const float> query, std::span<const float> entries,
                    std::size_t count, std::size_t row_len, std::span<float> out);
void l2_scan_parallel(std::span<const float> query, std::span<const float> entries,
                      std::size_t count, std::size_t row_len, std::span<float> out);

void hamming_scan_serial(std::span<const std::uint64_t> query,
                         std::span<const std::uint64_t> entries, std::size_t count,
                         std::size_t row_words, std::span<std::uint32_t> out);
void hamming_scan_parallel(std::span<const std::uint64_t> query,
                           std::span<const std::uint64_t> entries, std::size_t count,
                           std::size_t row_words, std::span<std::uint32_t> out);

}  // namespace rbcx
