// serial vs OpenMP kernel comparison on index-shaped workloads

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "rbcx/radon.hpp"
#include "rbcx/scan.hpp"

namespace {

constexpr std::size_t kLen = 64;        // projection length at the default side
constexpr std::size_t kWords = 1;       // 64-bit code per angle

std::vector<float> random_floats(std::size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> d(0, 10);
    std::vector<float> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

std::vector<std::uint64_t> random_words(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint64_t> v(n);
    for (auto& x : v) x = rng();
    return v;
}

void bm_l1_scan_serial(benchmark::State& state) {
    const auto count = static_cast<std::size_t>(state.range(0));
    const auto entries = random_floats(count * kLen, 1);
    const auto query = random_floats(kLen, 2);
    std::vector<float> out(count);
    for (auto _ : state) {
        rbcx::l1_scan_serial(query, entries, count, kLen, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * count));
}

void bm_l1_scan_parallel(benchmark::State& state) {
    const auto count = static_cast<std::size_t>(state.range(0));
    const auto entries = random_floats(count * kLen, 1);
    const auto query = random_floats(kLen, 2);
    std::vector<float> out(count);
    for (auto _ : state) {
        rbcx::l1_scan_parallel(query, entries, count, kLen, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * count));
}

void bm_hamming_scan_serial(benchmark::State& state) {
    const auto count = static_cast<std::size_t>(state.range(0));
    const auto entries = random_words(count * kWords, 3);
    const auto query = random_words(kWords, 4);
    std::vector<std::uint32_t> out(count);
    for (auto _ : state) {
        rbcx::hamming_scan_serial(query, entries, count, kWords, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * count));
}

void bm_hamming_scan_parallel(benchmark::State& state) {
    const auto count = static_cast<std::size_t>(state.range(0));
    const auto entries = random_words(count * kWords, 3);
    const auto query = random_words(kWords, 4);
    std::vector<std::uint32_t> out(count);
    for (auto _ : state) {
        rbcx::hamming_scan_parallel(query, entries, count, kWords, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * count));
}

void bm_radon_projection(benchmark::State& state) {
    std::mt19937 rng(5);
    rbcx::GrayImage img(64, 64);
    std::uniform_real_distribution<double> d(0, 1);
    for (auto& p : img.pixels) p = d(rng);
    for (auto _ : state) {
        for (double a : rbcx::default_angles()) {
            auto proj = rbcx::radon_projection(img, a);
            benchmark::DoNotOptimize(proj.bins.data());
        }
    }
}

}  // namespace

BENCHMARK(bm_l1_scan_serial)->Arg(1000)->Arg(13000)->Arg(100000);
BENCHMARK(bm_l1_scan_parallel)->Arg(1000)->Arg(13000)->Arg(100000);
BENCHMARK(bm_hamming_scan_serial)->Arg(1000)->Arg(13000)->Arg(100000);
BENCHMARK(bm_hamming_scan_parallel)->Arg(1000)->Arg(13000)->Arg(100000);
BENCHMARK(bm_radon_projection);

BENCHMARK_MAIN();
