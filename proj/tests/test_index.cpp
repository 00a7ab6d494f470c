#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "oracles.hpp"
#include "rbcx/index.hpp"
#include "rbcx/scan.hpp"
#include "test_util.hpp"

using namespace rbcx;

namespace {

std::string pad_id(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "img%04d", i);
    return buf;
}

std::vector<BuildItem> make_corpus(int n, std::mt19937& rng, int side = 64) {
    std::vector<BuildItem> corpus;
    for (int i = 0; i < n; ++i) {
        BuildItem item;
        item.image_id = pad_id(i);
        item.image = testutil::random_image(side, rng);
        corpus.push_back(std::move(item));
    }
    return corpus;
}

}  // namespace

TEST_CASE("build skips corrupt items and reports them") {
    std::mt19937 rng(201);
    auto corpus = make_corpus(3, rng);
    BuildItem bad;
    bad.image_id = "broken";
    bad.source_path = "/nonexistent/image.png";
    corpus.push_back(bad);

    BuildSummary summary;
    auto idx = Index::build(corpus, {}, {}, &summary);
    CHECK(idx.size() == 3);
    CHECK(summary.succeeded == 3);
    REQUIRE(summary.failures.size() == 1);
    CHECK(summary.failures[0].first == "broken");
}

TEST_CASE("empty or fully-failing corpus is an error") {
    CHECK_THROWS(Index::build({}, {}, {}));
    BuildItem bad;
    bad.image_id = "broken";
    bad.source_path = "/nonexistent/image.png";
    CHECK_THROWS(Index::build({bad}, {}, {}));
}

TEST_CASE("self-retrieval wins with fused error zero in all modes") {
    std::mt19937 rng(203);
    auto corpus = make_corpus(12, rng);
    RetrievalConfig cfg;
    PreprocessConfig pcfg;
    auto idx = Index::build(corpus, cfg, pcfg);

    for (auto mode : {SearchMode::SpR, SearchMode::RbcMedian, SearchMode::RbcMinMax}) {
        cfg.mode = mode;
        for (int i = 0; i < 3; ++i) {
            auto result = idx.retrieve(*corpus[i].image, cfg, pcfg);
            REQUIRE(!result.ranked.empty());
            CHECK(result.ranked[0].image_id == corpus[i].image_id);
            CHECK(result.ranked[0].fused_error == 0.0);
        }
    }
}

TEST_CASE("search_projection matches the brute-force sort oracle") {
    std::mt19937 rng(207);
    auto corpus = make_corpus(20, rng);
    RetrievalConfig cfg;
    auto idx = Index::build(corpus, cfg, {});

    for (auto mode : {SearchMode::SpR, SearchMode::RbcMedian, SearchMode::RbcMinMax}) {
        for (int trial = 0; trial < 5; ++trial) {
            auto qimg = preprocess(testutil::random_image(64, rng), {});
            auto q = compute_query_features(qimg, idx.angles());
            const int a = static_cast<int>(rng() % idx.angles().size());

            std::vector<oracle::ScoredId> scored;
            for (const auto& e : idx.entries()) {
                double d;
                if (mode == SearchMode::SpR) {
                    // same float arithmetic as the scan kernel, independent path
                    float acc = 0.0f;
                    const auto& qb = q.projections.projections[a].bins;
                    const auto& eb = e.projections.projections[a].bins;
                    for (std::size_t i = 0; i < qb.size(); ++i)
                        acc += std::fabs(static_cast<float>(qb[i]) - static_cast<float>(eb[i]));
                    d = acc;
                } else {
                    const auto& qc = mode == SearchMode::RbcMedian ? q.barcode_median.codes[a]
                                                                   : q.barcode_minmax.codes[a];
                    const auto& ec = mode == SearchMode::RbcMedian
                                         ? e.barcode_median.codes[a]
                                         : e.barcode_minmax.codes[a];
                    d = static_cast<double>(oracle::hamming_bits(qc, ec));
                }
                scored.push_back({e.image_id, d});
            }
            auto ref = oracle::full_sort(std::move(scored));

            const int k = 1 + static_cast<int>(rng() % 20);
            auto got = idx.search_projection(q, a, k, mode);
            REQUIRE(got.size() == std::min<std::size_t>(k, ref.size()));
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].image_id == ref[i].id);
                CHECK(got[i].distance == doctest::Approx(ref[i].distance));
            }
        }
    }
}

TEST_CASE("hamming search distance equals flipped-bit count") {
    std::mt19937 rng(211);
    auto corpus = make_corpus(8, rng);
    RetrievalConfig cfg;
    cfg.mode = SearchMode::RbcMedian;
    auto idx = Index::build(corpus, cfg, {});

    // query = entry 0's own features with 3 bits flipped in angle 0's code
    auto qimg = preprocess(*corpus[0].image, {});
    auto q = compute_query_features(qimg, idx.angles());
    q.barcode_median.codes[0][3] = !q.barcode_median.codes[0][3];
    q.barcode_median.codes[0][17] = !q.barcode_median.codes[0][17];
    q.barcode_median.codes[0][40] = !q.barcode_median.codes[0][40];

    auto hits = idx.search_projection(q, 0, static_cast<int>(idx.size()), SearchMode::RbcMedian);
    bool found = false;
    for (const auto& h : hits)
        if (h.image_id == corpus[0].image_id) {
            CHECK(h.distance == 3.0);
            found = true;
        }
    CHECK(found);
}

TEST_CASE("pool respects bounds, dedup and monotonicity") {
    std::mt19937 rng(213);
    auto corpus = make_corpus(40, rng);
    RetrievalConfig cfg;
    auto idx = Index::build(corpus, cfg, {});

    auto qimg = preprocess(testutil::random_image(64, rng), {});
    auto q = compute_query_features(qimg, idx.angles());

    std::vector<std::string> prev_ids;
    for (int k = 1; k <= 14; ++k) {
        cfg.top_k_per_projection = k;
        auto pool = idx.assemble_pool(q, cfg);
        CHECK(pool.candidates.size() <= static_cast<std::size_t>(8 * k));
        std::vector<std::string> ids;
        for (const auto& c : pool.candidates) ids.push_back(c.image_id);
        CHECK(std::is_sorted(ids.begin(), ids.end()));
        CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
        for (const auto& id : prev_ids)
            CHECK(std::find(ids.begin(), ids.end(), id) != ids.end());
        prev_ids = std::move(ids);
    }

    cfg.top_k_per_projection = 3;
    CHECK(idx.assemble_pool(q, cfg).candidates.size() <= 24);
}

TEST_CASE("single angle, k=1 pool is the single best match") {
    std::mt19937 rng(217);
    auto corpus = make_corpus(15, rng);
    RetrievalConfig cfg;
    cfg.angles = {90.0};
    cfg.top_k_per_projection = 1;
    auto idx = Index::build(corpus, cfg, {});

    auto qimg = preprocess(testutil::random_image(64, rng), {});
    auto q = compute_query_features(qimg, idx.angles());
    auto pool = idx.assemble_pool(q, cfg);
    REQUIRE(pool.candidates.size() == 1);
    auto best = idx.search_projection(q, 0, 1, cfg.mode);
    CHECK(pool.candidates[0].image_id == best[0].image_id);
}

TEST_CASE("pool provenance records contributing angles and ranks") {
    std::mt19937 rng(219);
    auto corpus = make_corpus(10, rng);
    RetrievalConfig cfg;
    cfg.top_k_per_projection = 5;
    auto idx = Index::build(corpus, cfg, {});
    auto qimg = preprocess(*corpus[2].image, {});
    auto q = compute_query_features(qimg, idx.angles());
    auto pool = idx.assemble_pool(q, cfg);

    const PoolCandidate* self = nullptr;
    for (const auto& c : pool.candidates)
        if (c.image_id == corpus[2].image_id) self = &c;
    REQUIRE(self != nullptr);
    // an exact duplicate is rank 0 for every angle
    CHECK(self->contributing_angles.size() == 8);
    for (const auto& [angle, rank] : self->best_rank_per_angle) CHECK(rank == 0);
}

TEST_CASE("exploit ranking matches a hand-composed fused-sum oracle") {
    std::mt19937 rng(223);
    auto corpus = make_corpus(25, rng);
    RetrievalConfig cfg;
    cfg.top_k_per_projection = 4;
    auto idx = Index::build(corpus, cfg, {});

    auto qimg = preprocess(testutil::random_image(64, rng), {});
    auto q = compute_query_features(qimg, idx.angles());
    auto pool = idx.assemble_pool(q, cfg);
    REQUIRE(pool.candidates.size() >= 3);
    auto result = idx.exploit_search(pool, q, cfg);

    // recompute both error vectors candidate by candidate
    const std::size_t m = pool.candidates.size();
    std::vector<double> radon(m), lbp(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& e = idx.entry(pool.candidates[i].entry_index);
        double acc = 0;
        for (std::size_t a = 0; a < idx.angles().size(); ++a)
            acc += shifted_distance(q.projections.projections[a], e.projections.projections[a],
                                    cfg.max_shift_fraction);
        radon[i] = acc;
        lbp[i] = lbp_distance(q.lbp, e.lbp);
    }
    auto norm = [&](std::vector<double>& v) {
        const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
        const double lo = *lo_it, span = *hi_it - *lo_it;
        for (auto& x : v) x = span > 0 ? (x - lo) / span : 0.0;
    };
    norm(radon);
    norm(lbp);
    std::vector<oracle::ScoredId> fused;
    for (std::size_t i = 0; i < m; ++i)
        fused.push_back({pool.candidates[i].image_id, radon[i] + lbp[i]});
    auto ref = oracle::full_sort(std::move(fused));

    REQUIRE(result.ranked.size() == m);
    for (std::size_t i = 0; i < m; ++i) {
        CHECK(result.ranked[i].image_id == ref[i].id);
        CHECK(result.ranked[i].fused_error == doctest::Approx(ref[i].distance).epsilon(1e-9));
    }
}

TEST_CASE("fused errors stay within weight bounds and ranked order is ascending") {
    std::mt19937 rng(227);
    auto corpus = make_corpus(30, rng);
    RetrievalConfig cfg;
    auto idx = Index::build(corpus, cfg, {});
    for (int trial = 0; trial < 5; ++trial) {
        auto qimg = preprocess(testutil::random_image(64, rng), {});
        auto result = idx.retrieve_features(compute_query_features(qimg, idx.angles()), cfg);
        double prev = -1;
        for (const auto& item : result.ranked) {
            CHECK(item.fused_error >= prev);
            CHECK(item.fused_error <= cfg.w_radon + cfg.w_lbp + 1e-12);
            CHECK(item.radon_error_norm >= 0.0);
            CHECK(item.radon_error_norm <= 1.0);
            CHECK(item.lbp_error_norm >= 0.0);
            CHECK(item.lbp_error_norm <= 1.0);
            prev = item.fused_error;
        }
    }
}

TEST_CASE("single-candidate pool gets zero errors") {
    std::mt19937 rng(229);
    auto corpus = make_corpus(5, rng);
    RetrievalConfig cfg;
    cfg.angles = {0.0};
    cfg.top_k_per_projection = 1;
    auto idx = Index::build(corpus, cfg, {});
    auto qimg = preprocess(testutil::random_image(64, rng), {});
    auto q = compute_query_features(qimg, idx.angles());
    auto result = idx.retrieve_features(q, cfg);
    REQUIRE(result.ranked.size() == 1);
    CHECK(result.ranked[0].fused_error == 0.0);
}

TEST_CASE("median-mode hamming distances are invariant under intensity scaling") {
    std::mt19937 rng(233);
    for (int trial = 0; trial < 10; ++trial) {
        auto img = testutil::random_image(32, rng);
        GrayImage scaled = img;
        const double c = 0.1 + 2.0 * (rng() % 1000) / 1000.0;
        for (auto& p : scaled.pixels) p *= c;

        auto ps1 = project_all(img, default_angles());
        auto ps2 = project_all(scaled, default_angles());
        auto b1 = make_barcode(ps1, BarcodeMethod::Median);
        auto b2 = make_barcode(ps2, BarcodeMethod::Median);
        CHECK(b1.codes == b2.codes);
    }
}

TEST_CASE("parallel scan kernels agree with the serial reference") {
    std::mt19937 rng(239);
    std::uniform_real_distribution<float> d(0, 10);
    const std::size_t count = 257, len = 64;
    std::vector<float> entries(count * len), query(len);
    for (auto& v : entries) v = d(rng);
    for (auto& v : query) v = d(rng);
    std::vector<float> out_s(count), out_p(count);
    l1_scan_serial(query, entries, count, len, out_s);
    l1_scan_parallel(query, entries, count, len, out_p);
    CHECK(out_s == out_p);
    l2_scan_serial(query, entries, count, len, out_s);
    l2_scan_parallel(query, entries, count, len, out_p);
    CHECK(out_s == out_p);

    const std::size_t words = 8;
    std::vector<std::uint64_t> we(count * words), wq(words);
    for (auto& v : we) v = (static_cast<std::uint64_t>(rng()) << 32) | rng();
    for (auto& v : wq) v = (static_cast<std::uint64_t>(rng()) << 32) | rng();
    std::vector<std::uint32_t> hs(count), hp(count);
    hamming_scan_serial(wq, we, count, words, hs);
    hamming_scan_parallel(wq, we, count, words, hp);
    CHECK(hs == hp);
}

TEST_CASE("retrieval config validation") {
    RetrievalConfig cfg;
    cfg.top_k_per_projection = 0;
    CHECK_THROWS(cfg.validate());
    cfg = {};
    cfg.w_radon = 0;
    cfg.w_lbp = 0;
    CHECK_THROWS(cfg.validate());
    cfg = {};
    cfg.angles.clear();
    CHECK_THROWS(cfg.validate());
    cfg = {};
    cfg.max_shift_fraction = 1.5;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("unknown angle and bad k are rejected") {
    std::mt19937 rng(241);
    auto corpus = make_corpus(4, rng);
    auto idx = Index::build(corpus, {}, {});
    auto qimg = preprocess(testutil::random_image(64, rng), {});
    auto q = compute_query_features(qimg, idx.angles());
    CHECK_THROWS(idx.search_projection(q, 99, 3, SearchMode::SpR));
    CHECK_THROWS(idx.search_projection(q, -1, 3, SearchMode::SpR));
    CHECK_THROWS(idx.search_projection(q, 0, 0, SearchMode::SpR));
    CHECK_THROWS(idx.angle_index(33.0));
    CHECK(idx.angle_index(22.5) == 1);
}
