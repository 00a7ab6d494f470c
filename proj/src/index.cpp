#include "rbcx/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "rbcx/scan.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rbcx {

SearchMode parse_mode(const std::string& name) {
    if (name == "sp-r") return SearchMode::SpR;
    if (name == "rbc-median") return SearchMode::RbcMedian;
    if (name == "rbc-minmax") return SearchMode::RbcMinMax;
    throw std::invalid_argument("unknown mode: " + name);
}

std::string mode_name(SearchMode mode) {
    switch (mode) {
        case SearchMode::SpR: return "sp-r";
        case SearchMode::RbcMedian: return "rbc-median";
        case SearchMode::RbcMinMax: return "rbc-minmax";
    }
    return "?";
}

void RetrievalConfig::validate() const {
    if (top_k_per_projection < 1) throw std::invalid_argument("top_k_per_projection must be >= 1");
    if (angles.empty()) throw std::invalid_argument("angle list must be nonempty");
    if (w_radon < 0 || w_lbp < 0 || (w_radon == 0 && w_lbp == 0))
        throw std::invalid_argument("fusion weights must be >= 0 and not both 0");
    if (max_shift_fraction < 0 || max_shift_fraction >= 1)
        throw std::invalid_argument("max_shift_fraction out of [0, 1)");
}

QueryFeatures compute_query_features(const GrayImage& preprocessed,
                                     const std::vector<double>& angles) {
    QueryFeatures q;
    q.projections = project_all(preprocessed, angles);
    q.barcode_median = make_barcode(q.projections, BarcodeMethod::Median);
    q.barcode_minmax = make_barcode(q.projections, BarcodeMethod::MinMax);
    q.lbp = lbp_histogram(preprocessed);
    return q;
}

std::vector<std::uint64_t> code_to_words(const std::vector<bool>& bits) {
    const auto bytes = pack_bits(bits);
    std::vector<std::uint64_t> words((bytes.size() + 7) / 8, 0);
    std::memcpy(words.data(), bytes.data(), bytes.size());
    return words;
}

Index::Index(std::vector<double> angles) : angles_(std::move(angles)) {
    if (angles_.empty()) throw std::invalid_argument("Index: empty angle list");
    for (std::size_t i = 1; i < angles_.size(); ++i)
        if (angles_[i] <= angles_[i - 1])
            throw std::invalid_argument("Index: angles must be strictly increasing");
}

namespace {

// entries persist as f32; quantize at insert so save/load is lossless
void quantize_projections(ProjectionSet& ps) {
    for (auto& p : ps.projections)
        for (auto& b : p.bins) b = static_cast<double>(static_cast<float>(b));
}

IndexEntry featurize(const BuildItem& item, const RetrievalConfig& cfg,
                     const PreprocessConfig& pcfg) {
    GrayImage raw = item.image ? *item.image : load_image(item.source_path);
    const GrayImage img = preprocess(raw, pcfg);
    IndexEntry e;
    e.image_id = item.image_id;
    e.source_path = item.source_path;
    e.projections = project_all(img, cfg.angles, item.image_id);
    quantize_projections(e.projections);
    e.barcode_median = make_barcode(e.projections, BarcodeMethod::Median);
    e.barcode_minmax = make_barcode(e.projections, BarcodeMethod::MinMax);
    e.lbp = lbp_histogram(img);
    e.irma_code = item.irma_code;
    return e;
}

}  // namespace

Index Index::build(const std::vector<BuildItem>& corpus, const RetrievalConfig& cfg,
                   const PreprocessConfig& pcfg, BuildSummary* summary) {
    cfg.validate();
    pcfg.validate();
    if (corpus.empty()) throw std::invalid_argument("build: empty corpus");

    std::vector<IndexEntry> built(corpus.size());
    std::vector<std::string> errors(corpus.size());
    std::vector<char> ok(corpus.size(), 0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(effective_threads())
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(corpus.size()); ++i) {
        try {
            built[i] = featurize(corpus[i], cfg, pcfg);
            ok[i] = 1;
        } catch (const std::exception& ex) {
            errors[i] = ex.what();
        }
    }

    Index idx(cfg.angles);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (ok[i]) {
            idx.add_entry(std::move(built[i]));
        } else if (summary) {
            summary->failures.emplace_back(corpus[i].image_id, errors[i]);
        }
    }
    if (summary) summary->succeeded = idx.size();
    if (idx.size() == 0) throw std::runtime_error("build: no image could be indexed");
    idx.finalize();
    return idx;
}

void Index::add_entry(IndexEntry entry) {
    if (entry.projections.projections.size() != angles_.size())
        throw std::invalid_argument("add_entry: projection count != index angle count");
    const int len = static_cast<int>(entry.projections.projections.front().bins.size());
    if (projection_length_ == 0) projection_length_ = len;
    for (const auto& p : entry.projections.projections)
        if (static_cast<int>(p.bins.size()) != projection_length_)
            throw std::invalid_argument("add_entry: projection length mismatch");
    entries_.push_back(std::move(entry));
    finalized_ = false;
}

void Index::finalize() {
    const std::size_t n = entries_.size();
    const std::size_t len = static_cast<std::size_t>(projection_length_);
    code_words_ = (len + 63) / 64;
    float_rows_.assign(angles_.size(), {});
    median_rows_.assign(angles_.size(), {});
    minmax_rows_.assign(angles_.size(), {});
    for (std::size_t a = 0; a < angles_.size(); ++a) {
        float_rows_[a].resize(n * len);
        median_rows_[a].resize(n * code_words_);
        minmax_rows_[a].resize(n * code_words_);
        for (std::size_t r = 0; r < n; ++r) {
            const auto& bins = entries_[r].projections.projections[a].bins;
            for (std::size_t i = 0; i < len; ++i)
                float_rows_[a][r * len + i] = static_cast<float>(bins[i]);
            const auto mw = code_to_words(entries_[r].barcode_median.codes[a]);
            const auto xw = code_to_words(entries_[r].barcode_minmax.codes[a]);
            std::copy(mw.begin(), mw.end(), median_rows_[a].begin() + r * code_words_);
            std::copy(xw.begin(), xw.end(), minmax_rows_[a].begin() + r * code_words_);
        }
    }
    finalized_ = true;
}

std::optional<std::size_t> Index::find_id(const std::string& image_id) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].image_id == image_id) return i;
    return std::nullopt;
}

int Index::angle_index(double angle_deg) const {
    for (std::size_t i = 0; i < angles_.size(); ++i)
        if (angles_[i] == angle_deg) return static_cast<int>(i);
    throw std::invalid_argument("unknown angle: " + std::to_string(angle_deg));
}

std::vector<ScoredEntry> Index::search_projection(const QueryFeatures& q, int angle_index, int k,
                                                  SearchMode mode, bool use_l2) const {
    if (!finalized_) throw std::logic_error("search_projection: index not finalized");
    if (angle_index < 0 || angle_index >= static_cast<int>(angles_.size()))
        throw std::invalid_argument("search_projection: angle index out of range");
    if (k < 1) throw std::invalid_argument("search_projection: k must be >= 1");
    const std::size_t n = entries_.size();
    const std::size_t len = static_cast<std::size_t>(projection_length_);

    std::vector<double> dist(n);
    if (mode == SearchMode::SpR) {
        const auto& bins = q.projections.projections.at(angle_index).bins;
        if (bins.size() != len)
            throw std::invalid_argument("search_projection: query length mismatch");
        std::vector<float> query(bins.begin(), bins.end());
        std::vector<float> out(n);
        if (use_l2)
            l2_scan_parallel(query, float_rows_[angle_index], n, len, out);
        else
            l1_scan_parallel(query, float_rows_[angle_index], n, len, out);
        for (std::size_t i = 0; i < n; ++i) dist[i] = out[i];
    } else {
        const auto& bc = mode == SearchMode::RbcMedian ? q.barcode_median : q.barcode_minmax;
        const auto& rows = mode == SearchMode::RbcMedian ? median_rows_ : minmax_rows_;
        const auto& code = bc.codes.at(angle_index);
        if (code.size() != len)
            throw std::invalid_argument("search_projection: query code length mismatch");
        const auto qwords = code_to_words(code);
        std::vector<std::uint32_t> out(n);
        hamming_scan_parallel(qwords, rows[angle_index], n, code_words_, out);
        for (std::size_t i = 0; i < n; ++i) dist[i] = out[i];
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return entries_[a].image_id < entries_[b].image_id;
    });

    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), n);
    std::vector<ScoredEntry> result;
    result.reserve(take);
    for (std::size_t i = 0; i < take; ++i)
        result.push_back({order[i], entries_[order[i]].image_id, dist[order[i]]});
    return result;
}

SelectionPool Index::assemble_pool(const QueryFeatures& q, const RetrievalConfig& cfg) const {
    cfg.validate();
    std::map<std::string, PoolCandidate> pool;
    for (int a = 0; a < static_cast<int>(angles_.size()); ++a) {
        const auto hits = search_projection(q, a, cfg.top_k_per_projection, cfg.mode, cfg.use_l2);
        for (std::size_t rank = 0; rank < hits.size(); ++rank) {
            auto& cand = pool[hits[rank].image_id];
            cand.entry_index = hits[rank].entry_index;
            cand.image_id = hits[rank].image_id;
            cand.contributing_angles.insert(a);
            auto [it, inserted] = cand.best_rank_per_angle.try_emplace(a, static_cast<int>(rank));
            if (!inserted) it->second = std::min(it->second, static_cast<int>(rank));
        }
    }
    SelectionPool out;
    out.candidates.reserve(pool.size());
    for (auto& [id, cand] : pool) out.candidates.push_back(std::move(cand));
    return out;
}

QueryResult Index::exploit_search(const SelectionPool& pool, const QueryFeatures& q,
                                  const RetrievalConfig& cfg) const {
    if (pool.candidates.empty()) throw std::invalid_argument("exploit_search: empty pool");
    const std::size_t m = pool.candidates.size();

    std::vector<double> radon_err(m, 0.0), lbp_err(m, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(effective_threads())
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
        const IndexEntry& e = entries_[pool.candidates[i].entry_index];
        double acc = 0.0;
        // refinement always compares float projections, also in barcode modes
        for (std::size_t a = 0; a < angles_.size(); ++a) {
            const auto& qp = q.projections.projections[a];
            const auto& ep = e.projections.projections[a];
            acc += cfg.shift_enabled ? shifted_distance(qp, ep, cfg.max_shift_fraction)
                                     : projection_l1(qp, ep);
        }
        radon_err[i] = acc;
        lbp_err[i] = lbp_distance(q.lbp, e.lbp);
    }

    auto minmax_norm = [m](std::vector<double>& v) {
        const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
        const double lo = *lo_it, span = *hi_it - *lo_it;
        for (std::size_t i = 0; i < m; ++i) v[i] = span > 0 ? (v[i] - lo) / span : 0.0;
    };
    minmax_norm(radon_err);
    minmax_norm(lbp_err);

    QueryResult result;
    result.pool = pool;
    result.ranked.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        RankedItem item;
        item.image_id = pool.candidates[i].image_id;
        item.radon_error_norm = radon_err[i];
        item.lbp_error_norm = lbp_err[i];
        item.fused_error = cfg.w_radon * radon_err[i] + cfg.w_lbp * lbp_err[i];
        result.ranked.push_back(std::move(item));
    }
    std::sort(result.ranked.begin(), result.ranked.end(), [](const auto& a, const auto& b) {
        if (a.fused_error != b.fused_error) return a.fused_error < b.fused_error;
        return a.image_id < b.image_id;
    });
    return result;
}

QueryResult Index::retrieve_features(const QueryFeatures& q, const RetrievalConfig& cfg) const {
    return exploit_search(assemble_pool(q, cfg), q, cfg);
}

QueryResult Index::retrieve(const GrayImage& query_image, const RetrievalConfig& cfg,
                            const PreprocessConfig& pcfg) const {
    const GrayImage img = preprocess(query_image, pcfg);
    return retrieve_features(compute_query_features(img, angles_), cfg);
}

}  // namespace rbcx
