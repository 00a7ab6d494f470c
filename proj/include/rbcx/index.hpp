#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rbcx/image.hpp"
#include "rbcx/irma.hpp"
#include "rbcx/lbp.hpp"
#include "rbcx/preprocess.hpp"
#include "rbcx/radon.hpp"

namespace rbcx {

enum class SearchMode { SpR, RbcMedian, RbcMinMax };

SearchMode parse_mode(const std::string& name);      // "sp-r" | "rbc-median" | "rbc-minmax"
std::string mode_name(SearchMode mode);

struct RetrievalConfig {
    SearchMode mode = SearchMode::SpR;
    int top_k_per_projection = 14;
    std::vector<double> angles = default_angles();
    double max_shift_fraction = 0.10;
    double w_radon = 1.0;
    double w_lbp = 1.0;
    bool shift_enabled = true;  // exploitation falls back to zero-shift L1 when off
    bool use_l2 = false;        // float-mode projection distance

    void validate() const;
};

/// All features of one indexed image, derived from the same preprocessed raster.
struct IndexEntry {
    std::string image_id;
    std::string source_path;
    ProjectionSet projections;  // bins quantized to f32-representable values
    RadonBarcode barcode_median;
    RadonBarcode barcode_minmax;
    LbpHistogram lbp;
    std::optional<IrmaCode> irma_code;
};

struct QueryFeatures {
    ProjectionSet projections;
    RadonBarcode barcode_median;
    RadonBarcode barcode_minmax;
    LbpHistogram lbp;
};

QueryFeatures compute_query_features(const GrayImage& preprocessed,
                                     const std::vector<double>& angles);

struct ScoredEntry {
    std::size_t entry_index = 0;
    std::string image_id;
    double distance = 0.0;
};

struct PoolCandidate {
    std::size_t entry_index = 0;
    std::string image_id;
    std::set<int> contributing_angles;        // angle indices
    std::map<int, int> best_rank_per_angle;   // angle index -> 0-based rank
};

struct SelectionPool {
    std::vector<PoolCandidate> candidates;  // ordered by image_id
};

struct RankedItem {
    std::string image_id;
    double fused_error = 0.0;
    double radon_error_norm = 0.0;
    double lbp_error_norm = 0.0;
};

struct QueryResult {
    std::vector<RankedItem> ranked;
    SelectionPool pool;
};

struct BuildItem {
    std::string image_id;
    std::string source_path;               // loaded when image is absent
    std::optional<GrayImage> image;
    std::optional<IrmaCode> irma_code;
};

struct BuildSummary {
    std::size_t succeeded = 0;
    std::vector<std::pair<std::string, std::string>> failures;  // (id, reason)
};

class Index {
public:
    explicit Index(std::vector<double> angles = default_angles());

    /// Preprocesses and featurizes every item; failures are recorded in the
    /// summary and skipped. Throws if nothing survives.
    static Index build(const std::vector<BuildItem>& corpus, const RetrievalConfig& cfg,
                       const PreprocessConfig& pcfg, BuildSummary* summary = nullptr);

    void add_entry(IndexEntry entry);
    void finalize();  // builds the flat scan buffers; called by build/load

    const std::vector<double>& angles() const { return angles_; }
    int projection_length() const { return projection_length_; }
    std::size_t size() const { return entries_.size(); }
    const std::vector<IndexEntry>& entries() const { return entries_; }
    const IndexEntry& entry(std::size_t i) const { return entries_.at(i); }
    std::optional<std::size_t> find_id(const std::string& image_id) const;

    /// Single-angle top-k linear scan; ties broken by ascending image_id.
    std::vector<ScoredEntry> search_projection(const QueryFeatures& q, int angle_index, int k,
                                               SearchMode mode, bool use_l2 = false) const;

    SelectionPool assemble_pool(const QueryFeatures& q, const RetrievalConfig& cfg) const;

    QueryResult exploit_search(const SelectionPool& pool, const QueryFeatures& q,
                               const RetrievalConfig& cfg) const;

    QueryResult retrieve(const GrayImage& query_image, const RetrievalConfig& cfg,
                         const PreprocessConfig& pcfg) const;
    QueryResult retrieve_features(const QueryFeatures& q, const RetrievalConfig& cfg) const;

    int angle_index(double angle_deg) const;  // throws on unknown angle

private:
    std::vector<double> angles_;
    int projection_length_ = 0;
    bool finalized_ = false;
    std::vector<IndexEntry> entries_;

    // flat per-angle buffers for the scan kernels
    std::size_t code_words_ = 0;
    std::vector<std::vector<float>> float_rows_;           // [angle][entry * len]
    std::vector<std::vector<std::uint64_t>> median_rows_;  // [angle][entry * words]
    std::vector<std::vector<std::uint64_t>> minmax_rows_;
};

/// MSB-first packed code -> little-endian words for the popcount kernels.
std::vector<std::uint64_t> code_to_words(const std::vector<bool>& bits);

}  // namespace rbcx
