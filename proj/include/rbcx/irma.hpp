#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rbcx {

/// 13-character hierarchical label: TTTT-DDD-AAA-BBB.
/// Alphanumeric plus '*' wildcard, stored without separators.
struct IrmaCode {
    std::array<std::string, 4> axes;  // lengths 4, 3, 3, 3

    std::string to_string() const;  // hyphenated form
    bool operator==(const IrmaCode&) const = default;
};

inline constexpr std::array<int, 4> kIrmaAxisLengths = {4, 3, 3, 3};

/// Per-axis, per-position branching factors of the code hierarchy.
struct BranchingScheme {
    std::array<std::vector<double>, 4> factors;

    /// Uniform fallback: every position branches 10 ways.
    static BranchingScheme uniform(double b = 10.0);
    static BranchingScheme load(const std::string& path);
};

IrmaCode parse_code(const std::string& text);

/// Hierarchical cascade error for one axis, normalized to [0, 1].
double axis_error(const std::string& truth, const std::string& predicted,
                  const std::vector<double>& branching);

/// Equal-weight mean of the four axis errors; in [0, 1].
double code_error(const IrmaCode& truth, const IrmaCode& predicted,
                  const BranchingScheme& scheme);

struct QueryError {
    std::string query_id;
    std::string retrieved_id;
    double error = 0.0;
};

struct ErrorReport {
    std::vector<QueryError> per_query;
    double e_total = 0.0;
    double n_zero_fraction = 0.0;
    std::size_t unlabeled_count = 0;  // excluded from e_total
};

struct EvalRecord {
    std::string query_id;
    std::string retrieved_id;
    IrmaCode truth;
    IrmaCode predicted;
};

ErrorReport evaluate_run(const std::vector<EvalRecord>& results, const BranchingScheme& scheme);

/// Ground-truth file: "image_id;irma_code" lines, '#' comments, UTF-8.
std::map<std::string, IrmaCode> load_codes_file(const std::string& path);

}  // namespace rbcx
