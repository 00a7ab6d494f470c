// rbcx: command-line driver for the retrieval engine
// subcommands: index, query, evaluate, sweep, ablate

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "rbcx/index.hpp"
#include "rbcx/index_io.hpp"
#include "rbcx/irma.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace rbcx;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool is_raster(const fs::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".pgm";
}

// sorted (id, path) pairs; id = filename stem
std::vector<std::pair<std::string, std::string>> list_images(const std::string& dir) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && is_raster(e.path()))
            out.emplace_back(e.path().stem().string(), e.path().string());
    std::sort(out.begin(), out.end());
    if (out.empty()) throw std::runtime_error("no PNG/PGM images in " + dir);
    return out;
}

BranchingScheme load_scheme_or_uniform(const std::string& path) {
    return path.empty() ? BranchingScheme::uniform() : BranchingScheme::load(path);
}

struct EvalOutcome {
    ErrorReport report;
    double mean_query_ms = 0.0;
    std::size_t pool_min = 0, pool_max = 0;
    double pool_mean = 0.0;
};

// runs every labeled query through the full pipeline and scores rank-1 answers
EvalOutcome run_evaluation(const Index& idx, const std::string& queries_dir,
                           const std::map<std::string, IrmaCode>& codes,
                           const BranchingScheme& scheme, const RetrievalConfig& cfg,
                           const PreprocessConfig& pcfg, std::ostream* per_query_csv) {
    EvalOutcome out;
    std::vector<EvalRecord> records;
    double total_ms = 0.0;
    std::size_t pool_sum = 0, runs = 0;
    out.pool_min = SIZE_MAX;

    for (const auto& [id, path] : list_images(queries_dir)) {
        auto truth = codes.find(id);
        if (truth == codes.end()) {
            ++out.report.unlabeled_count;
            continue;
        }
        const auto t0 = Clock::now();
        const auto result = idx.retrieve(load_image(path), cfg, pcfg);
        total_ms += ms_since(t0);
        ++runs;
        const std::size_t pool = result.pool.candidates.size();
        pool_sum += pool;
        out.pool_min = std::min(out.pool_min, pool);
        out.pool_max = std::max(out.pool_max, pool);

        const std::string& hit = result.ranked.front().image_id;
        auto pred = idx.entry(*idx.find_id(hit)).irma_code;
        if (!pred) {
            ++out.report.unlabeled_count;
            continue;
        }
        records.push_back({id, hit, truth->second, *pred});
    }
    if (records.empty()) throw std::runtime_error("no labeled query could be evaluated");

    auto rep = evaluate_run(records, scheme);
    rep.unlabeled_count = out.report.unlabeled_count;
    out.report = std::move(rep);
    out.mean_query_ms = runs ? total_ms / static_cast<double>(runs) : 0.0;
    out.pool_mean = runs ? static_cast<double>(pool_sum) / static_cast<double>(runs) : 0.0;
    if (out.pool_min == SIZE_MAX) out.pool_min = 0;

    if (per_query_csv) {
        *per_query_csv << "query_id,retrieved_id,error\n";
        for (const auto& q : out.report.per_query)
            *per_query_csv << q.query_id << "," << q.retrieved_id << "," << q.error << "\n";
    }
    return out;
}

std::vector<BuildItem> corpus_from_dir(const std::string& dir,
                                       const std::map<std::string, IrmaCode>& codes) {
    std::vector<BuildItem> corpus;
    for (const auto& [id, path] : list_images(dir)) {
        BuildItem item;
        item.image_id = id;
        item.source_path = path;
        if (auto it = codes.find(id); it != codes.end()) item.irma_code = it->second;
        corpus.push_back(std::move(item));
    }
    return corpus;
}

int cmd_index(const std::string& images_dir, const std::string& codes_path,
              const std::string& out_path, const std::vector<double>& angles, int side) {
    std::map<std::string, IrmaCode> codes;
    if (!codes_path.empty()) codes = load_codes_file(codes_path);

    RetrievalConfig cfg;
    if (!angles.empty()) cfg.angles = angles;
    PreprocessConfig pcfg;
    pcfg.target_side = side;

    BuildSummary summary;
    const auto t0 = Clock::now();
    auto idx = Index::build(corpus_from_dir(images_dir, codes), cfg, pcfg, &summary);
    save_index(idx, out_path);

    std::cout << "indexed " << summary.succeeded << " images ("
              << summary.failures.size() << " failed) in " << ms_since(t0) / 1000.0
              << " s -> " << out_path << "\n";
    for (const auto& [id, why] : summary.failures)
        std::cerr << "skipped " << id << ": " << why << "\n";
    return 0;
}

int cmd_query(const std::string& index_path, const std::string& image_path,
              const std::string& mode, int k, int top) {
    auto idx = load_index(index_path);
    RetrievalConfig cfg;
    cfg.mode = parse_mode(mode);
    cfg.top_k_per_projection = k;
    cfg.angles = idx.angles();
    PreprocessConfig pcfg;
    pcfg.target_side = idx.projection_length();

    const auto t_load = Clock::now();
    auto img = load_image(image_path);
    const double load_ms = ms_since(t_load);
    const auto t_q = Clock::now();
    auto result = idx.retrieve(img, cfg, pcfg);
    const double query_ms = ms_since(t_q);

    json line;
    line["query_id"] = fs::path(image_path).stem().string();
    line["mode"] = mode;
    line["pool_size"] = result.pool.candidates.size();
    json ranked = json::array();
    const std::size_t n = std::min<std::size_t>(result.ranked.size(), static_cast<std::size_t>(top));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = result.ranked[i];
        ranked.push_back({{"image_id", r.image_id},
                          {"fused_error", r.fused_error},
                          {"radon_error_norm", r.radon_error_norm},
                          {"lbp_error_norm", r.lbp_error_norm}});
    }
    line["ranked"] = std::move(ranked);
    std::cout << line.dump() << "\n";
    // timings are kept out of the data stream so runs stay byte-identical
    std::cerr << json{{"load_ms", load_ms}, {"query_ms", query_ms}}.dump() << "\n";
    return 0;
}

int cmd_evaluate(const std::string& index_path, const std::string& queries_dir,
                 const std::string& codes_path, const std::string& scheme_path,
                 const std::string& mode, int k, const std::string& csv_path) {
    auto idx = load_index(index_path);
    RetrievalConfig cfg;
    cfg.mode = parse_mode(mode);
    cfg.top_k_per_projection = k;
    cfg.angles = idx.angles();
    PreprocessConfig pcfg;
    pcfg.target_side = idx.projection_length();

    const auto codes = load_codes_file(codes_path);
    const auto scheme = load_scheme_or_uniform(scheme_path);

    std::ofstream csv;
    if (!csv_path.empty()) {
        csv.open(csv_path);
        if (!csv) throw std::runtime_error("cannot write " + csv_path);
    }
    auto out = run_evaluation(idx, queries_dir, codes, scheme, cfg, pcfg,
                              csv.is_open() ? &csv : nullptr);
    std::cout << "mode=" << mode << " k=" << k << " queries=" << out.report.per_query.size()
              << " e_total=" << out.report.e_total
              << " n_zero=" << out.report.n_zero_fraction * 100.0 << "%"
              << " unlabeled=" << out.report.unlabeled_count << "\n";
    std::cerr << "mean_query_ms=" << out.mean_query_ms << "\n";
    return 0;
}

std::pair<int, int> parse_k_range(const std::string& spec) {
    const auto dots = spec.find("..");
    if (dots == std::string::npos) {
        const int k = std::stoi(spec);
        return {k, k};
    }
    return {std::stoi(spec.substr(0, dots)), std::stoi(spec.substr(dots + 2))};
}

int cmd_sweep(const std::string& index_path, const std::string& queries_dir,
              const std::string& codes_path, const std::string& scheme_path,
              const std::string& k_spec, const std::string& modes_spec,
              const std::string& out_path, bool per_angle) {
    auto idx = load_index(index_path);
    const auto codes = load_codes_file(codes_path);
    const auto scheme = load_scheme_or_uniform(scheme_path);
    PreprocessConfig pcfg;
    pcfg.target_side = idx.projection_length();

    std::vector<SearchMode> modes;
    if (modes_spec == "all")
        modes = {SearchMode::SpR, SearchMode::RbcMedian, SearchMode::RbcMinMax};
    else
        modes = {parse_mode(modes_spec)};
    const auto [k_lo, k_hi] = parse_k_range(k_spec);
    if (k_lo < 1 || k_hi < k_lo) throw std::runtime_error("bad k range: " + k_spec);

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw std::runtime_error("cannot write " + out_path);
        out = &file;
    }
    *out << "row,mode,k,e_total,n_zero_pct,mean_query_ms,pool_min,pool_mean,pool_max\n";

    for (auto mode : modes) {
        for (int k = k_lo; k <= k_hi; ++k) {
            RetrievalConfig cfg;
            cfg.mode = mode;
            cfg.top_k_per_projection = k;
            cfg.angles = idx.angles();
            auto r = run_evaluation(idx, queries_dir, codes, scheme, cfg, pcfg, nullptr);
            *out << "pool," << mode_name(mode) << "," << k << "," << r.report.e_total << ","
                 << r.report.n_zero_fraction * 100.0 << "," << r.mean_query_ms << ","
                 << r.pool_min << "," << r.pool_mean << "," << r.pool_max << "\n";
        }
    }

    if (per_angle) {
        // first-hit error of each projection on its own, no pool or refinement
        for (auto mode : modes) {
            for (std::size_t a = 0; a < idx.angles().size(); ++a) {
                std::vector<EvalRecord> records;
                double total_ms = 0.0;
                std::size_t runs = 0;
                for (const auto& [id, path] : list_images(queries_dir)) {
                    auto truth = codes.find(id);
                    if (truth == codes.end()) continue;
                    const auto t0 = Clock::now();
                    auto img = preprocess(load_image(path), pcfg);
                    auto q = compute_query_features(img, idx.angles());
                    auto hits = idx.search_projection(q, static_cast<int>(a), 1, mode);
                    total_ms += ms_since(t0);
                    ++runs;
                    auto pred = idx.entry(hits.front().entry_index).irma_code;
                    if (!pred) continue;
                    records.push_back({id, hits.front().image_id, truth->second, *pred});
                }
                if (records.empty()) continue;
                auto rep = evaluate_run(records, scheme);
                *out << "angle-" << idx.angles()[a] << "," << mode_name(mode) << ",1,"
                     << rep.e_total << "," << rep.n_zero_fraction * 100.0 << ","
                     << total_ms / static_cast<double>(runs) << ",1,1,1\n";
            }
        }
    }
    return 0;
}

int cmd_ablate(const std::string& images_dir, const std::string& queries_dir,
               const std::string& codes_path, const std::string& scheme_path,
               const std::string& mode, int k, int side, const std::string& out_path) {
    const auto codes = load_codes_file(codes_path);
    const auto scheme = load_scheme_or_uniform(scheme_path);
    RetrievalConfig cfg;
    cfg.mode = parse_mode(mode);
    cfg.top_k_per_projection = k;

    struct Row {
        std::string name;
        bool pad, landmarks, circle;
    };
    const std::vector<Row> rows = {
        {"none", false, false, false},
        {"pad", true, false, false},
        {"pad+circle", true, false, true},
        {"pad+landmarks", true, true, false},
        {"all", true, true, true},
    };

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw std::runtime_error("cannot write " + out_path);
        out = &file;
    }
    *out << "preprocessing,mode,k,e_total,n_zero_pct\n";
    for (const auto& row : rows) {
        PreprocessConfig pcfg;
        pcfg.target_side = side;
        pcfg.square_pad_enabled = row.pad;
        pcfg.landmark_removal_enabled = row.landmarks;
        pcfg.circle_enabled = row.circle;
        BuildSummary summary;
        auto idx = Index::build(corpus_from_dir(images_dir, codes), cfg, pcfg, &summary);
        auto r = run_evaluation(idx, queries_dir, codes, scheme, cfg, pcfg, nullptr);
        *out << row.name << "," << mode << "," << k << "," << r.report.e_total << ","
             << r.report.n_zero_fraction * 100.0 << "\n";
        std::cerr << "ablation '" << row.name << "': " << summary.succeeded << " indexed, "
                  << summary.failures.size() << " failed\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-projection Radon barcode image retrieval"};
    app.require_subcommand(1);

    // index
    auto* sc_index = app.add_subcommand("index", "build and save an index");
    std::string images_dir, codes_path, out_path, scheme_path;
    std::vector<double> angles;
    int side = 64;
    sc_index->add_option("--images", images_dir, "image directory")->required();
    sc_index->add_option("--codes", codes_path, "ground-truth codes file");
    sc_index->add_option("--out", out_path, "output index path")->required();
    sc_index->add_option("--angles", angles, "projection angles in degrees");
    sc_index->add_option("--side", side, "preprocessed image side");

    // query
    auto* sc_query = app.add_subcommand("query", "query an index with one image");
    std::string index_path, image_path, mode = "sp-r";
    int k = 14, top = 10;
    sc_query->add_option("--index", index_path, "index file")->required();
    sc_query->add_option("--image", image_path, "query image")->required();
    sc_query->add_option("--mode", mode, "sp-r | rbc-median | rbc-minmax");
    sc_query->add_option("--k", k, "top-k per projection");
    sc_query->add_option("--top", top, "ranked results to print");

    // evaluate
    auto* sc_eval = app.add_subcommand("evaluate", "score rank-1 answers for a query set");
    std::string queries_dir, csv_path;
    sc_eval->add_option("--index", index_path, "index file")->required();
    sc_eval->add_option("--queries", queries_dir, "query image directory")->required();
    sc_eval->add_option("--codes", codes_path, "ground-truth codes file")->required();
    sc_eval->add_option("--scheme", scheme_path, "branching scheme file");
    sc_eval->add_option("--mode", mode, "sp-r | rbc-median | rbc-minmax");
    sc_eval->add_option("--k", k, "top-k per projection");
    sc_eval->add_option("--out-csv", csv_path, "per-query CSV path");

    // sweep
    auto* sc_sweep = app.add_subcommand("sweep", "error-vs-k benchmark table");
    std::string k_spec = "1..20", modes_spec = "all";
    bool per_angle = false;
    sc_sweep->add_option("--index", index_path, "index file")->required();
    sc_sweep->add_option("--queries", queries_dir, "query image directory")->required();
    sc_sweep->add_option("--codes", codes_path, "ground-truth codes file")->required();
    sc_sweep->add_option("--scheme", scheme_path, "branching scheme file");
    sc_sweep->add_option("--k", k_spec, "k or k range, e.g. 1..20");
    sc_sweep->add_option("--modes", modes_spec, "all or one mode");
    sc_sweep->add_option("--out", out_path, "CSV output path (default stdout)");
    sc_sweep->add_flag("--per-angle", per_angle, "add single-projection first-hit rows");

    // ablate
    auto* sc_ablate = app.add_subcommand("ablate", "preprocessing ablation table");
    sc_ablate->add_option("--images", images_dir, "corpus image directory")->required();
    sc_ablate->add_option("--queries", queries_dir, "query image directory")->required();
    sc_ablate->add_option("--codes", codes_path, "ground-truth codes file")->required();
    sc_ablate->add_option("--scheme", scheme_path, "branching scheme file");
    sc_ablate->add_option("--mode", mode, "sp-r | rbc-median | rbc-minmax");
    sc_ablate->add_option("--k", k, "top-k per projection");
    sc_ablate->add_option("--side", side, "preprocessed image side");
    sc_ablate->add_option("--out", out_path, "CSV output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sc_index->parsed())
            return cmd_index(images_dir, codes_path, out_path, angles, side);
        if (sc_query->parsed()) return cmd_query(index_path, image_path, mode, k, top);
        if (sc_eval->parsed())
            return cmd_evaluate(index_path, queries_dir, codes_path, scheme_path, mode, k,
                                csv_path);
        if (sc_sweep->parsed())
            return cmd_sweep(index_path, queries_dir, codes_path, scheme_path, k_spec,
                             modes_spec, out_path, per_angle);
        if (sc_ablate->parsed())
            return cmd_ablate(images_dir, queries_dir, codes_path, scheme_path, mode, k, side,
                              out_path);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 2;
}
