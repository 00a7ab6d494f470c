#include "rbcx/irma.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rbcx {

namespace {

bool legal_char(char c) {
    return c == '*' || std::isalnum(static_cast<unsigned char>(c));
}

void check_axis(const std::string& axis, std::size_t offset) {
    for (std::size_t i = 0; i < axis.size(); ++i)
        if (!legal_char(axis[i]))
            throw std::invalid_argument("irma code: illegal character at position " +
                                        std::to_string(offset + i));
}

}  // namespace

std::string IrmaCode::to_string() const {
    return axes[0] + "-" + axes[1] + "-" + axes[2] + "-" + axes[3];
}

BranchingScheme BranchingScheme::uniform(double b) {
    BranchingScheme s;
    for (int a = 0; a < 4; ++a) s.factors[a].assign(kIrmaAxisLengths[a], b);
    return s;
}

BranchingScheme BranchingScheme::load(const std::string& path) {
    // one line per axis: "<axis-name>: b1 b2 ..." with '#' comments
    static const std::array<std::string, 4> names = {"technical", "directional", "anatomical",
                                                     "biological"};
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scheme file: " + path);
    BranchingScheme s;
    std::array<bool, 4> seen{};
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (!key.empty() && key.back() == ':') key.pop_back();
        int axis = -1;
        for (int a = 0; a < 4; ++a)
            if (key == names[a]) axis = a;
        if (axis < 0) throw std::runtime_error("scheme file: unknown axis '" + key + "'");
        double b;
        while (ls >> b) {
            if (b < 1) throw std::runtime_error("scheme file: branching factor < 1");
            s.factors[axis].push_back(b);
        }
        if (static_cast<int>(s.factors[axis].size()) != kIrmaAxisLengths[axis])
            throw std::runtime_error("scheme file: axis '" + key + "' needs " +
                                     std::to_string(kIrmaAxisLengths[axis]) + " factors");
        seen[axis] = true;
    }
    for (int a = 0; a < 4; ++a)
        if (!seen[a]) throw std::runtime_error("scheme file: missing axis '" + names[a] + "'");
    return s;
}

IrmaCode parse_code(const std::string& text) {
    IrmaCode code;
    if (text.find('-') != std::string::npos) {
        std::array<std::string, 4> groups;
        std::size_t start = 0, g = 0;
        for (std::size_t i = 0; i <= text.size(); ++i) {
            if (i == text.size() || text[i] == '-') {
                if (g >= 4)
                    throw std::invalid_argument("irma code: too many groups at position " +
                                                std::to_string(i));
                groups[g++] = text.substr(start, i - start);
                start = i + 1;
            }
        }
        if (g != 4) throw std::invalid_argument("irma code: expected 4 groups, got " +
                                                std::to_string(g));
        std::size_t off = 0;
        for (int a = 0; a < 4; ++a) {
            if (static_cast<int>(groups[a].size()) != kIrmaAxisLengths[a])
                throw std::invalid_argument("irma code: group " + std::to_string(a + 1) +
                                            " has wrong length at position " +
                                            std::to_string(off));
            check_axis(groups[a], off);
            code.axes[a] = groups[a];
            off += groups[a].size() + 1;
        }
    } else {
        if (text.size() != 13)
            throw std::invalid_argument("irma code: expected 13 characters, got " +
                                        std::to_string(text.size()));
        std::size_t off = 0;
        for (int a = 0; a < 4; ++a) {
            code.axes[a] = text.substr(off, kIrmaAxisLengths[a]);
            check_axis(code.axes[a], off);
            off += kIrmaAxisLengths[a];
        }
    }
    return code;
}

double axis_error(const std::string& truth, const std::string& predicted,
                  const std::vector<double>& branching) {
    if (truth.size() != predicted.size() || truth.size() != branching.size())
        throw std::invalid_argument("axis_error: length mismatch");
    for (double b : branching)
        if (b < 1) throw std::invalid_argument("axis_error: branching factor < 1");

    double raw = 0.0, max_raw = 0.0;
    bool cascaded = false;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double w = (1.0 / branching[i]) * (1.0 / static_cast<double>(i + 1));
        max_raw += w;
        double delta;
        if (cascaded) {
            delta = 1.0;
        } else if (truth[i] == '*' || predicted[i] == truth[i]) {
            delta = 0.0;
        } else if (predicted[i] == '*') {
            delta = 0.5;
        } else {
            delta = 1.0;
            cascaded = true;  // a hard mismatch poisons all later positions
        }
        raw += w * delta;
    }
    return max_raw > 0 ? raw / max_raw : 0.0;
}

double code_error(const IrmaCode& truth, const IrmaCode& predicted,
                  const BranchingScheme& scheme) {
    double acc = 0.0;
    for (int a = 0; a < 4; ++a)
        acc += axis_error(truth.axes[a], predicted.axes[a], scheme.factors[a]);
    return acc / 4.0;
}

ErrorReport evaluate_run(const std::vector<EvalRecord>& results, const BranchingScheme& scheme) {
    if (results.empty()) throw std::invalid_argument("evaluate_run: empty result list");
    ErrorReport report;
    std::size_t zero = 0;
    for (const auto& r : results) {
        const double e = code_error(r.truth, r.predicted, scheme);
        report.per_query.push_back({r.query_id, r.retrieved_id, e});
        report.e_total += e;
        if (e == 0.0) ++zero;
    }
    report.n_zero_fraction = static_cast<double>(zero) / results.size();
    return report;
}

std::map<std::string, IrmaCode> load_codes_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open codes file: " + path);
    std::map<std::string, IrmaCode> codes;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        const auto b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t");
        line = line.substr(b, e - b + 1);
        const auto sep = line.find(';');
        if (sep == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'image_id;irma_code'");
        const std::string id = line.substr(0, sep);
        const std::string code = line.substr(sep + 1);
        try {
            codes[id] = parse_code(code);
        } catch (const std::exception& ex) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + ex.what());
        }
    }
    return codes;
}

}  // namespace rbcx
