#include "rbcx/index_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rbcx {

namespace {

static_assert(std::endian::native == std::endian::little,
              "index format is little-endian; big-endian hosts need byte swapping");

constexpr char kMagic[4] = {'R', 'B', 'C', 'X'};
constexpr std::uint16_t kVersion = 1;

struct Writer {
    std::ofstream out;
    explicit Writer(const std::string& path) : out(path, std::ios::binary) {
        if (!out) throw std::runtime_error("cannot write index file: " + path);
    }
    template <typename T>
    void pod(T v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void bytes(const void* p, std::size_t n) {
        out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    }
    void str(const std::string& s) {
        pod(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
};

struct Reader {
    std::vector<char> buf;
    std::size_t pos = 0;
    std::string path;

    explicit Reader(const std::string& p) : path(p) {
        std::ifstream in(p, std::ios::binary | std::ios::ate);
        if (!in) throw std::runtime_error("cannot open index file: " + p);
        const auto size = in.tellg();
        in.seekg(0);
        buf.resize(static_cast<std::size_t>(size));
        in.read(buf.data(), size);
        if (!in) throw std::runtime_error("cannot read index file: " + p);
    }
    void need(std::size_t n) const {
        if (pos + n > buf.size())
            throw std::runtime_error("truncated index file: " + path);
    }
    template <typename T>
    T pod() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, buf.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }
    void bytes(void* p, std::size_t n) {
        need(n);
        std::memcpy(p, buf.data() + pos, n);
        pos += n;
    }
    std::string str() {
        const auto n = pod<std::uint32_t>();
        need(n);
        std::string s(buf.data() + pos, n);
        pos += n;
        return s;
    }
};

void write_barcode(Writer& w, const RadonBarcode& bc) {
    w.pod(static_cast<std::uint16_t>(bc.codes.size()));
    w.pod(static_cast<std::uint32_t>(bc.codes.empty() ? 0 : bc.codes.front().size()));
    for (const auto& code : bc.codes) {
        const auto packed = pack_bits(code);
        w.bytes(packed.data(), packed.size());
    }
}

RadonBarcode read_barcode(Reader& r, BarcodeMethod method, const std::string& image_id) {
    RadonBarcode bc;
    bc.image_id = image_id;
    bc.method = method;
    const auto angle_count = r.pod<std::uint16_t>();
    const auto code_len = r.pod<std::uint32_t>();
    const std::size_t packed_len = (code_len + 7) / 8;
    bc.codes.reserve(angle_count);
    for (std::uint16_t a = 0; a < angle_count; ++a) {
        std::vector<std::uint8_t> packed(packed_len);
        r.bytes(packed.data(), packed_len);
        bc.codes.push_back(unpack_bits(packed, code_len));
    }
    return bc;
}

}  // namespace

void save_index(const Index& idx, const std::string& path) {
    Writer w(path);
    w.bytes(kMagic, 4);
    w.pod(kVersion);
    w.pod(static_cast<std::uint16_t>(idx.angles().size()));
    w.pod(static_cast<std::uint32_t>(idx.projection_length()));
    w.pod(static_cast<std::uint32_t>(kLbpBins));
    w.pod(static_cast<std::uint64_t>(idx.size()));
    w.pod(static_cast<std::uint32_t>(0));  // mode flags, reserved
    for (double a : idx.angles()) w.pod(a);

    for (const auto& e : idx.entries()) {
        w.str(e.image_id);
        w.str(e.source_path);
        w.pod(static_cast<std::uint8_t>(e.irma_code.has_value()));
        if (e.irma_code) {
            const std::string flat =
                e.irma_code->axes[0] + e.irma_code->axes[1] + e.irma_code->axes[2] +
                e.irma_code->axes[3];
            w.bytes(flat.data(), 13);
        }
        for (const auto& p : e.projections.projections)
            for (double b : p.bins) w.pod(static_cast<float>(b));
        write_barcode(w, e.barcode_median);
        write_barcode(w, e.barcode_minmax);
        for (double b : e.lbp.bins) w.pod(b);
    }
    w.out.flush();
    if (!w.out) throw std::runtime_error("write failed: " + path);
}

Index load_index(const std::string& path) {
    Reader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not an index file (bad magic): " + path);
    const auto version = r.pod<std::uint16_t>();
    if (version != kVersion)
        throw std::runtime_error("unsupported index version " + std::to_string(version) + ": " +
                                 path);
    const auto angle_count = r.pod<std::uint16_t>();
    const auto proj_len = r.pod<std::uint32_t>();
    const auto lbp_bins = r.pod<std::uint32_t>();
    const auto entry_count = r.pod<std::uint64_t>();
    r.pod<std::uint32_t>();  // mode flags
    if (angle_count == 0) throw std::runtime_error("index file has no angles: " + path);

    std::vector<double> angles(angle_count);
    for (auto& a : angles) a = r.pod<double>();

    Index idx(angles);
    for (std::uint64_t i = 0; i < entry_count; ++i) {
        IndexEntry e;
        e.image_id = r.str();
        e.source_path = r.str();
        if (r.pod<std::uint8_t>()) {
            char flat[14] = {};
            r.bytes(flat, 13);
            e.irma_code = parse_code(std::string(flat, 13));
        }
        e.projections.image_id = e.image_id;
        for (std::uint16_t a = 0; a < angle_count; ++a) {
            RadonProjection p;
            p.angle_deg = angles[a];
            p.bins.resize(proj_len);
            for (auto& b : p.bins) b = static_cast<double>(r.pod<float>());
            e.projections.projections.push_back(std::move(p));
        }
        e.barcode_median = read_barcode(r, BarcodeMethod::Median, e.image_id);
        e.barcode_minmax = read_barcode(r, BarcodeMethod::MinMax, e.image_id);
        e.lbp.bins.resize(lbp_bins);
        for (auto& b : e.lbp.bins) b = r.pod<double>();
        idx.add_entry(std::move(e));
    }
    if (idx.size() != entry_count)
        throw std::runtime_error("index file entry count mismatch: " + path);
    idx.finalize();
    return idx;
}

}  // namespace rbcx
