#include "microadam/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace microadam {

namespace {

constexpr char kMagic[4] = {'M', 'A', 'D', 'M'};
constexpr uint8_t kVersion = 1;

void put_u8(std::ostream& os, uint8_t v) { os.put(static_cast<char>(v)); }

void put_u64(std::ostream& os, uint64_t v) {
    for (int i = 0; i < 8; ++i) os.put(static_cast<char>(v >> (8 * i) & 0xff));
}

void put_i64(std::ostream& os, int64_t v) { put_u64(os, static_cast<uint64_t>(v)); }

void put_f64(std::ostream& os, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(os, bits);
}

uint8_t get_u8(std::istream& is) {
    int c = is.get();
    if (c == EOF) throw std::runtime_error("checkpoint: truncated file");
    return static_cast<uint8_t>(c);
}

uint64_t get_u64(std::istream& is) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(get_u8(is)) << (8 * i);
    return v;
}

int64_t get_i64(std::istream& is) { return static_cast<int64_t>(get_u64(is)); }

double get_f64(std::istream& is) {
    uint64_t bits = get_u64(is);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const MicroAdamOptimizer& opt) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    os.write(kMagic, 4);
    put_u8(os, kVersion);
    put_u8(os, opt.lossless() ? 1 : 0);
    const GradientWindow& w = opt.window();
    put_i64(os, w.dim);
    put_i64(os, w.step);
    for (double x : opt.params()) put_f64(os, x);
    put_i64(os, w.capacity);
    put_i64(os, w.row_width);
    put_i64(os, w.head);
    put_i64(os, w.filled);
    for (int64_t r = 0; r < w.filled; ++r) {
        const GradientWindow::Row& row = w.rows[static_cast<size_t>(r)];
        put_i64(os, row.stamp);
        for (int64_t idx : row.indices) put_i64(os, idx);
        for (double v : row.values) put_f64(os, v);
    }
    if (opt.lossless()) {
        for (double x : opt.error_vector()) put_f64(os, x);
    } else {
        const QuantizedErrorBuffer& e = opt.error_buffer();
        put_u8(os, static_cast<uint8_t>(e.bits));
        put_i64(os, e.bucket);
        put_i64(os, e.num_buckets());
        for (const QuantParams& p : e.params) {
            put_f64(os, p.lo);
            put_f64(os, p.hi);
        }
        put_i64(os, static_cast<int64_t>(e.codes.size()));
        os.write(reinterpret_cast<const char*>(e.codes.data()),
                 static_cast<std::streamsize>(e.codes.size()));
    }
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (is.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    uint8_t version = get_u8(is);
    if (version != kVersion) throw std::runtime_error("checkpoint: unsupported version");
    Checkpoint cp;
    cp.lossless = get_u8(is) != 0;
    cp.dim = get_i64(is);
    cp.step = get_i64(is);
    if (cp.dim < 1 || cp.dim > (1ll << 32)) throw std::runtime_error("checkpoint: bad dimension");
    cp.theta.resize(static_cast<size_t>(cp.dim));
    for (double& x : cp.theta) x = get_f64(is);
    cp.capacity = get_i64(is);
    cp.row_width = get_i64(is);
    cp.head = get_i64(is);
    cp.filled = get_i64(is);
    if (cp.capacity < 1 || cp.row_width < 1 || cp.filled < 0 || cp.filled > cp.capacity)
        throw std::runtime_error("checkpoint: bad window header");
    cp.rows.resize(static_cast<size_t>(cp.filled));
    for (auto& row : cp.rows) {
        row.stamp = get_i64(is);
        row.indices.resize(static_cast<size_t>(cp.row_width));
        row.values.resize(static_cast<size_t>(cp.row_width));
        for (int64_t& idx : row.indices) idx = get_i64(is);
        for (double& v : row.values) v = get_f64(is);
    }
    if (cp.lossless) {
        cp.error_dense.resize(static_cast<size_t>(cp.dim));
        for (double& x : cp.error_dense) x = get_f64(is);
    } else {
        int bits = get_u8(is);
        int64_t bucket = get_i64(is);
        int64_t nbuckets = get_i64(is);
        cp.error = QuantizedErrorBuffer::zeros(cp.dim, bits, bucket);
        if (nbuckets != cp.error.num_buckets())
            throw std::runtime_error("checkpoint: bucket count mismatch");
        for (QuantParams& p : cp.error.params) {
            double lo = get_f64(is);
            double hi = get_f64(is);
            p = QuantParams(lo, hi, bits);
        }
        int64_t nbytes = get_i64(is);
        if (nbytes != static_cast<int64_t>(cp.error.codes.size()))
            throw std::runtime_error("checkpoint: code length mismatch");
        is.read(reinterpret_cast<char*>(cp.error.codes.data()), nbytes);
        if (is.gcount() != nbytes) throw std::runtime_error("checkpoint: truncated file");
    }
    return cp;
}

}  // namespace microadam
