#include "microadam/quantize.hpp"

#include <algorithm>

namespace microadam {

QuantParams::QuantParams(double lo_, double hi_, int bits_) : lo(lo_), hi(hi_), bits(bits_) {
    if (bits < 1 || bits > 24) throw std::invalid_argument("QuantParams: bits must be in [1, 24]");
    if (!std::isfinite(lo) || !std::isfinite(hi))
        throw std::invalid_argument("QuantParams: non-finite range");
    if (lo > hi) throw std::invalid_argument("QuantParams: lo > hi");
    level = lo == hi ? 0.0 : (hi - lo) / static_cast<double>(max_code());
}

QuantParams quant_params(const double* x, int64_t n, int bits) {
    if (n < 1) throw std::invalid_argument("quant_params: empty slice");
    double lo = x[0], hi = x[0];
    for (int64_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i])) throw std::invalid_argument("quant_params: non-finite value");
        lo = std::min(lo, x[i]);
        hi = std::max(hi, x[i]);
    }
    return QuantParams(lo, hi, bits);
}

QuantParams quant_params(const Vec& x, int bits) {
    return quant_params(x.data(), static_cast<int64_t>(x.size()), bits);
}

namespace {

void check_in_range(double x, const QuantParams& p) {
    // Allow 1 ulp of slack at either end for values computed from the slice.
    double slack = std::max({std::fabs(p.lo), std::fabs(p.hi), 1e-300}) *
                   std::numeric_limits<double>::epsilon();
    if (x < p.lo - slack || x > p.hi + slack)
        throw std::invalid_argument("quantize: value outside [lo, hi]");
}

}  // namespace

std::vector<uint32_t> quantize_nearest(const double* x, int64_t n, const QuantParams& p) {
    std::vector<uint32_t> codes(static_cast<size_t>(n), 0u);
    if (p.level == 0.0) {
        for (int64_t i = 0; i < n; ++i) check_in_range(x[i], p);
        return codes;
    }
    for (int64_t i = 0; i < n; ++i) {
        check_in_range(x[i], p);
        double v = std::floor((x[i] - p.lo) / p.level + 0.5);
        v = std::clamp(v, 0.0, static_cast<double>(p.max_code()));
        codes[static_cast<size_t>(i)] = static_cast<uint32_t>(v);
    }
    return codes;
}

std::vector<uint32_t> quantize_nearest(const Vec& x, const QuantParams& p) {
    return quantize_nearest(x.data(), static_cast<int64_t>(x.size()), p);
}

std::vector<uint32_t> quantize_stochastic(const double* x, int64_t n, const QuantParams& p,
                                          std::mt19937_64& rng) {
    std::vector<uint32_t> codes(static_cast<size_t>(n), 0u);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    if (p.level == 0.0) {
        for (int64_t i = 0; i < n; ++i) check_in_range(x[i], p);
        return codes;
    }
    for (int64_t i = 0; i < n; ++i) {
        check_in_range(x[i], p);
        double code;
        // The range endpoints sit exactly on grid points; reproduce them
        // without consuming randomness so they stay lossless despite
        // floating-point noise in (hi - lo)/level.
        if (x[i] == p.hi) {
            code = static_cast<double>(p.max_code());
        } else if (x[i] == p.lo) {
            code = 0.0;
        } else {
            code = std::floor((x[i] - p.lo) / p.level + uni(rng));
        }
        code = std::clamp(code, 0.0, static_cast<double>(p.max_code()));
        codes[static_cast<size_t>(i)] = static_cast<uint32_t>(code);
    }
    return codes;
}

std::vector<uint32_t> quantize_stochastic(const Vec& x, const QuantParams& p,
                                          std::mt19937_64& rng) {
    return quantize_stochastic(x.data(), static_cast<int64_t>(x.size()), p, rng);
}

Vec dequantize(const std::vector<uint32_t>& codes, const QuantParams& p) {
    Vec out(codes.size());
    for (size_t i = 0; i < codes.size(); ++i) {
        if (codes[i] > p.max_code()) throw std::invalid_argument("dequantize: code out of range");
        out[i] = static_cast<double>(codes[i]) * p.level + p.lo;
    }
    return out;
}

std::vector<uint8_t> pack(const std::vector<uint32_t>& codes, int bits) {
    if (bits < 1 || bits > 24) throw std::invalid_argument("pack: bits must be in [1, 24]");
    int64_t total_bits = static_cast<int64_t>(codes.size()) * bits;
    std::vector<uint8_t> bytes(static_cast<size_t>((total_bits + 7) / 8), 0u);
    uint32_t limit = bits >= 32 ? ~0u : (1u << bits) - 1u;
    int64_t pos = 0;
    for (uint32_t c : codes) {
        if (c > limit) throw std::invalid_argument("pack: code exceeds bit width");
        for (int b = 0; b < bits; ++b, ++pos)
            if (c >> b & 1u) bytes[static_cast<size_t>(pos / 8)] |= static_cast<uint8_t>(1u << (pos % 8));
    }
    return bytes;
}

std::vector<uint32_t> unpack(const std::vector<uint8_t>& bytes, int64_t n, int bits) {
    if (bits < 1 || bits > 24) throw std::invalid_argument("unpack: bits must be in [1, 24]");
    int64_t total_bits = n * bits;
    if (static_cast<int64_t>(bytes.size()) != (total_bits + 7) / 8)
        throw std::invalid_argument("unpack: byte length mismatch");
    std::vector<uint32_t> codes(static_cast<size_t>(n), 0u);
    int64_t pos = 0;
    for (int64_t i = 0; i < n; ++i)
        for (int b = 0; b < bits; ++b, ++pos)
            if (bytes[static_cast<size_t>(pos / 8)] >> (pos % 8) & 1u)
                codes[static_cast<size_t>(i)] |= 1u << b;
    return codes;
}

QuantizedErrorBuffer QuantizedErrorBuffer::zeros(int64_t dim, int bits, int64_t bucket) {
    if (dim < 1) throw std::invalid_argument("QuantizedErrorBuffer: dim must be positive");
    if (bucket < 1) throw std::invalid_argument("QuantizedErrorBuffer: bucket must be positive");
    QuantizedErrorBuffer buf;
    buf.dim = dim;
    buf.bits = bits;
    buf.bucket = bucket;
    buf.codes.assign(static_cast<size_t>((dim * bits + 7) / 8), 0u);
    buf.params.assign(static_cast<size_t>(buf.num_buckets()), QuantParams(0.0, 0.0, bits));
    return buf;
}

QuantizedErrorBuffer QuantizedErrorBuffer::encode(const Vec& x, int bits, int64_t bucket,
                                                  Rounding mode, std::mt19937_64* rng) {
    if (mode == Rounding::stochastic && rng == nullptr)
        throw std::invalid_argument("QuantizedErrorBuffer: stochastic mode needs an rng");
    auto dim = static_cast<int64_t>(x.size());
    QuantizedErrorBuffer buf = zeros(dim, bits, bucket);
    std::vector<uint32_t> all;
    all.reserve(static_cast<size_t>(dim));
    for (int64_t b = 0; b < buf.num_buckets(); ++b) {
        int64_t start = b * bucket;
        int64_t len = std::min(bucket, dim - start);
        QuantParams p = quant_params(x.data() + start, len, bits);
        buf.params[static_cast<size_t>(b)] = p;
        auto codes = mode == Rounding::nearest
                         ? quantize_nearest(x.data() + start, len, p)
                         : quantize_stochastic(x.data() + start, len, p, *rng);
        all.insert(all.end(), codes.begin(), codes.end());
    }
    buf.codes = pack(all, bits);
    return buf;
}

Vec QuantizedErrorBuffer::decode() const {
    auto all = unpack(codes, dim, bits);
    Vec out(static_cast<size_t>(dim));
    for (int64_t b = 0; b < num_buckets(); ++b) {
        int64_t start = b * bucket;
        int64_t len = std::min(bucket, dim - start);
        const QuantParams& p = params[static_cast<size_t>(b)];
        for (int64_t i = 0; i < len; ++i) {
            uint32_t c = all[static_cast<size_t>(start + i)];
            if (c > p.max_code()) throw std::invalid_argument("decode: code out of range");
            out[static_cast<size_t>(start + i)] = static_cast<double>(c) * p.level + p.lo;
        }
    }
    return out;
}

}  // namespace microadam
