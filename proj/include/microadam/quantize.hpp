#pragma once

#include <cstdint>
#include <random>

#include "microadam/vec.hpp"

namespace microadam {

enum class Rounding { nearest, stochastic };

/// Uniform quantization grid for one bucket: `levels` points spaced `level`
/// apart from lo to hi, where levels = 2^bits.
struct QuantParams {
    double lo = 0.0;
    double hi = 0.0;
    int bits = 4;
    double level = 0.0;  ///< (hi - lo) / (2^bits - 1); 0 for a constant bucket

    QuantParams() = default;
    QuantParams(double lo, double hi, int bits);

    uint32_t max_code() const { return (1u << bits) - 1u; }
};

/// Grid covering [min(x), max(x)] for one bucket slice.
QuantParams quant_params(const double* x, int64_t n, int bits);
QuantParams quant_params(const Vec& x, int bits);

/// codes = floor((x - lo)/level + 1/2), clamped into [0, 2^bits - 1].
/// Values must lie in [lo, hi] up to 1 ulp. A degenerate grid (level 0)
/// maps everything to code 0.
std::vector<uint32_t> quantize_nearest(const double* x, int64_t n, const QuantParams& p);
std::vector<uint32_t> quantize_nearest(const Vec& x, const QuantParams& p);

/// codes = floor((x - lo)/level + xi), xi fresh uniform [0,1) per coordinate.
/// Unbiased: the expected dequantized value equals x. Coordinates that equal
/// lo or hi reproduce exactly.
std::vector<uint32_t> quantize_stochastic(const double* x, int64_t n, const QuantParams& p,
                                          std::mt19937_64& rng);
std::vector<uint32_t> quantize_stochastic(const Vec& x, const QuantParams& p,
                                          std::mt19937_64& rng);

/// x_hat = code * level + lo.
Vec dequantize(const std::vector<uint32_t>& codes, const QuantParams& p);

/// Bitstream packing, low bits first within each byte; bits=4 puts the first
/// code in the low nibble. Trailing padding bits are zero.
std::vector<uint8_t> pack(const std::vector<uint32_t>& codes, int bits);
std::vector<uint32_t> unpack(const std::vector<uint8_t>& bytes, int64_t n, int bits);

/// Error-feedback vector stored as packed b-bit codes plus per-bucket grids.
/// Buckets are contiguous slices of `bucket` coordinates (last may be short).
struct QuantizedErrorBuffer {
    int64_t dim = 0;
    int bits = 4;
    int64_t bucket = 64;
    std::vector<uint8_t> codes;       ///< ceil(dim*bits/8) bytes
    std::vector<QuantParams> params;  ///< ceil(dim/bucket) buckets

    static QuantizedErrorBuffer zeros(int64_t dim, int bits, int64_t bucket);
    static QuantizedErrorBuffer encode(const Vec& x, int bits, int64_t bucket,
                                       Rounding mode = Rounding::nearest,
                                       std::mt19937_64* rng = nullptr);
    Vec decode() const;

    int64_t num_buckets() const { return (dim + bucket - 1) / bucket; }
    /// Packed codes plus two 32-bit scalars of metadata per bucket.
    int64_t byte_size() const { return static_cast<int64_t>(codes.size()) + 8 * num_buckets(); }
};

}  // namespace microadam
