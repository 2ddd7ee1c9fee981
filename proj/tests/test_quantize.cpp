#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "microadam/quantize.hpp"

using namespace microadam;

namespace {

Vec random_vec(std::mt19937_64& rng, int64_t d, double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    Vec x(static_cast<size_t>(d));
    for (double& v : x) v = gauss(rng);
    return x;
}

// Relative-error factor the bucket bound promises for its own range.
double variance_factor(int64_t d, int bits, const QuantParams& p) {
    double levels = std::pow(2.0, bits) - 1.0;
    return std::sqrt(static_cast<double>(d - 2)) / levels * (p.hi - p.lo) /
           std::sqrt(p.hi * p.hi + p.lo * p.lo);
}

}  // namespace

TEST_CASE("quant_params spans the slice") {
    QuantParams p = quant_params(Vec{0.0, 7.4, 15.0}, 4);
    CHECK(p.lo == 0.0);
    CHECK(p.hi == 15.0);
    CHECK(p.level == 1.0);

    QuantParams flat = quant_params(Vec{3.5, 3.5, 3.5}, 4);
    CHECK(flat.level == 0.0);
    CHECK(flat.lo == flat.hi);

    CHECK(quant_params(Vec{-1.0, 1.0}, 1).level == 2.0);
    CHECK_THROWS_AS(quant_params(Vec{}, 4), std::invalid_argument);
    CHECK_THROWS_AS(quant_params(Vec{1.0, std::nan("")}, 4), std::invalid_argument);
}

TEST_CASE("nearest rounding on the worked example") {
    QuantParams p = quant_params(Vec{0.0, 7.4, 15.0}, 4);
    CHECK(quantize_nearest(Vec{0.0, 7.4, 15.0}, p) == std::vector<uint32_t>{0, 7, 15});
    CHECK(quantize_nearest(Vec{p.lo}, p) == std::vector<uint32_t>{0});
    CHECK(quantize_nearest(Vec{p.hi}, p) == std::vector<uint32_t>{15});
    // Half-up at the midpoint.
    CHECK(quantize_nearest(Vec{p.lo + p.level / 2.0}, p) == std::vector<uint32_t>{1});
    CHECK_THROWS_AS(quantize_nearest(Vec{15.1}, p), std::invalid_argument);
    CHECK_THROWS_AS(quantize_nearest(Vec{-0.1}, p), std::invalid_argument);

    QuantParams flat(2.0, 2.0, 4);
    CHECK(quantize_nearest(Vec{2.0, 2.0}, flat) == std::vector<uint32_t>{0, 0});
}

TEST_CASE("stochastic rounding lands on a neighbor and is exact on the grid") {
    std::mt19937_64 rng(31);
    QuantParams p(0.0, 10.0, 2);  // level 10/3
    for (int rep = 0; rep < 200; ++rep) {
        double x = std::uniform_real_distribution<double>(0.0, 10.0)(rng);
        auto code = quantize_stochastic(Vec{x}, p, rng)[0];
        double v = (x - p.lo) / p.level;
        CHECK(static_cast<double>(code) >= std::floor(v) - 0.0);
        CHECK(static_cast<double>(code) <= std::floor(v) + 1.0);
        CHECK(std::fabs(dequantize({code}, p)[0] - x) <= p.level);
    }
    // Grid points: both branches coincide.
    for (uint32_t j = 0; j <= 3; ++j) {
        double x = p.lo + static_cast<double>(j) * p.level;
        for (int rep = 0; rep < 20; ++rep)
            CHECK(quantize_stochastic(Vec{x}, p, rng)[0] == j);
    }
    // Endpoints reproduce exactly even for a range whose width is inexact.
    QuantParams odd = quant_params(Vec{-0.3, 0.7, 0.1}, 4);
    for (int rep = 0; rep < 50; ++rep) {
        auto codes = quantize_stochastic(Vec{-0.3, 0.7}, odd, rng);
        Vec back = dequantize(codes, odd);
        CHECK(back[0] == -0.3);
        CHECK(back[1] == doctest::Approx(0.7).epsilon(1e-15));
    }
}

TEST_CASE("stochastic rounding is unbiased at a quarter-level offset") {
    QuantParams p(0.0, 15.0, 4);
    double x = p.lo + 0.25 * p.level;
    const int n = 100000;
    std::mt19937_64 rng(32);
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        sum += dequantize(quantize_stochastic(Vec{x}, p, rng), p)[0];
    double mean = sum / n;
    double se = p.level * std::sqrt(0.25 * 0.75 / n);
    CHECK(std::fabs(mean - x) <= 3.0 * se);
}

TEST_CASE("stochastic rounding is unbiased coordinate-wise on random vectors") {
    std::mt19937_64 rng(33);
    Vec x = random_vec(rng, 8);
    QuantParams p = quant_params(x, 3);
    const int n = 100000;
    Vec sum(x.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        Vec back = dequantize(quantize_stochastic(x, p, rng), p);
        for (size_t j = 0; j < x.size(); ++j) sum[j] += back[j];
    }
    for (size_t j = 0; j < x.size(); ++j) {
        double mean = sum[j] / n;
        // A Bernoulli mix of two levels u apart has std <= u/2.
        double se = p.level * 0.5 / std::sqrt(static_cast<double>(n));
        CHECK(std::fabs(mean - x[j]) <= 4.0 * se + 1e-15);
    }
}

TEST_CASE("dequantize applies the affine grid and validates codes") {
    QuantParams p(0.0, 15.0, 4);
    CHECK(dequantize({0, 7, 15}, p) == Vec{0.0, 7.0, 15.0});
    CHECK_THROWS_AS(dequantize({16}, p), std::invalid_argument);

    QuantParams zero(0.0, 0.0, 4);
    CHECK(dequantize({0, 0, 0}, zero) == Vec(3, 0.0));
}

TEST_CASE("nearest round trip stays within half a level") {
    std::mt19937_64 rng(34);
    for (int rep = 0; rep < 100; ++rep) {
        Vec x = random_vec(rng, 40, 5.0);
        for (int bits : {2, 4, 8}) {
            QuantParams p = quant_params(x, bits);
            Vec back = dequantize(quantize_nearest(x, p), p);
            for (size_t i = 0; i < x.size(); ++i)
                CHECK(std::fabs(back[i] - x[i]) <= p.level / 2.0 + 1e-12 * std::fabs(p.hi - p.lo));
        }
    }
}

TEST_CASE("pack and unpack round-trip the code stream") {
    CHECK(pack({1, 2}, 4) == std::vector<uint8_t>{0x21});
    // Odd count: the trailing nibble is zero padding and is dropped on unpack.
    auto odd = pack({15, 15, 15}, 4);
    CHECK(odd == std::vector<uint8_t>{0xff, 0x0f});
    CHECK(unpack(odd, 3, 4) == std::vector<uint32_t>{15, 15, 15});

    std::mt19937_64 rng(35);
    for (int rep = 0; rep < 1000; ++rep) {
        int bits = 1 + static_cast<int>(rng() % 8);
        int64_t n = 1 + static_cast<int64_t>(rng() % 77);
        std::vector<uint32_t> codes(static_cast<size_t>(n));
        for (auto& c : codes) c = static_cast<uint32_t>(rng()) & ((1u << bits) - 1u);
        CHECK(unpack(pack(codes, bits), n, bits) == codes);
    }
    CHECK_THROWS_AS(unpack(std::vector<uint8_t>{0xff}, 3, 4), std::invalid_argument);
    CHECK_THROWS_AS(pack({4}, 2), std::invalid_argument);
}

TEST_CASE("relative error bound holds for both rounding modes") {
    std::mt19937_64 rng(36);
    int violations = 0;
    int total = 0;
    for (int64_t d : {3, 64, 1024}) {
        for (int bits : {2, 4, 8}) {
            for (int rep = 0; rep < 40; ++rep) {
                Vec x = random_vec(rng, d);
                QuantParams p = quant_params(x, bits);
                double bound = variance_factor(d, bits, p) * norm2(x);
                for (int mode = 0; mode < 2; ++mode) {
                    auto codes = mode == 0 ? quantize_nearest(x, p)
                                           : quantize_stochastic(x, p, rng);
                    Vec back = dequantize(codes, p);
                    Vec diff(x.size());
                    for (size_t i = 0; i < x.size(); ++i) diff[i] = back[i] - x[i];
                    ++total;
                    if (norm2(diff) > bound) ++violations;
                }
            }
        }
    }
    CHECK(total >= 720);
    CHECK(violations == 0);
}

TEST_CASE("per-coordinate error is at most one level (stochastic) or half (nearest)") {
    std::mt19937_64 rng(37);
    Vec x = random_vec(rng, 200, 3.0);
    QuantParams p = quant_params(x, 4);
    Vec near = dequantize(quantize_nearest(x, p), p);
    Vec stoc = dequantize(quantize_stochastic(x, p, rng), p);
    for (size_t i = 0; i < x.size(); ++i) {
        CHECK(std::fabs(near[i] - x[i]) <= p.level / 2.0 + 1e-12 * p.level);
        CHECK(std::fabs(stoc[i] - x[i]) <= p.level * (1.0 + 1e-12));
    }
}

TEST_CASE("error buffer starts at zero and reports its size") {
    auto buf = QuantizedErrorBuffer::zeros(100, 4, 64);
    CHECK(buf.decode() == Vec(100, 0.0));
    CHECK(static_cast<int64_t>(buf.codes.size()) == 50);  // ceil(100*4/8)
    CHECK(buf.num_buckets() == 2);
    CHECK(buf.byte_size() <= static_cast<int64_t>(0.5 * 100) + 8 * 2);
}

TEST_CASE("error buffer encode/decode respects bucket-local grids") {
    std::mt19937_64 rng(38);
    for (int rep = 0; rep < 50; ++rep) {
        int64_t d = 1 + static_cast<int64_t>(rng() % 300);
        int64_t bucket = 1 + static_cast<int64_t>(rng() % 80);
        Vec x = random_vec(rng, d, 2.0);
        auto buf = QuantizedErrorBuffer::encode(x, 4, bucket);
        CHECK(static_cast<int64_t>(buf.codes.size()) == (d * 4 + 7) / 8);
        CHECK(static_cast<int64_t>(buf.params.size()) == (d + bucket - 1) / bucket);
        Vec back = buf.decode();
        for (int64_t i = 0; i < d; ++i) {
            const QuantParams& p = buf.params[static_cast<size_t>(i / bucket)];
            CHECK(std::fabs(back[static_cast<size_t>(i)] - x[static_cast<size_t>(i)]) <=
                  p.level / 2.0 + 1e-12 * (std::fabs(p.hi) + std::fabs(p.lo) + 1.0));
        }
        CHECK(buf.byte_size() <= static_cast<int64_t>(0.5 * static_cast<double>(d)) + 1 +
                                     8 * buf.num_buckets());
    }
}

TEST_CASE("buckets of size at most two are lossless") {
    // min and max of a 2-element bucket are both endpoints of its own grid.
    Vec x{3.25, -1.5, 0.75, 2.125};
    auto buf = QuantizedErrorBuffer::encode(x, 4, 2);
    CHECK(buf.decode() == x);
}
