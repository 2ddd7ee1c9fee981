#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace microadam {

using Vec = std::vector<double>;

/// Dense row-major matrix, just large enough for the low-rank diagnostics.
struct Mat {
    int64_t rows = 0;
    int64_t cols = 0;
    Vec data;  ///< rows*cols entries, row-major

    Mat() = default;
    Mat(int64_t r, int64_t c) : rows(r), cols(c), data(static_cast<size_t>(r * c), 0.0) {
        if (r < 0 || c < 0) throw std::invalid_argument("Mat: negative shape");
    }

    double& at(int64_t i, int64_t j) { return data[static_cast<size_t>(i * cols + j)]; }
    double at(int64_t i, int64_t j) const { return data[static_cast<size_t>(i * cols + j)]; }
};

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
}

inline void check_finite(const Vec& a, const char* what) {
    for (double x : a)
        if (!std::isfinite(x))
            throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

/// a*x + y, elementwise.
inline Vec axpy(double a, const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
    Vec r(x.size());
    for (size_t i = 0; i < x.size(); ++i) r[i] = a * x[i] + y[i];
    return r;
}

}  // namespace microadam
