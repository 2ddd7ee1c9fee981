#pragma once

#include "microadam/compress.hpp"

namespace microadam {

/// Circular buffer of the last `capacity` compressed gradients. Each push
/// overwrites the oldest row; adam_stats recomputes the moment estimate from
/// the surviving rows with an age-dependent decay weight.
struct GradientWindow {
    struct Row {
        int64_t stamp = 0;  ///< global step at which the row was written
        std::vector<int64_t> indices;
        Vec values;
    };

    int64_t dim = 0;
    int64_t capacity = 0;   ///< m
    int64_t row_width = 0;  ///< k
    int64_t head = 0;       ///< next row to overwrite
    int64_t filled = 0;     ///< min(step, capacity)
    int64_t step = 0;       ///< global step t
    std::vector<Row> rows;

    GradientWindow(int64_t dim, int64_t capacity, int64_t row_width);

    void push(const SparseSelection& sel);

    /// (1-beta) * sum over rows of beta^age * value (or value^2 with
    /// `square`), scatter-added per coordinate, divided by (1 - beta^step).
    /// The newest row has age 0. Untouched coordinates are exactly 0.
    Vec adam_stats(double beta, bool square) const;
};

/// Bias-corrected exponential moving average of a full dense history:
/// (1-beta) * sum_{tau=1..t} beta^(t-tau) * g_tau, divided by (1 - beta^t).
Vec ema_oracle(const std::vector<Vec>& history, double beta, bool square);

}  // namespace microadam
