#pragma once

#include <string>

#include "microadam/optim.hpp"

namespace microadam {

/// Deserialized diagnostic snapshot of the practical optimizer's state.
struct Checkpoint {
    Vec theta;
    int64_t step = 0;
    int64_t dim = 0;
    int64_t capacity = 0;
    int64_t row_width = 0;
    int64_t head = 0;
    int64_t filled = 0;
    std::vector<GradientWindow::Row> rows;

    bool lossless = false;
    QuantizedErrorBuffer error;  ///< valid when !lossless
    Vec error_dense;             ///< valid when lossless
};

/// Binary dump: 4-byte magic "MADM", version byte, then little-endian fields
/// (parameters, window rows as stamp/index/value triplets, error buffer with
/// per-bucket ranges). Throws std::runtime_error on I/O failure.
void save_checkpoint(const std::string& path, const MicroAdamOptimizer& opt);

/// Throws std::runtime_error on a bad magic, unsupported version, or
/// truncated file.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace microadam
