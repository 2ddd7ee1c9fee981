#pragma once

#include "microadam/vec.hpp"

namespace microadam {

/// Sparse slice of a dense vector: strictly increasing indices plus exact
/// copies of the entries at those positions.
struct SparseSelection {
    int64_t dim = 0;
    std::vector<int64_t> indices;
    Vec values;

    int64_t size() const { return static_cast<int64_t>(indices.size()); }
    /// Throws std::invalid_argument if any structural invariant is broken.
    void validate() const;
};

/// Fixed partition of a dim-length vector into contiguous blocks for
/// block-local top-k. Block length is capped so block-relative indices fit
/// a signed 16-bit integer.
struct BlockLayout {
    static constexpr int64_t kMaxBlock = 32767;

    int64_t dim = 0;
    int64_t block = 4096;
    int64_t per_block_k = 1;  ///< entries kept per full-length block

    BlockLayout(int64_t dim, int64_t block, int64_t per_block_k);
    /// per_block_k = ceil(density * block), density in (0, 1].
    static BlockLayout from_density(int64_t dim, int64_t block, double density);

    int64_t num_blocks() const { return (dim + block - 1) / block; }
};

/// Orthonormal column directions spanning a low-rank subspace.
struct SubspaceBasis {
    Mat basis;            ///< rows x rank, orthonormal columns
    Vec singular_values;  ///< descending, one per column
    bool rank_deficient = false;

    int64_t rank() const { return basis.cols; }
};

/// k largest-magnitude entries of x; magnitude ties keep the lowest index.
SparseSelection topk_global(const Vec& x, int64_t k);

/// Per-block top-k with indices mapped back to global positions.
SparseSelection topk_blockwise(const Vec& x, const BlockLayout& layout);

/// Dense vector with sel's values at sel's indices and zeros elsewhere.
Vec embed(const SparseSelection& sel);

/// Copy of x with the selected coordinates zeroed; embed(sel) + result == x
/// exactly when sel was taken from x.
Vec zero_selected(const Vec& x, const SparseSelection& sel);

/// ||x - embed(sel)|| / ||x||; the residual fraction left by the selection.
double contraction_factor(const Vec& x, const SparseSelection& sel);

/// Projection basis * basis^T * g onto the basis's column span.
Mat lowrank_project(const Mat& g, const SubspaceBasis& basis);

/// Top-`rank` left singular directions of acc (eigenvectors of acc*acc^T).
/// If acc has fewer than `rank` non-negligible singular values the basis is
/// truncated to the available directions and flagged rank_deficient.
/// Deterministic: descending singular values, magnitude ties keep original
/// order, each column's first non-negligible entry is non-negative.
SubspaceBasis subspace_from_accumulator(const Mat& acc, int64_t rank);

}  // namespace microadam
