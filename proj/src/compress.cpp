#include "microadam/compress.hpp"

#include <algorithm>
#include <numeric>

namespace microadam {

void SparseSelection::validate() const {
    if (indices.size() != values.size())
        throw std::invalid_argument("SparseSelection: indices/values length mismatch");
    int64_t prev = -1;
    for (int64_t idx : indices) {
        if (idx <= prev) throw std::invalid_argument("SparseSelection: indices not strictly increasing");
        if (idx < 0 || idx >= dim) throw std::invalid_argument("SparseSelection: index out of range");
        prev = idx;
    }
}

BlockLayout::BlockLayout(int64_t dim_, int64_t block_, int64_t per_block_k_)
    : dim(dim_), block(block_), per_block_k(per_block_k_) {
    if (dim < 1) throw std::invalid_argument("BlockLayout: dim must be positive");
    if (block < 1 || block > kMaxBlock)
        throw std::invalid_argument("BlockLayout: block length must be in [1, 32767]");
    if (per_block_k < 1 || per_block_k > block)
        throw std::invalid_argument("BlockLayout: per_block_k must be in [1, block]");
}

BlockLayout BlockLayout::from_density(int64_t dim, int64_t block, double density) {
    if (!(density > 0.0) || density > 1.0)
        throw std::invalid_argument("BlockLayout: density must be in (0, 1]");
    auto k = static_cast<int64_t>(std::ceil(density * static_cast<double>(block)));
    return BlockLayout(dim, block, std::min(k, block));
}

namespace {

// Indices of the k largest |x| in [first, last), magnitude ties broken toward
// the lower index. Returned sorted ascending.
std::vector<int64_t> topk_indices(const Vec& x, int64_t first, int64_t last, int64_t k) {
    std::vector<int64_t> order(static_cast<size_t>(last - first));
    std::iota(order.begin(), order.end(), first);
    auto better = [&x](int64_t a, int64_t b) {
        double ma = std::fabs(x[static_cast<size_t>(a)]);
        double mb = std::fabs(x[static_cast<size_t>(b)]);
        if (ma != mb) return ma > mb;
        return a < b;
    };
    auto mid = order.begin() + static_cast<ptrdiff_t>(k);
    std::nth_element(order.begin(), mid - 1, order.end(), better);
    order.resize(static_cast<size_t>(k));
    std::sort(order.begin(), order.end());
    return order;
}

SparseSelection gather(const Vec& x, std::vector<int64_t> idx) {
    SparseSelection sel;
    sel.dim = static_cast<int64_t>(x.size());
    sel.values.reserve(idx.size());
    for (int64_t i : idx) sel.values.push_back(x[static_cast<size_t>(i)]);
    sel.indices = std::move(idx);
    return sel;
}

}  // namespace

SparseSelection topk_global(const Vec& x, int64_t k) {
    auto d = static_cast<int64_t>(x.size());
    if (k < 1 || k > d) throw std::invalid_argument("topk_global: k must be in [1, dim]");
    check_finite(x, "topk_global");
    return gather(x, topk_indices(x, 0, d, k));
}

SparseSelection topk_blockwise(const Vec& x, const BlockLayout& layout) {
    auto d = static_cast<int64_t>(x.size());
    if (d != layout.dim) throw std::invalid_argument("topk_blockwise: layout dim mismatch");
    check_finite(x, "topk_blockwise");
    std::vector<int64_t> idx;
    for (int64_t start = 0; start < d; start += layout.block) {
        int64_t len = std::min(layout.block, d - start);
        int64_t k = std::min(layout.per_block_k, len);
        auto local = topk_indices(x, start, start + len, k);
        idx.insert(idx.end(), local.begin(), local.end());
    }
    return gather(x, std::move(idx));
}

Vec embed(const SparseSelection& sel) {
    sel.validate();
    Vec out(static_cast<size_t>(sel.dim), 0.0);
    for (size_t i = 0; i < sel.indices.size(); ++i)
        out[static_cast<size_t>(sel.indices[i])] = sel.values[i];
    return out;
}

Vec zero_selected(const Vec& x, const SparseSelection& sel) {
    if (static_cast<int64_t>(x.size()) != sel.dim)
        throw std::invalid_argument("zero_selected: dim mismatch");
    sel.validate();
    Vec out = x;
    for (int64_t i : sel.indices) out[static_cast<size_t>(i)] = 0.0;
    return out;
}

double contraction_factor(const Vec& x, const SparseSelection& sel) {
    double nx = norm2(x);
    if (nx == 0.0) throw std::invalid_argument("contraction_factor: zero input vector");
    return norm2(zero_selected(x, sel)) / nx;
}

Mat lowrank_project(const Mat& g, const SubspaceBasis& basis) {
    const Mat& b = basis.basis;
    if (b.rows != g.rows) throw std::invalid_argument("lowrank_project: row-count mismatch");
    // coeff = B^T g  (rank x cols), out = B coeff  (rows x cols)
    Mat coeff(b.cols, g.cols);
    for (int64_t r = 0; r < b.cols; ++r)
        for (int64_t j = 0; j < g.cols; ++j) {
            double s = 0.0;
            for (int64_t i = 0; i < g.rows; ++i) s += b.at(i, r) * g.at(i, j);
            coeff.at(r, j) = s;
        }
    Mat out(g.rows, g.cols);
    for (int64_t i = 0; i < g.rows; ++i)
        for (int64_t j = 0; j < g.cols; ++j) {
            double s = 0.0;
            for (int64_t r = 0; r < b.cols; ++r) s += b.at(i, r) * coeff.at(r, j);
            out.at(i, j) = s;
        }
    return out;
}

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Deterministic sweep
// order; s ends diagonal, v's columns are the eigenvectors.
void jacobi_eigen(Mat& s, Mat& v) {
    int64_t n = s.rows;
    v = Mat(n, n);
    for (int64_t i = 0; i < n; ++i) v.at(i, i) = 1.0;
    double frob = 0.0;
    for (double x : s.data) frob += x * x;
    double stop = 1e-30 * std::max(frob, 1e-300);
    for (int sweep = 0; sweep < 128; ++sweep) {
        double off = 0.0;
        for (int64_t p = 0; p < n; ++p)
            for (int64_t q = p + 1; q < n; ++q) off += s.at(p, q) * s.at(p, q);
        if (off <= stop) break;
        for (int64_t p = 0; p < n; ++p)
            for (int64_t q = p + 1; q < n; ++q) {
                double apq = s.at(p, q);
                if (apq == 0.0) continue;
                double theta = (s.at(q, q) - s.at(p, p)) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double sn = t * c;
                for (int64_t i = 0; i < n; ++i) {
                    double sip = s.at(i, p), siq = s.at(i, q);
                    s.at(i, p) = c * sip - sn * siq;
                    s.at(i, q) = sn * sip + c * siq;
                }
                for (int64_t i = 0; i < n; ++i) {
                    double spi = s.at(p, i), sqi = s.at(q, i);
                    s.at(p, i) = c * spi - sn * sqi;
                    s.at(q, i) = sn * spi + c * sqi;
                }
                for (int64_t i = 0; i < n; ++i) {
                    double vip = v.at(i, p), viq = v.at(i, q);
                    v.at(i, p) = c * vip - sn * viq;
                    v.at(i, q) = sn * vip + c * viq;
                }
            }
    }
}

}  // namespace

SubspaceBasis subspace_from_accumulator(const Mat& acc, int64_t rank) {
    if (acc.rows < 1 || acc.cols < 1)
        throw std::invalid_argument("subspace_from_accumulator: empty accumulator");
    int64_t max_rank = std::min(acc.rows, acc.cols);
    if (rank < 1 || rank > max_rank)
        throw std::invalid_argument("subspace_from_accumulator: rank must be in [1, min(rows, cols)]");
    check_finite(acc.data, "subspace_from_accumulator");

    // Gram matrix acc * acc^T; its eigenvectors are the left singular
    // directions and its eigenvalues the squared singular values.
    Mat gram(acc.rows, acc.rows);
    for (int64_t i = 0; i < acc.rows; ++i)
        for (int64_t j = i; j < acc.rows; ++j) {
            double s = 0.0;
            for (int64_t c = 0; c < acc.cols; ++c) s += acc.at(i, c) * acc.at(j, c);
            gram.at(i, j) = s;
            gram.at(j, i) = s;
        }
    Mat vecs;
    jacobi_eigen(gram, vecs);

    std::vector<int64_t> order(static_cast<size_t>(acc.rows));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&gram](int64_t a, int64_t b) {
        return gram.at(a, a) > gram.at(b, b);
    });

    double top = std::max(gram.at(order[0], order[0]), 0.0);
    double tol = static_cast<double>(std::max(acc.rows, acc.cols)) * 1e-15 * top;
    int64_t available = 0;
    while (available < max_rank &&
           gram.at(order[static_cast<size_t>(available)], order[static_cast<size_t>(available)]) > tol)
        ++available;

    SubspaceBasis out;
    out.rank_deficient = available < rank;
    int64_t keep = std::min(rank, available);
    out.basis = Mat(acc.rows, keep);
    out.singular_values.resize(static_cast<size_t>(keep));
    for (int64_t c = 0; c < keep; ++c) {
        int64_t src = order[static_cast<size_t>(c)];
        out.singular_values[static_cast<size_t>(c)] =
            std::sqrt(std::max(gram.at(src, src), 0.0));
        // Sign convention: first non-negligible entry non-negative.
        double sign = 1.0;
        for (int64_t i = 0; i < acc.rows; ++i) {
            double e = vecs.at(i, src);
            if (std::fabs(e) > 1e-12) {
                sign = e < 0.0 ? -1.0 : 1.0;
                break;
            }
        }
        for (int64_t i = 0; i < acc.rows; ++i) out.basis.at(i, c) = sign * vecs.at(i, src);
    }
    return out;
}

}  // namespace microadam
