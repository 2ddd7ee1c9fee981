#include "microadam/window.hpp"

namespace microadam {

GradientWindow::GradientWindow(int64_t dim_, int64_t capacity_, int64_t row_width_)
    : dim(dim_), capacity(capacity_), row_width(row_width_) {
    if (dim < 1) throw std::invalid_argument("GradientWindow: dim must be positive");
    if (capacity < 1) throw std::invalid_argument("GradientWindow: capacity must be positive");
    if (row_width < 1 || row_width > dim)
        throw std::invalid_argument("GradientWindow: row_width must be in [1, dim]");
    rows.resize(static_cast<size_t>(capacity));
}

void GradientWindow::push(const SparseSelection& sel) {
    if (sel.dim != dim) throw std::invalid_argument("GradientWindow: selection dim mismatch");
    if (sel.size() != row_width)
        throw std::invalid_argument("GradientWindow: selection width mismatch");
    sel.validate();
    ++step;
    Row& row = rows[static_cast<size_t>(head)];
    row.stamp = step;
    row.indices = sel.indices;
    row.values = sel.values;
    head = (head + 1) % capacity;
    filled = std::min(step, capacity);
}

Vec GradientWindow::adam_stats(double beta, bool square) const {
    if (filled < 1) throw std::invalid_argument("adam_stats: empty window");
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("adam_stats: beta must be in (0,1)");
    Vec z(static_cast<size_t>(dim), 0.0);
    for (int64_t r = 0; r < filled; ++r) {
        // With fewer pushes than capacity the written rows start at index 0;
        // afterwards all rows are live. Age follows from the step stamp.
        const Row& row = rows[static_cast<size_t>(r)];
        if (row.stamp == 0) continue;
        double w = std::pow(beta, static_cast<double>(step - row.stamp));
        for (size_t j = 0; j < row.indices.size(); ++j) {
            double v = row.values[j];
            z[static_cast<size_t>(row.indices[j])] += w * (square ? v * v : v);
        }
    }
    double scale = (1.0 - beta) / (1.0 - std::pow(beta, static_cast<double>(step)));
    for (double& x : z) x *= scale;
    return z;
}

Vec ema_oracle(const std::vector<Vec>& history, double beta, bool square) {
    if (history.empty()) throw std::invalid_argument("ema_oracle: empty history");
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("ema_oracle: beta must be in (0,1)");
    Vec z(history.front().size(), 0.0);
    for (const Vec& g : history) {
        if (g.size() != z.size()) throw std::invalid_argument("ema_oracle: ragged history");
        for (size_t i = 0; i < z.size(); ++i)
            z[i] = beta * z[i] + (1.0 - beta) * (square ? g[i] * g[i] : g[i]);
    }
    double t = static_cast<double>(history.size());
    double corr = 1.0 - std::pow(beta, t);
    for (double& x : z) x /= corr;
    return z;
}

}  // namespace microadam
