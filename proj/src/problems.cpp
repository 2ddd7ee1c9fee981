#include "microadam/problems.hpp"

#include <memory>

namespace microadam {

Objective rosenbrock() {
    Objective obj;
    obj.dim = 2;
    obj.eval = [](const Vec& t) {
        double x = t[0], y = t[1];
        return (1.0 - x) * (1.0 - x) + 100.0 * (y - x * x) * (y - x * x);
    };
    obj.grad = [](const Vec& t) {
        double x = t[0], y = t[1];
        return Vec{-2.0 * (1.0 - x) - 400.0 * x * (y - x * x), 200.0 * (y - x * x)};
    };
    obj.optimum = Vec{1.0, 1.0};
    return obj;
}

Objective quadratic(Vec a, Vec b) {
    if (a.size() != b.size()) throw std::invalid_argument("quadratic: a/b size mismatch");
    if (a.empty()) throw std::invalid_argument("quadratic: empty curvature");
    double lo = a[0], hi = a[0];
    for (double ai : a) {
        if (!(ai > 0.0)) throw std::invalid_argument("quadratic: curvatures must be positive");
        lo = std::min(lo, ai);
        hi = std::max(hi, ai);
    }
    Objective obj;
    obj.dim = static_cast<int64_t>(a.size());
    obj.pl_mu = lo;
    obj.smoothness = hi;
    obj.optimum = b;
    auto ap = std::make_shared<Vec>(std::move(a));
    auto bp = std::make_shared<Vec>(std::move(b));
    obj.eval = [ap, bp](const Vec& t) {
        double s = 0.0;
        for (size_t i = 0; i < t.size(); ++i) {
            double r = t[i] - (*bp)[i];
            s += 0.5 * (*ap)[i] * r * r;
        }
        return s;
    };
    obj.grad = [ap, bp](const Vec& t) {
        Vec g(t.size());
        for (size_t i = 0; i < t.size(); ++i) g[i] = (*ap)[i] * (t[i] - (*bp)[i]);
        return g;
    };
    return obj;
}

namespace {

struct LogisticData {
    int64_t n = 0;
    int64_t dim = 0;
    std::vector<Vec> x;
    std::vector<double> y;  // +1 / -1
};

// log(1 + exp(-m)) without overflow.
double log_loss(double margin) {
    if (margin >= 0.0) return std::log1p(std::exp(-margin));
    return -margin + std::log1p(std::exp(margin));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

Vec mean_grad(const LogisticData& d, const Vec& w, int64_t first, int64_t last) {
    Vec g(static_cast<size_t>(d.dim), 0.0);
    for (int64_t s = first; s < last; ++s) {
        double margin = d.y[static_cast<size_t>(s)] * dot(w, d.x[static_cast<size_t>(s)]);
        double coef = -d.y[static_cast<size_t>(s)] * sigmoid(-margin);
        for (int64_t j = 0; j < d.dim; ++j)
            g[static_cast<size_t>(j)] += coef * d.x[static_cast<size_t>(s)][static_cast<size_t>(j)];
    }
    double inv = 1.0 / static_cast<double>(last - first);
    for (double& v : g) v *= inv;
    return g;
}

}  // namespace

Objective logistic_regression(int64_t n, int64_t dim, double separation, uint64_t seed) {
    if (n < dim) throw std::invalid_argument("logistic_regression: need n >= dim");
    if (dim < 1) throw std::invalid_argument("logistic_regression: dim must be positive");
    auto data = std::make_shared<LogisticData>();
    data->n = n;
    data->dim = dim;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double center = separation / (2.0 * std::sqrt(static_cast<double>(dim)));
    double max_norm = 0.0;
    for (int64_t s = 0; s < n; ++s) {
        double label = s % 2 == 0 ? 1.0 : -1.0;
        Vec x(static_cast<size_t>(dim));
        for (double& v : x) v = label * center + gauss(rng);
        max_norm = std::max(max_norm, norm2(x));
        data->x.push_back(std::move(x));
        data->y.push_back(label);
    }
    // Scale features so every sample norm is <= 1; per-sample gradient norms
    // are then bounded by 1 as well.
    if (max_norm > 0.0)
        for (Vec& x : data->x)
            for (double& v : x) v /= max_norm;

    Objective obj;
    obj.dim = dim;
    obj.n_samples = n;
    obj.grad_bound = 1.0;
    obj.eval = [data](const Vec& w) {
        double s = 0.0;
        for (int64_t i = 0; i < data->n; ++i)
            s += log_loss(data->y[static_cast<size_t>(i)] * dot(w, data->x[static_cast<size_t>(i)]));
        return s / static_cast<double>(data->n);
    };
    obj.grad = [data](const Vec& w) { return mean_grad(*data, w, 0, data->n); };
    obj.minibatch_grad = [data](const Vec& w, int64_t batch, int64_t batch_size) {
        if (batch_size < 1) throw std::invalid_argument("minibatch_grad: batch_size must be positive");
        int64_t first = batch * batch_size;
        if (first < 0 || first >= data->n) throw std::invalid_argument("minibatch_grad: batch out of range");
        return mean_grad(*data, w, first, std::min(data->n, first + batch_size));
    };
    return obj;
}

Vec finite_diff_grad(const Objective& obj, const Vec& theta, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: h must be positive");
    Vec g(theta.size());
    Vec probe = theta;
    for (size_t i = 0; i < theta.size(); ++i) {
        probe[i] = theta[i] + h;
        double up = obj.eval(probe);
        probe[i] = theta[i] - h;
        double down = obj.eval(probe);
        probe[i] = theta[i];
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

Vec noisy_gradient(const Objective& obj, const Vec& theta, std::mt19937_64& rng) {
    Vec g = obj.grad(theta);
    if (obj.noise_sigma > 0.0) {
        std::normal_distribution<double> gauss(
            0.0, obj.noise_sigma / std::sqrt(static_cast<double>(obj.dim)));
        for (double& v : g) v += gauss(rng);
    }
    return g;
}

}  // namespace microadam
