#pragma once

#include <functional>
#include <optional>
#include <random>

#include "microadam/vec.hpp"

namespace microadam {

/// A differentiable test objective. Gradients are analytic; `noise_sigma`
/// (when positive) requests additive zero-mean perturbation with total
/// variance sigma^2, applied by noisy_gradient.
struct Objective {
    int64_t dim = 0;
    std::function<double(const Vec&)> eval;
    std::function<Vec(const Vec&)> grad;
    std::optional<Vec> optimum;
    double noise_sigma = 0.0;

    /// Mean gradient over samples [batch*batch_size, ...); only set for
    /// data-backed objectives.
    std::function<Vec(const Vec&, int64_t batch, int64_t batch_size)> minibatch_grad;
    int64_t n_samples = 0;

    double grad_bound = 0.0;  ///< known bound on per-sample gradient norms, 0 if unknown
    double pl_mu = 0.0;       ///< PL constant when known, 0 otherwise
    double smoothness = 0.0;  ///< Lipschitz constant of the gradient when known
};

/// f(x,y) = (1-x)^2 + 100(y-x^2)^2, minimum at (1,1).
Objective rosenbrock();

/// f(theta) = 1/2 sum a_i (theta_i - b_i)^2 with all a_i > 0. Satisfies the
/// PL inequality with mu = min(a); gradient Lipschitz constant max(a).
Objective quadratic(Vec a, Vec b);

/// Synthetic two-class logistic regression: n Gaussian samples around
/// +/- separation/2 class centers, features scaled so every sample norm is
/// <= 1 (hence per-sample gradient norms <= 1). Mean log-loss.
Objective logistic_regression(int64_t n, int64_t dim, double separation, uint64_t seed);

/// Central-difference gradient oracle.
Vec finite_diff_grad(const Objective& obj, const Vec& theta, double h);

/// Clean gradient plus per-coordinate N(0, sigma^2/dim) noise, so the total
/// injected variance is sigma^2.
Vec noisy_gradient(const Objective& obj, const Vec& theta, std::mt19937_64& rng);

}  // namespace microadam
