#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string_view>

#include "microadam/compress.hpp"
#include "microadam/problems.hpp"
#include "microadam/quantize.hpp"
#include "microadam/window.hpp"

namespace microadam {

struct HyperParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double lr = 1e-3;
    double weight_decay = 0.0;
    int64_t window = 10;            ///< m, rows kept for the sliding statistics
    double density = 0.01;          ///< fraction of coordinates selected per step
    std::optional<int64_t> k;       ///< explicit selection count; overrides density
    int bits = 4;                   ///< error-buffer code width
    int64_t block = 4096;           ///< block length for blockwise selection
    int64_t bucket = 64;            ///< quantization bucket length

    void validate() const;
    int64_t resolve_k(int64_t dim) const;
};

struct StepReport {
    double grad_norm = 0.0;    ///< norm of the gradient fed to the step
    double error_norm = 0.0;   ///< norm of the stored (decoded) error feedback
    double empirical_q = 0.0;  ///< residual fraction left by this step's compression
    int64_t update_nnz = 0;    ///< nonzero coordinates of the parameter update
    double loss = 0.0;         ///< objective after the step (filled by run)
};

class Optimizer {
public:
    virtual ~Optimizer() = default;
    virtual StepReport step(const Vec& grad) = 0;
    virtual const Vec& params() const = 0;
    virtual std::string_view name() const = 0;
};

/// Bias-corrected Adam: theta -= lr * mhat / (eps + sqrt(vhat)).
class AdamOptimizer : public Optimizer {
public:
    AdamOptimizer(Vec theta0, HyperParams hp);
    StepReport step(const Vec& grad) override;
    const Vec& params() const override { return theta_; }
    std::string_view name() const override { return "adam"; }

private:
    Vec theta_, m_, v_;
    HyperParams hp_;
    int64_t t_ = 0;
};

/// AMSGrad without bias correction: vhat = max(vhat, v),
/// theta -= lr * m / sqrt(vhat + eps).
class AmsgradOptimizer : public Optimizer {
public:
    AmsgradOptimizer(Vec theta0, HyperParams hp);
    StepReport step(const Vec& grad) override;
    const Vec& params() const override { return theta_; }
    std::string_view name() const override { return "amsgrad"; }
    const Vec& vhat() const { return vhat_; }

private:
    Vec theta_, m_, v_, vhat_;
    HyperParams hp_;
};

/// Adam fed the top-k compressed gradient, no error feedback: the unselected
/// part of every gradient is dropped outright.
class TopkAdamOptimizer : public Optimizer {
public:
    TopkAdamOptimizer(Vec theta0, HyperParams hp);
    StepReport step(const Vec& grad) override;
    const Vec& params() const override { return theta_; }
    std::string_view name() const override { return "topk_adam"; }

private:
    Vec theta_, m_, v_;
    HyperParams hp_;
    int64_t k_ = 0;
    int64_t t_ = 0;
};

/// The practical engine: quantized error feedback, top-k selection, and
/// moments recomputed from the sliding window each step.
/// Per step: a = grad + decode(error); select top-k of a; zero the selection
/// out of a; re-encode the residual as the new error; push the selection;
/// theta -= lr * mhat / (eps + sqrt(vhat)) with mhat, vhat from the window.
class MicroAdamOptimizer : public Optimizer {
public:
    /// `blockwise` switches selection from global top-k to per-block top-k.
    /// `lossless_error` stores the error densely instead of quantized (test
    /// hook for exact error-feedback accounting).
    MicroAdamOptimizer(Vec theta0, HyperParams hp, bool blockwise = false,
                       bool lossless_error = false);
    StepReport step(const Vec& grad) override;
    const Vec& params() const override { return theta_; }
    std::string_view name() const override { return "microadam"; }

    const GradientWindow& window() const { return window_; }
    const QuantizedErrorBuffer& error_buffer() const;
    bool lossless() const { return lossless_; }
    Vec error_vector() const;  ///< decoded error feedback
    const SparseSelection& last_selection() const { return last_sel_; }
    int64_t step_count() const { return window_.step; }
    const HyperParams& hyper() const { return hp_; }

private:
    Vec theta_;
    HyperParams hp_;
    int64_t k_ = 0;
    bool blockwise_ = false;
    bool lossless_ = false;
    std::optional<BlockLayout> layout_;
    GradientWindow window_;
    QuantizedErrorBuffer error_;
    Vec error_dense_;
    SparseSelection last_sel_;
};

using Compressor = std::function<Vec(const Vec&)>;

Compressor identity_compressor();
Compressor topk_compressor(int64_t k);
/// Encode/decode round trip through the bucketed quantizer; stochastic mode
/// draws from the supplied generator.
Compressor quantize_compressor(int bits, int64_t bucket, Rounding mode,
                               std::shared_ptr<std::mt19937_64> rng = nullptr);

/// The analytical engine: dense error feedback with arbitrary contractive (C)
/// and unbiased (Q) compressors, AMSGrad normalization.
/// Per step: gt = C(grad + e); e = Q(e + grad - gt); m, v EMAs of gt;
/// vhat = max(vhat, v); theta -= lr * m / sqrt(vhat + eps).
class AnalyticalMicroAdam : public Optimizer {
public:
    /// `q` and `omega` describe the supplied compressors; if (1+omega)*q >= 1
    /// a warning is emitted (convergence guarantees need it below 1).
    AnalyticalMicroAdam(Vec theta0, HyperParams hp, Compressor compress, Compressor requant,
                        double q = 0.0, double omega = 0.0);
    StepReport step(const Vec& grad) override;
    const Vec& params() const override { return theta_; }
    std::string_view name() const override { return "microadam_analytical"; }

    const Vec& vhat() const { return vhat_; }
    const Vec& error() const { return e_; }
    const Vec& last_compressed() const { return last_gt_; }
    bool warned() const { return warned_; }

private:
    Vec theta_, m_, v_, vhat_, e_, last_gt_;
    HyperParams hp_;
    Compressor compress_, requant_;
    bool warned_ = false;
};

/// Weight-decay variant: no vhat max, decay applied to the parameters first:
/// theta = (1 - lr*wd) * theta - lr * m / sqrt(v + eps).
class MicroAdamW : public Optimizer {
public:
    MicroAdamW(Vec theta0, HyperParams hp, Compressor compress, Compressor requant);
    StepReport step(const Vec& grad) override;
    const Vec& params() const override { return theta_; }
    std::string_view name() const override { return "microadamw"; }
    const Vec& error() const { return e_; }

private:
    Vec theta_, m_, v_, e_;
    HyperParams hp_;
    Compressor compress_, requant_;
};

enum class OptKind { adam, amsgrad, topk_adam, microadam, microadam_analytical, microadamw };
enum class Schedule { constant, invsqrt_t, log_t_over_t };

OptKind optimizer_from_name(std::string_view name);
Schedule schedule_from_name(std::string_view name);
/// Horizon-scaled fixed step: lr0, lr0/sqrt(T), or lr0*log(T)/T.
double effective_lr(double lr0, Schedule s, int64_t T);

std::unique_ptr<Optimizer> make_optimizer(OptKind kind, Vec theta0, const HyperParams& hp,
                                          bool blockwise = false);

struct Trajectory {
    std::vector<Vec> iterates;  ///< theta after each completed step
    std::vector<StepReport> reports;
    bool diverged = false;
    int64_t steps_completed = 0;
};

/// Drives `opt` on `obj` for T steps. Gradient noise follows obj.noise_sigma
/// (seeded); `clip` > 0 rescales gradients to at most that norm. Stops early
/// with `diverged` set once the parameter norm exceeds 1e8.
Trajectory run(Optimizer& opt, const Objective& obj, int64_t T, uint64_t seed, double clip = 0.0);

/// Convenience wrapper: builds the optimizer with the horizon-scaled step
/// size and runs it.
Trajectory run(OptKind kind, Vec theta0, HyperParams hp, const Objective& obj, int64_t T,
               Schedule schedule, uint64_t seed, double clip = 0.0, bool blockwise = false);

}  // namespace microadam
