#include "microadam/optim.hpp"

#include <iostream>

namespace microadam {

void HyperParams::validate() const {
    if (!(beta1 > 0.0 && beta1 < 1.0)) throw std::invalid_argument("HyperParams: beta1 must be in (0,1)");
    if (!(beta2 > 0.0 && beta2 < 1.0)) throw std::invalid_argument("HyperParams: beta2 must be in (0,1)");
    if (!(eps > 0.0)) throw std::invalid_argument("HyperParams: eps must be > 0");
    if (!(lr > 0.0)) throw std::invalid_argument("HyperParams: lr must be > 0");
    if (!(weight_decay >= 0.0)) throw std::invalid_argument("HyperParams: weight_decay must be >= 0");
    if (window < 1) throw std::invalid_argument("HyperParams: window must be >= 1");
    if (!(density > 0.0) || density > 1.0)
        throw std::invalid_argument("HyperParams: density must be in (0,1]");
    if (k && *k < 1) throw std::invalid_argument("HyperParams: k must be >= 1");
    if (bits < 1 || bits > 24) throw std::invalid_argument("HyperParams: bits must be in [1,24]");
    if (block < 1 || block > BlockLayout::kMaxBlock)
        throw std::invalid_argument("HyperParams: block must be in [1, 32767]");
    if (bucket < 1) throw std::invalid_argument("HyperParams: bucket must be >= 1");
}

int64_t HyperParams::resolve_k(int64_t dim) const {
    if (k) {
        if (*k > dim) throw std::invalid_argument("HyperParams: k exceeds dimension");
        return *k;
    }
    auto count = static_cast<int64_t>(std::ceil(density * static_cast<double>(dim)));
    return std::clamp<int64_t>(count, 1, dim);
}

namespace {

void check_grad(const Vec& grad, const Vec& theta) {
    if (grad.size() != theta.size()) throw std::invalid_argument("step: gradient dim mismatch");
    check_finite(grad, "step gradient");
}

}  // namespace

AdamOptimizer::AdamOptimizer(Vec theta0, HyperParams hp)
    : theta_(std::move(theta0)),
      m_(theta_.size(), 0.0),
      v_(theta_.size(), 0.0),
      hp_(hp) {
    hp_.validate();
}

StepReport AdamOptimizer::step(const Vec& grad) {
    check_grad(grad, theta_);
    ++t_;
    double c1 = 1.0 - std::pow(hp_.beta1, static_cast<double>(t_));
    double c2 = 1.0 - std::pow(hp_.beta2, static_cast<double>(t_));
    StepReport rep;
    rep.grad_norm = norm2(grad);
    for (size_t i = 0; i < theta_.size(); ++i) {
        m_[i] = hp_.beta1 * m_[i] + (1.0 - hp_.beta1) * grad[i];
        v_[i] = hp_.beta2 * v_[i] + (1.0 - hp_.beta2) * grad[i] * grad[i];
        double mhat = m_[i] / c1;
        double vhat = v_[i] / c2;
        double u = mhat / (hp_.eps + std::sqrt(vhat));
        if (u != 0.0) ++rep.update_nnz;
        theta_[i] -= hp_.lr * u;
    }
    return rep;
}

AmsgradOptimizer::AmsgradOptimizer(Vec theta0, HyperParams hp)
    : theta_(std::move(theta0)),
      m_(theta_.size(), 0.0),
      v_(theta_.size(), 0.0),
      vhat_(theta_.size(), 0.0),
      hp_(hp) {
    hp_.validate();
}

StepReport AmsgradOptimizer::step(const Vec& grad) {
    check_grad(grad, theta_);
    StepReport rep;
    rep.grad_norm = norm2(grad);
    for (size_t i = 0; i < theta_.size(); ++i) {
        m_[i] = hp_.beta1 * m_[i] + (1.0 - hp_.beta1) * grad[i];
        v_[i] = hp_.beta2 * v_[i] + (1.0 - hp_.beta2) * grad[i] * grad[i];
        vhat_[i] = std::max(vhat_[i], v_[i]);
        double u = m_[i] / std::sqrt(vhat_[i] + hp_.eps);
        if (u != 0.0) ++rep.update_nnz;
        theta_[i] -= hp_.lr * u;
    }
    return rep;
}

TopkAdamOptimizer::TopkAdamOptimizer(Vec theta0, HyperParams hp)
    : theta_(std::move(theta0)),
      m_(theta_.size(), 0.0),
      v_(theta_.size(), 0.0),
      hp_(hp) {
    hp_.validate();
    k_ = hp_.resolve_k(static_cast<int64_t>(theta_.size()));
}

StepReport TopkAdamOptimizer::step(const Vec& grad) {
    check_grad(grad, theta_);
    SparseSelection sel = topk_global(grad, k_);
    Vec g = embed(sel);
    ++t_;
    double c1 = 1.0 - std::pow(hp_.beta1, static_cast<double>(t_));
    double c2 = 1.0 - std::pow(hp_.beta2, static_cast<double>(t_));
    StepReport rep;
    rep.grad_norm = norm2(grad);
    double gn = rep.grad_norm;
    rep.empirical_q = gn > 0.0 ? norm2(zero_selected(grad, sel)) / gn : 0.0;
    // A plain adam step on the compressed gradient: the discarded coordinates
    // are simply lost (no error feedback), and stale momentum keeps pushing
    // previously selected coordinates.
    for (size_t i = 0; i < theta_.size(); ++i) {
        m_[i] = hp_.beta1 * m_[i] + (1.0 - hp_.beta1) * g[i];
        v_[i] = hp_.beta2 * v_[i] + (1.0 - hp_.beta2) * g[i] * g[i];
        double mhat = m_[i] / c1;
        double vhat = v_[i] / c2;
        double u = mhat / (hp_.eps + std::sqrt(vhat));
        if (u != 0.0) ++rep.update_nnz;
        theta_[i] -= hp_.lr * u;
    }
    return rep;
}

MicroAdamOptimizer::MicroAdamOptimizer(Vec theta0, HyperParams hp, bool blockwise,
                                       bool lossless_error)
    : theta_(std::move(theta0)),
      hp_(hp),
      blockwise_(blockwise),
      lossless_(lossless_error),
      window_(1, 1, 1) {
    hp_.validate();
    auto dim = static_cast<int64_t>(theta_.size());
    if (dim < 1) throw std::invalid_argument("MicroAdamOptimizer: empty parameter vector");
    if (blockwise_) {
        double density = hp_.k ? static_cast<double>(hp_.resolve_k(dim)) / static_cast<double>(dim)
                               : hp_.density;
        layout_ = BlockLayout::from_density(dim, std::min(hp_.block, dim), density);
        // Row width is the total selection size, constant across steps.
        k_ = 0;
        for (int64_t start = 0; start < dim; start += layout_->block)
            k_ += std::min(layout_->per_block_k, dim - start);
    } else {
        k_ = hp_.resolve_k(dim);
    }
    window_ = GradientWindow(dim, hp_.window, k_);
    if (lossless_)
        error_dense_.assign(theta_.size(), 0.0);
    else
        error_ = QuantizedErrorBuffer::zeros(dim, hp_.bits, hp_.bucket);
}

const QuantizedErrorBuffer& MicroAdamOptimizer::error_buffer() const {
    if (lossless_) throw std::logic_error("error_buffer: engine uses dense error storage");
    return error_;
}

Vec MicroAdamOptimizer::error_vector() const {
    return lossless_ ? error_dense_ : error_.decode();
}

StepReport MicroAdamOptimizer::step(const Vec& grad) {
    check_grad(grad, theta_);
    Vec e = error_vector();
    Vec a(theta_.size());
    for (size_t i = 0; i < a.size(); ++i) a[i] = grad[i] + e[i];
    SparseSelection sel = blockwise_ ? topk_blockwise(a, *layout_) : topk_global(a, k_);
    Vec resid = zero_selected(a, sel);
    if (lossless_)
        error_dense_ = resid;
    else
        error_ = QuantizedErrorBuffer::encode(resid, hp_.bits, hp_.bucket, Rounding::nearest);
    window_.push(sel);
    Vec mhat = window_.adam_stats(hp_.beta1, false);
    Vec vhat = window_.adam_stats(hp_.beta2, true);
    StepReport rep;
    rep.grad_norm = norm2(grad);
    double na = norm2(a);
    rep.empirical_q = na > 0.0 ? norm2(resid) / na : 0.0;
    rep.error_norm = norm2(error_vector());
    for (size_t i = 0; i < theta_.size(); ++i) {
        double u = mhat[i] / (hp_.eps + std::sqrt(vhat[i]));
        if (u != 0.0) ++rep.update_nnz;
        theta_[i] -= hp_.lr * u;
    }
    last_sel_ = std::move(sel);
    return rep;
}

Compressor identity_compressor() {
    return [](const Vec& x) { return x; };
}

Compressor topk_compressor(int64_t k) {
    return [k](const Vec& x) { return embed(topk_global(x, k)); };
}

Compressor quantize_compressor(int bits, int64_t bucket, Rounding mode,
                               std::shared_ptr<std::mt19937_64> rng) {
    if (mode == Rounding::stochastic && !rng)
        throw std::invalid_argument("quantize_compressor: stochastic mode needs an rng");
    return [bits, bucket, mode, rng](const Vec& x) {
        return QuantizedErrorBuffer::encode(x, bits, bucket, mode, rng.get()).decode();
    };
}

AnalyticalMicroAdam::AnalyticalMicroAdam(Vec theta0, HyperParams hp, Compressor compress,
                                         Compressor requant, double q, double omega)
    : theta_(std::move(theta0)),
      m_(theta_.size(), 0.0),
      v_(theta_.size(), 0.0),
      vhat_(theta_.size(), 0.0),
      e_(theta_.size(), 0.0),
      hp_(hp),
      compress_(std::move(compress)),
      requant_(std::move(requant)) {
    hp_.validate();
    if (!compress_ || !requant_)
        throw std::invalid_argument("AnalyticalMicroAdam: compressors must be callable");
    if ((1.0 + omega) * q >= 1.0) {
        warned_ = true;
        std::cerr << "warning: (1+omega)*q = " << (1.0 + omega) * q
                  << " >= 1; error feedback may not contract\n";
    }
}

StepReport AnalyticalMicroAdam::step(const Vec& grad) {
    check_grad(grad, theta_);
    Vec acc(theta_.size());
    for (size_t i = 0; i < acc.size(); ++i) acc[i] = grad[i] + e_[i];
    Vec gt = compress_(acc);
    if (gt.size() != theta_.size())
        throw std::invalid_argument("AnalyticalMicroAdam: compressor changed dimension");
    Vec pre(theta_.size());
    for (size_t i = 0; i < pre.size(); ++i) pre[i] = acc[i] - gt[i];
    e_ = requant_(pre);
    if (e_.size() != theta_.size())
        throw std::invalid_argument("AnalyticalMicroAdam: requantizer changed dimension");
    StepReport rep;
    rep.grad_norm = norm2(grad);
    double na = norm2(acc);
    rep.empirical_q = na > 0.0 ? norm2(pre) / na : 0.0;
    rep.error_norm = norm2(e_);
    for (size_t i = 0; i < theta_.size(); ++i) {
        m_[i] = hp_.beta1 * m_[i] + (1.0 - hp_.beta1) * gt[i];
        v_[i] = hp_.beta2 * v_[i] + (1.0 - hp_.beta2) * gt[i] * gt[i];
        vhat_[i] = std::max(vhat_[i], v_[i]);
        double u = m_[i] / std::sqrt(vhat_[i] + hp_.eps);
        if (u != 0.0) ++rep.update_nnz;
        theta_[i] -= hp_.lr * u;
    }
    last_gt_ = std::move(gt);
    return rep;
}

MicroAdamW::MicroAdamW(Vec theta0, HyperParams hp, Compressor compress, Compressor requant)
    : theta_(std::move(theta0)),
      m_(theta_.size(), 0.0),
      v_(theta_.size(), 0.0),
      e_(theta_.size(), 0.0),
      hp_(hp),
      compress_(std::move(compress)),
      requant_(std::move(requant)) {
    hp_.validate();
    if (!compress_ || !requant_)
        throw std::invalid_argument("MicroAdamW: compressors must be callable");
}

StepReport MicroAdamW::step(const Vec& grad) {
    check_grad(grad, theta_);
    Vec acc(theta_.size());
    for (size_t i = 0; i < acc.size(); ++i) acc[i] = grad[i] + e_[i];
    Vec gt = compress_(acc);
    if (gt.size() != theta_.size())
        throw std::invalid_argument("MicroAdamW: compressor changed dimension");
    Vec pre(theta_.size());
    for (size_t i = 0; i < pre.size(); ++i) pre[i] = acc[i] - gt[i];
    e_ = requant_(pre);
    StepReport rep;
    rep.grad_norm = norm2(grad);
    double na = norm2(acc);
    rep.empirical_q = na > 0.0 ? norm2(pre) / na : 0.0;
    rep.error_norm = norm2(e_);
    double decay = 1.0 - hp_.lr * hp_.weight_decay;
    for (size_t i = 0; i < theta_.size(); ++i) {
        m_[i] = hp_.beta1 * m_[i] + (1.0 - hp_.beta1) * gt[i];
        v_[i] = hp_.beta2 * v_[i] + (1.0 - hp_.beta2) * gt[i] * gt[i];
        double u = m_[i] / std::sqrt(v_[i] + hp_.eps);
        if (u != 0.0) ++rep.update_nnz;
        theta_[i] = decay * theta_[i] - hp_.lr * u;
    }
    return rep;
}

OptKind optimizer_from_name(std::string_view name) {
    if (name == "adam") return OptKind::adam;
    if (name == "amsgrad") return OptKind::amsgrad;
    if (name == "topk_adam") return OptKind::topk_adam;
    if (name == "microadam") return OptKind::microadam;
    if (name == "microadam_analytical") return OptKind::microadam_analytical;
    if (name == "microadamw") return OptKind::microadamw;
    throw std::invalid_argument("unknown optimizer: " + std::string(name));
}

Schedule schedule_from_name(std::string_view name) {
    if (name == "constant") return Schedule::constant;
    if (name == "invsqrt") return Schedule::invsqrt_t;
    if (name == "logt") return Schedule::log_t_over_t;
    throw std::invalid_argument("unknown schedule: " + std::string(name));
}

double effective_lr(double lr0, Schedule s, int64_t T) {
    if (T < 1) throw std::invalid_argument("effective_lr: T must be >= 1");
    double t = static_cast<double>(T);
    switch (s) {
        case Schedule::constant: return lr0;
        case Schedule::invsqrt_t: return lr0 / std::sqrt(t);
        case Schedule::log_t_over_t: return lr0 * std::log(t) / t;
    }
    throw std::logic_error("effective_lr: bad schedule");
}

std::unique_ptr<Optimizer> make_optimizer(OptKind kind, Vec theta0, const HyperParams& hp,
                                          bool blockwise) {
    auto dim = static_cast<int64_t>(theta0.size());
    switch (kind) {
        case OptKind::adam: return std::make_unique<AdamOptimizer>(std::move(theta0), hp);
        case OptKind::amsgrad: return std::make_unique<AmsgradOptimizer>(std::move(theta0), hp);
        case OptKind::topk_adam:
            return std::make_unique<TopkAdamOptimizer>(std::move(theta0), hp);
        case OptKind::microadam:
            return std::make_unique<MicroAdamOptimizer>(std::move(theta0), hp, blockwise);
        case OptKind::microadam_analytical: {
            int64_t k = hp.resolve_k(dim);
            return std::make_unique<AnalyticalMicroAdam>(std::move(theta0), hp, topk_compressor(k),
                                                         identity_compressor(),
                                                         std::sqrt(1.0 - static_cast<double>(k) /
                                                                             static_cast<double>(dim)),
                                                         0.0);
        }
        case OptKind::microadamw: {
            int64_t k = hp.resolve_k(dim);
            return std::make_unique<MicroAdamW>(std::move(theta0), hp, topk_compressor(k),
                                                identity_compressor());
        }
    }
    throw std::logic_error("make_optimizer: bad kind");
}

Trajectory run(Optimizer& opt, const Objective& obj, int64_t T, uint64_t seed, double clip) {
    if (T < 1) throw std::invalid_argument("run: T must be >= 1");
    if (obj.dim != static_cast<int64_t>(opt.params().size()))
        throw std::invalid_argument("run: problem/optimizer dimension mismatch");
    Trajectory traj;
    std::mt19937_64 rng(seed);
    for (int64_t t = 0; t < T; ++t) {
        Vec g = noisy_gradient(obj, opt.params(), rng);
        if (clip > 0.0) {
            double gn = norm2(g);
            if (gn > clip)
                for (double& x : g) x *= clip / gn;
        }
        StepReport rep = opt.step(g);
        rep.loss = obj.eval(opt.params());
        traj.iterates.push_back(opt.params());
        traj.reports.push_back(rep);
        ++traj.steps_completed;
        if (norm2(opt.params()) > 1e8) {
            traj.diverged = true;
            break;
        }
    }
    return traj;
}

Trajectory run(OptKind kind, Vec theta0, HyperParams hp, const Objective& obj, int64_t T,
               Schedule schedule, uint64_t seed, double clip, bool blockwise) {
    hp.lr = effective_lr(hp.lr, schedule, T);
    auto opt = make_optimizer(kind, std::move(theta0), hp, blockwise);
    return run(*opt, obj, T, seed, clip);
}

}  // namespace microadam
