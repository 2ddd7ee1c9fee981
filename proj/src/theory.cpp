#include "microadam/theory.hpp"

#include <cmath>
#include <stdexcept>

namespace microadam {

namespace {

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

}  // namespace

CompressionParams::CompressionParams(double q_, double omega_) : q(q_), omega(omega_) {
    if (!(q >= 0.0) || q >= 1.0)
        throw std::domain_error("CompressionParams: q must be in [0, 1)");
    if (!(omega >= 0.0)) throw std::domain_error("CompressionParams: omega must be >= 0");
    q_omega = (1.0 + omega) * q;
    if (q_omega >= 1.0)
        throw std::domain_error("CompressionParams: q_omega = (1+omega)*q = " + fmt(q_omega) +
                                " >= 1; convergence requires (1+omega)*q < 1");
}

double topk_q(int64_t k, int64_t d) {
    if (d < 1 || k < 1 || k > d) throw std::invalid_argument("topk_q: need 1 <= k <= d");
    return std::sqrt(1.0 - static_cast<double>(k) / static_cast<double>(d));
}

double lowrank_q(int64_t rank, int64_t d) {
    if (d < 1 || rank < 1 || rank > d) throw std::invalid_argument("lowrank_q: need 1 <= rank <= d");
    return std::sqrt(1.0 - static_cast<double>(rank) / static_cast<double>(d));
}

double quantizer_omega(int bits, int64_t n, double lo, double hi) {
    if (n < 3) throw std::invalid_argument("quantizer_omega: bucket must have n >= 3");
    if (bits < 1) throw std::invalid_argument("quantizer_omega: bits must be >= 1");
    if (lo > hi) throw std::invalid_argument("quantizer_omega: lo > hi");
    double denom = std::sqrt(hi * hi + lo * lo);
    if (denom == 0.0) throw std::invalid_argument("quantizer_omega: lo = hi = 0");
    double levels = std::pow(2.0, bits) - 1.0;
    return std::sqrt(static_cast<double>(n - 2)) / levels * (hi - lo) / denom;
}

double quantizer_omega_worst(int bits, int64_t n) {
    if (n < 3) throw std::invalid_argument("quantizer_omega_worst: bucket must have n >= 3");
    if (bits < 1) throw std::invalid_argument("quantizer_omega_worst: bits must be >= 1");
    // The range factor (hi-lo)/sqrt(hi^2+lo^2) is scale-invariant, so sweep
    // the direction angle: (lo, hi) = (cos a, sin a) with hi >= lo.
    const double pi = std::acos(-1.0);
    double best = 0.0;
    const int grid = 200000;
    for (int i = 0; i <= grid; ++i) {
        double a = pi / 4.0 + pi * static_cast<double>(i) / grid;
        double lo = std::cos(a), hi = std::sin(a);
        if (hi < lo) continue;
        best = std::max(best, hi - lo);  // norm of (lo, hi) is 1
    }
    double levels = std::pow(2.0, bits) - 1.0;
    return std::sqrt(static_cast<double>(n - 2)) / levels * best;
}

RateConstants c_constants(const CompressionParams& cp, double G, double eps, double beta1) {
    if (!(G >= 0.0)) throw std::invalid_argument("c_constants: G must be >= 0");
    if (!(eps > 0.0)) throw std::invalid_argument("c_constants: eps must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0))
        throw std::invalid_argument("c_constants: beta1 must be in [0, 1)");
    double qw = cp.q_omega;
    double qw2 = qw * qw;
    double contraction_gain = 2.0 * qw / (1.0 - qw2);
    RateConstants c;
    c.C0 = std::sqrt(4.0 * std::pow(1.0 + qw2, 3) / ((1.0 - qw2) * (1.0 - qw2)) * G * G + eps);
    c.C2 = cp.omega * cp.q * (1.0 + contraction_gain);
    c.C1 = beta1 / (1.0 - beta1) * (1.0 + c.C2) + contraction_gain;
    return c;
}

namespace {

void check_step_size(const ProblemConstants& pc, double C0, double eta) {
    if (!(eta > 0.0)) throw std::domain_error("rate bound: eta must be > 0");
    double cap = pc.eps / (4.0 * pc.L * C0);
    if (eta > cap)
        throw std::domain_error("rate bound: eta = " + fmt(eta) + " exceeds eps/(4*L*C0) = " +
                                fmt(cap));
}

}  // namespace

double nonconvex_bound(const ProblemConstants& pc, const CompressionParams& cp, double eta) {
    if (pc.T < 1) throw std::invalid_argument("nonconvex_bound: T must be >= 1");
    RateConstants c = c_constants(cp, pc.G, pc.eps, pc.beta1);
    check_step_size(pc, c.C0, eta);
    double G2 = pc.G * pc.G;
    double d = static_cast<double>(pc.dim);
    double T = static_cast<double>(pc.T);
    double sum = pc.f_gap / (T * eta);
    sum += eta * pc.L * (pc.sigma2 + c.C2 * c.C2 * G2) / pc.eps;
    sum += eta * eta * pc.L * pc.L * c.C0 * c.C1 * c.C1 * G2 / (pc.eps * pc.eps);
    sum += (1.0 + c.C1) * G2 * d / (T * std::sqrt(pc.eps));
    sum += eta * (1.0 + 2.0 * c.C1) * c.C1 * pc.L * G2 * d / (T * pc.eps);
    return 2.0 * c.C0 * sum;
}

double pl_bound(const ProblemConstants& pc, const CompressionParams& cp, double eta, int64_t T) {
    if (T < 1) throw std::invalid_argument("pl_bound: T must be >= 1");
    if (!(pc.mu > 0.0)) throw std::invalid_argument("pl_bound: mu must be > 0");
    RateConstants c = c_constants(cp, pc.G, pc.eps, pc.beta1);
    check_step_size(pc, c.C0, eta);
    double G2 = pc.G * pc.G;
    double d = static_cast<double>(pc.dim);
    double geometric = std::pow(1.0 - eta * pc.mu / c.C0, static_cast<double>(T)) * pc.f_gap;
    double linear = pc.L * c.C0 * (pc.sigma2 + (c.C1 + c.C2 * c.C2) * G2) / (pc.mu * pc.eps) +
                    ((1.0 + c.C1) * d + c.C1) * G2 / std::sqrt(pc.eps);
    double quad = 3.0 * pc.L * pc.L * c.C0 * c.C1 * c.C1 * G2 /
                      (2.0 * pc.mu * std::pow(pc.eps, 1.5)) +
                  (1.0 + 2.0 * c.C1) * c.C1 * pc.L * G2 * d / pc.eps +
                  pc.L * c.C1 * c.C1 * G2 / (2.0 * pc.eps);
    return geometric + eta * linear + eta * eta * quad;
}

double ef_bound(const CompressionParams& cp, double G) {
    double qw2 = cp.q_omega * cp.q_omega;
    return 4.0 * qw2 / ((1.0 - qw2) * (1.0 - qw2)) * G * G;
}

double vhat_bound(const CompressionParams& cp, double G) {
    double qw2 = cp.q_omega * cp.q_omega;
    return 4.0 * std::pow(1.0 + qw2, 3) / ((1.0 - qw2) * (1.0 - qw2)) * G * G;
}

std::vector<MemoryRow> memory_footprints(const MemorySpec& spec) {
    if (!(spec.d > 0.0)) throw std::invalid_argument("memory_footprints: d must be positive");
    if (spec.k > spec.d) throw std::invalid_argument("memory_footprints: k must be <= d");
    if (spec.m < 0.0 || spec.k < 0.0)
        throw std::invalid_argument("memory_footprints: counts must be nonnegative");
    auto row = [](std::string label, double bytes) {
        return MemoryRow{std::move(label), bytes, bytes / 1073741824.0};
    };
    std::vector<MemoryRow> rows;
    rows.push_back(row("adamw_fp32", 8.0 * spec.d));
    rows.push_back(row("adamw_fp16", 4.0 * spec.d));
    rows.push_back(row("adamw_8bit", 2.0 * spec.d));
    rows.push_back(row("microadam", 0.5 * spec.d + 4.0 * spec.m * spec.k));
    if (spec.layer_row_sums > 0.0) {
        auto galore = [&](int bits, double rank) {
            double c = bits == 16 ? 6.0 : 4.0;
            char label[64];
            std::snprintf(label, sizeof label, "galore_%dbit_r%.0f", bits, rank);
            rows.push_back(row(label, c * rank * spec.layer_row_sums + 2.0 * spec.rank1_bytes));
        };
        std::vector<double> ranks =
            spec.rank > 0.0 ? std::vector<double>{spec.rank} : std::vector<double>{256.0, 1024.0};
        std::vector<int> widths = spec.bits == 0 ? std::vector<int>{8, 16} : std::vector<int>{spec.bits};
        for (int b : widths) {
            if (b != 8 && b != 16)
                throw std::invalid_argument("memory_footprints: low-rank state width must be 8 or 16");
            for (double r : ranks) galore(b, r);
        }
    }
    return rows;
}

double solve_mmax(double d, double k) {
    if (!(k > 0.0)) throw std::invalid_argument("solve_mmax: k must be positive");
    return 1.5 * d / (4.0 * k);
}

}  // namespace microadam
