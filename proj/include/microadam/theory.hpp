#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace microadam {

/// Combined compression strength of a contractive compressor (factor q) and
/// an unbiased bounded one (factor omega). Convergence requires
/// q_omega = (1+omega)*q < 1; the constructor enforces it.
struct CompressionParams {
    double q = 0.0;
    double omega = 0.0;
    double q_omega = 0.0;

    CompressionParams(double q, double omega);
};

/// Problem-side constants feeding the rate bounds.
struct ProblemConstants {
    double G = 0.0;       ///< gradient-norm bound
    double sigma2 = 0.0;  ///< gradient variance bound
    double L = 0.0;       ///< smoothness
    double mu = 0.0;      ///< PL constant (only needed for pl_bound)
    double eps = 1e-8;
    double beta1 = 0.9;
    double f_gap = 0.0;  ///< f(theta_1) - f*
    int64_t dim = 0;
    int64_t T = 0;  ///< horizon
};

struct RateConstants {
    double C0 = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
};

/// Contraction factor of global top-k: sqrt(1 - k/d).
double topk_q(int64_t k, int64_t d);
/// Contraction factor of a rank-r projection of a d x d layer: sqrt(1 - r/d).
double lowrank_q(int64_t rank, int64_t d);

/// Relative-error factor of the bucketed b-bit quantizer on an n-coordinate
/// bucket with range [lo, hi]: sqrt(n-2)/(2^b - 1) * (hi-lo)/sqrt(hi^2+lo^2).
double quantizer_omega(int bits, int64_t n, double lo, double hi);
/// Numerical maximum of quantizer_omega over all ranges; attained at
/// lo = -hi, value sqrt(2)*sqrt(n-2)/(2^b - 1).
double quantizer_omega_worst(int bits, int64_t n);

/// C0 = sqrt(4(1+q_w^2)^3/(1-q_w^2)^2 * G^2 + eps)
/// C1 = beta1/(1-beta1)*(1+C2) + 2 q_w/(1-q_w^2)
/// C2 = omega*q*(1 + 2 q_w/(1-q_w^2))
RateConstants c_constants(const CompressionParams& cp, double G, double eps, double beta1);

/// Fixed-step rate bound for smooth non-convex objectives; requires
/// eta <= eps/(4 L C0).
double nonconvex_bound(const ProblemConstants& pc, const CompressionParams& cp, double eta);

/// Fixed-step rate bound under the PL inequality; requires eta <= eps/(4 L C0)
/// and mu > 0.
double pl_bound(const ProblemConstants& pc, const CompressionParams& cp, double eta, int64_t T);

/// Error-feedback norm threshold: ||e_t||^2 <= 4 q_w^2/(1-q_w^2)^2 * G^2.
double ef_bound(const CompressionParams& cp, double G);
/// Second-moment threshold: vhat_i <= 4(1+q_w^2)^3/(1-q_w^2)^2 * G^2.
double vhat_bound(const CompressionParams& cp, double G);

/// Inputs to the optimizer-state footprint model. Counts are doubles because
/// model sizes reach billions; all values of interest are exact in a double.
struct MemorySpec {
    double d = 0.0;  ///< parameter count
    double m = 0.0;  ///< window length
    double k = 0.0;  ///< coordinates kept per step
    double layer_row_sums = 0.0;  ///< sum of layer row counts (for the low-rank rows)
    double rank1_bytes = 0.0;     ///< state bytes of the rank-one layers
    double rank = 0.0;            ///< low-rank projection rank (0 = sweep defaults)
    int bits = 0;                 ///< low-rank state width in bits (0 = both)
};

struct MemoryRow {
    std::string label;
    double bytes = 0.0;
    double gib = 0.0;  ///< bytes / 2^30
};

/// Footprints in bytes: dense AdamW at fp32/fp16/8-bit, the windowed
/// optimizer (0.5 d + 4 m k), and, when layer_row_sums is set, the low-rank
/// AdamW variants (c * rank * layer_row_sums + 2 * rank1_bytes, with c = 6
/// for 16-bit state and c = 4 for 8-bit state).
std::vector<MemoryRow> memory_footprints(const MemorySpec& spec);

/// Window length at which the windowed optimizer's footprint matches 8-bit
/// AdamW: m = 1.5 d / (4 k).
double solve_mmax(double d, double k);

}  // namespace microadam
