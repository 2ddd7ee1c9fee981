#include "microadam/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "microadam/checkpoint.hpp"
#include "microadam/optim.hpp"
#include "microadam/theory.hpp"

namespace microadam::cli {

namespace {

std::string g17(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string g10(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

/// Relative output paths land in MICROADAM_OUT_DIR when it is set.
std::string resolve_out(const std::string& path) {
    const char* dir = std::getenv("MICROADAM_OUT_DIR");
    if (dir == nullptr || *dir == '\0') return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(dir) / p).string();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(resolve_out(path), std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    return os;
}

Vec parse_vec(const std::string& csv, const char* what) {
    Vec out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t pos = 0;
        double v = std::stod(item, &pos);
        if (pos != item.size()) throw std::invalid_argument(std::string(what) + ": bad number '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument(std::string(what) + ": empty list");
    return out;
}

struct RunOptions {
    std::string problem = "rosenbrock";
    std::string optimizer = "microadam";
    std::string schedule = "constant";
    std::string out;
    std::string checkpoint;
    std::string config;
    std::string theta0;
    std::string quad_a = "1,100";
    std::string quad_b = "1,1";
    int64_t steps = 500;
    uint64_t seed = 0;
    uint64_t problem_seed = 1;
    int64_t logistic_n = 200;
    int64_t logistic_dim = 16;
    double logistic_sep = 2.0;
    double noise_sigma = 0.0;
    double clip = 0.0;
    bool blockwise = false;
    HyperParams hp;
};

Objective build_problem(const RunOptions& o) {
    if (o.problem == "rosenbrock") return rosenbrock();
    if (o.problem == "quadratic")
        return quadratic(parse_vec(o.quad_a, "--quad-a"), parse_vec(o.quad_b, "--quad-b"));
    if (o.problem == "logistic")
        return logistic_regression(o.logistic_n, o.logistic_dim, o.logistic_sep, o.problem_seed);
    throw std::invalid_argument("unknown problem: " + o.problem);
}

Vec initial_point(const RunOptions& o, const Objective& obj) {
    if (!o.theta0.empty()) {
        Vec t = parse_vec(o.theta0, "--theta0");
        if (static_cast<int64_t>(t.size()) != obj.dim)
            throw std::invalid_argument("--theta0: expected " + std::to_string(obj.dim) + " values");
        return t;
    }
    if (o.problem == "rosenbrock") return Vec{-0.5, 1.0};
    return Vec(static_cast<size_t>(obj.dim), 0.0);
}

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
    OptKind kind = optimizer_from_name(o.optimizer);
    if (!o.checkpoint.empty() && kind != OptKind::microadam)
        throw std::invalid_argument("--checkpoint requires --optimizer microadam");
    if (o.steps < 1) throw std::invalid_argument("--steps must be >= 1");
    Objective obj = build_problem(o);
    obj.noise_sigma = o.noise_sigma;
    Vec theta0 = initial_point(o, obj);

    HyperParams hp = o.hp;
    hp.lr = effective_lr(hp.lr, schedule_from_name(o.schedule), o.steps);
    auto opt = make_optimizer(kind, std::move(theta0), hp, o.blockwise);
    Trajectory traj = run(*opt, obj, o.steps, o.seed, o.clip);

    std::ofstream os = open_out(o.out);
    os << "step,loss,grad_norm,error_norm,update_nnz";
    for (int64_t i = 0; i < obj.dim; ++i) os << ",theta" << i;
    os << "\n";
    for (int64_t t = 0; t < traj.steps_completed; ++t) {
        const StepReport& r = traj.reports[static_cast<size_t>(t)];
        os << t + 1 << ',' << g17(r.loss) << ',' << g17(r.grad_norm) << ',' << g17(r.error_norm)
           << ',' << r.update_nnz;
        for (double x : traj.iterates[static_cast<size_t>(t)]) os << ',' << g17(x);
        os << "\n";
    }
    if (traj.diverged) {
        os << "# diverged: parameter norm exceeded 1e8 at step " << traj.steps_completed << "\n";
        os.flush();
        err << "error: run diverged at step " << traj.steps_completed << " (partial CSV written)\n";
        return 3;
    }
    os.flush();
    if (!os) throw std::runtime_error("write failed: " + o.out);
    if (!o.checkpoint.empty())
        save_checkpoint(resolve_out(o.checkpoint), dynamic_cast<const MicroAdamOptimizer&>(*opt));
    out << "wrote " << traj.steps_completed << " rows to " << o.out << "\n";
    return 0;
}

struct MemoryOptions {
    std::string model;
    std::string format = "text";
    double d = 0.0;
    double m = 10.0;
    double k = -1.0;  // default: ceil(d/100)
    double sum_a = 0.0;
    double eps1 = 0.0;
    double rank = 0.0;
    int bits = 0;
    bool galore = false;
};

int cmd_memory(const MemoryOptions& o, std::ostream& out, std::ostream&) {
    MemorySpec spec;
    if (!o.model.empty()) {
        if (o.model != "llama2-7b") throw std::invalid_argument("unknown model: " + o.model);
        spec.d = 6738415616.0;
        spec.layer_row_sums = 1423872.0;
        spec.rank1_bytes = 266240.0;
    }
    if (o.d > 0.0) spec.d = o.d;
    if (!(spec.d > 0.0)) throw std::invalid_argument("memory: provide --model or --d");
    spec.m = o.m;
    spec.k = o.k >= 0.0 ? o.k : std::ceil(spec.d / 100.0);
    if (o.sum_a > 0.0) spec.layer_row_sums = o.sum_a;
    if (o.eps1 > 0.0) spec.rank1_bytes = o.eps1;
    if (o.galore) {
        if (!(spec.layer_row_sums > 0.0))
            throw std::invalid_argument("--galore needs --model llama2-7b or --sum-a");
        spec.rank = o.rank;
        spec.bits = o.bits;
    } else if (o.model.empty()) {
        spec.layer_row_sums = 0.0;  // low-rank rows only for the built-in model or --galore
    }
    auto rows = memory_footprints(spec);
    if (o.format == "csv") {
        out << "optimizer,bytes,gb\n";
        for (const auto& r : rows) {
            char line[128];
            std::snprintf(line, sizeof line, "%s,%.0f,%.2f\n", r.label.c_str(), r.bytes, r.gib);
            out << line;
        }
    } else if (o.format == "text") {
        char line[128];
        std::snprintf(line, sizeof line, "%-20s %16s %10s\n", "optimizer", "bytes", "GB");
        out << line;
        for (const auto& r : rows) {
            std::snprintf(line, sizeof line, "%-20s %16.0f %10.2f\n", r.label.c_str(), r.bytes, r.gib);
            out << line;
        }
    } else {
        throw std::invalid_argument("unknown format: " + o.format);
    }
    return 0;
}

struct ConstantsOptions {
    double q = -1.0;
    int64_t k = 0;
    int64_t d = 0;
    double omega = -1.0;
    int bits = 0;
    int64_t bucket = 0;
    double G = 1.0;
    double eps = 1e-8;
    double beta1 = 0.9;
};

int cmd_constants(const ConstantsOptions& o, std::ostream& out, std::ostream&) {
    double q;
    if (o.q >= 0.0 && (o.k > 0 || o.d > 0))
        throw std::invalid_argument("constants: give either --q or --k/--d, not both");
    if (o.q >= 0.0) {
        q = o.q;
    } else if (o.k > 0 && o.d > 0) {
        q = topk_q(o.k, o.d);
    } else {
        throw std::invalid_argument("constants: provide --q or both --k and --d");
    }
    double omega;
    if (o.omega >= 0.0 && o.bits > 0)
        throw std::invalid_argument("constants: give either --omega or --bits/--bucket, not both");
    if (o.omega >= 0.0) {
        omega = o.omega;
    } else if (o.bits > 0 && o.bucket > 0) {
        omega = quantizer_omega_worst(o.bits, o.bucket);
    } else {
        omega = 0.0;
    }
    CompressionParams cp(q, omega);  // rejects q_omega >= 1 with the condition in the message
    RateConstants c = c_constants(cp, o.G, o.eps, o.beta1);
    out << "q = " << g10(cp.q) << "\n";
    out << "omega = " << g10(cp.omega) << "\n";
    out << "q_omega = " << g10(cp.q_omega) << "\n";
    out << "C0 = " << g10(c.C0) << "\n";
    out << "C1 = " << g10(c.C1) << "\n";
    out << "C2 = " << g10(c.C2) << "\n";
    out << "ef_bound = " << g10(ef_bound(cp, o.G)) << "\n";
    out << "vhat_bound = " << g10(vhat_bound(cp, o.G)) << "\n";
    return 0;
}

struct EfLowrankOptions {
    int64_t rows = 32;
    int64_t cols = 32;
    int64_t rank = 4;
    int64_t period = 200;
    int64_t steps = 1000;
    uint64_t seed = 0;
    double lr = 0.01;
    std::string out;
};

int cmd_ef_lowrank(const EfLowrankOptions& o, std::ostream& out, std::ostream&) {
    if (o.rows < 2 || o.cols < 2 || o.rows > 256 || o.cols > 256)
        throw std::invalid_argument("ef_lowrank: dims must be in [2, 256]");
    if (o.rank < 1 || o.rank > std::min(o.rows, o.cols))
        throw std::invalid_argument("ef_lowrank: rank out of range [1, min(rows, cols)]");
    if (o.steps < 1) throw std::invalid_argument("ef_lowrank: steps must be >= 1");
    if (o.period < 0) throw std::invalid_argument("ef_lowrank: period must be >= 0");

    auto n = static_cast<size_t>(o.rows * o.cols);
    std::mt19937_64 rng(o.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> curvature(0.5, 1.5);
    Vec target(n), curv(n);
    for (double& x : target) x = gauss(rng);
    for (double& x : curv) x = curvature(rng);

    HyperParams hp;
    hp.lr = o.lr;
    AdamOptimizer adam(Vec(n, 0.0), hp);
    Vec e(n, 0.0);
    SubspaceBasis basis;

    std::ofstream os = open_out(o.out);
    os << "step,grad_norm,error_norm,proj_norm\n";
    for (int64_t t = 1; t <= o.steps; ++t) {
        const Vec& w = adam.params();
        Vec g(n);
        for (size_t i = 0; i < n; ++i) g[i] = curv[i] * (w[i] - target[i]);
        Vec acc(n);
        for (size_t i = 0; i < n; ++i) acc[i] = g[i] + e[i];
        Mat acc_mat(o.rows, o.cols);
        acc_mat.data = acc;
        if (t == 1 || (o.period > 0 && (t - 1) % o.period == 0))
            basis = subspace_from_accumulator(acc_mat, o.rank);
        Mat proj = lowrank_project(acc_mat, basis);
        for (size_t i = 0; i < n; ++i) e[i] = acc[i] - proj.data[i];
        adam.step(proj.data);
        Mat e_mat(o.rows, o.cols);
        e_mat.data = e;
        double proj_e = norm2(lowrank_project(e_mat, basis).data);
        os << t << ',' << g17(norm2(g)) << ',' << g17(norm2(e)) << ',' << g17(proj_e) << "\n";
    }
    os.flush();
    if (!os) throw std::runtime_error("write failed: " + o.out);
    out << "wrote " << o.steps << " rows to " << o.out << "\n";
    return 0;
}

/// Fills option defaults from a flat JSON config object; values supplied on
/// the command line take precedence.
void apply_config(const CLI::App& sub, const std::string& path,
                  const std::map<std::string, std::function<void(const nlohmann::json&)>>& setters) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config file: " + path);
    nlohmann::json doc = nlohmann::json::parse(is);
    if (!doc.is_object()) throw std::invalid_argument("config file must be a flat JSON object");
    for (const auto& [key, value] : doc.items()) {
        auto it = setters.find(key);
        if (it == setters.end()) throw std::invalid_argument("unknown config key: " + key);
        const CLI::Option* opt = sub.get_option_no_throw("--" + key);
        if (opt != nullptr && opt->count() > 0) continue;  // flag overrides file
        it->second(value);
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"microadam: compressed-state adaptive optimizer toolkit"};
    app.require_subcommand(1);

    RunOptions ro;
    CLI::App* run_cmd = app.add_subcommand("run", "run an optimizer on a problem, write a CSV trajectory");
    run_cmd->add_option("--problem", ro.problem, "rosenbrock | quadratic | logistic");
    run_cmd->add_option("--optimizer", ro.optimizer,
                        "adam | amsgrad | topk_adam | microadam | microadam_analytical | microadamw");
    run_cmd->add_option("--steps", ro.steps, "number of steps");
    run_cmd->add_option("--seed", ro.seed, "noise seed");
    run_cmd->add_option("--out", ro.out, "output CSV path")->required();
    run_cmd->add_option("--checkpoint", ro.checkpoint, "dump final optimizer state here");
    run_cmd->add_option("--config", ro.config, "flat JSON config file (flags override)");
    run_cmd->add_option("--theta0", ro.theta0, "comma-separated start point");
    run_cmd->add_option("--schedule", ro.schedule, "constant | invsqrt | logt");
    run_cmd->add_option("--noise-sigma", ro.noise_sigma, "gradient noise level");
    run_cmd->add_option("--clip", ro.clip, "gradient norm clip (0 = off)");
    run_cmd->add_flag("--blockwise", ro.blockwise, "blockwise top-k selection");
    run_cmd->add_option("--lr", ro.hp.lr, "base step size");
    run_cmd->add_option("--beta1", ro.hp.beta1, "first-moment decay");
    run_cmd->add_option("--beta2", ro.hp.beta2, "second-moment decay");
    run_cmd->add_option("--eps", ro.hp.eps, "stability constant");
    run_cmd->add_option("--weight-decay", ro.hp.weight_decay, "decoupled weight decay");
    run_cmd->add_option("--window", ro.hp.window, "sliding-window length m");
    run_cmd->add_option("--density", ro.hp.density, "fraction of coordinates kept");
    int64_t explicit_k = 0;
    run_cmd->add_option("--k", explicit_k, "coordinates kept per step (overrides --density)");
    run_cmd->add_option("--bits", ro.hp.bits, "error-buffer code width");
    run_cmd->add_option("--block", ro.hp.block, "block length for --blockwise");
    run_cmd->add_option("--bucket", ro.hp.bucket, "quantization bucket length");
    run_cmd->add_option("--quad-a", ro.quad_a, "quadratic curvatures (comma list)");
    run_cmd->add_option("--quad-b", ro.quad_b, "quadratic optimum (comma list)");
    run_cmd->add_option("--logistic-n", ro.logistic_n, "logistic sample count");
    run_cmd->add_option("--logistic-dim", ro.logistic_dim, "logistic dimension");
    run_cmd->add_option("--logistic-sep", ro.logistic_sep, "logistic class separation");
    run_cmd->add_option("--problem-seed", ro.problem_seed, "data-generation seed");

    MemoryOptions mo;
    CLI::App* mem_cmd = app.add_subcommand("memory", "optimizer-state footprint table");
    mem_cmd->add_option("--model", mo.model, "built-in model name (llama2-7b)");
    mem_cmd->add_option("--format", mo.format, "text | csv");
    mem_cmd->add_option("--d", mo.d, "parameter count");
    mem_cmd->add_option("--m", mo.m, "window length");
    mem_cmd->add_option("--k", mo.k, "kept coordinates (default ceil(d/100))");
    mem_cmd->add_option("--sum-a", mo.sum_a, "sum of layer row counts");
    mem_cmd->add_option("--eps1", mo.eps1, "rank-one layer state bytes");
    mem_cmd->add_option("--rank", mo.rank, "low-rank projection rank");
    mem_cmd->add_option("--bits", mo.bits, "low-rank state width (8 or 16)");
    mem_cmd->add_flag("--galore", mo.galore, "restrict to the low-rank variant rows");

    ConstantsOptions co;
    CLI::App* const_cmd = app.add_subcommand("constants", "rate-bound constants");
    const_cmd->add_option("--q", co.q, "contraction factor");
    const_cmd->add_option("--k", co.k, "kept coordinates (with --d)");
    const_cmd->add_option("--d", co.d, "dimension (with --k)");
    const_cmd->add_option("--omega", co.omega, "quantizer factor");
    const_cmd->add_option("--bits", co.bits, "quantizer code width (with --bucket)");
    const_cmd->add_option("--bucket", co.bucket, "quantizer bucket length (with --bits)");
    const_cmd->add_option("--G", co.G, "gradient-norm bound");
    const_cmd->add_option("--eps", co.eps, "stability constant");
    const_cmd->add_option("--beta1", co.beta1, "first-moment decay");

    EfLowrankOptions eo;
    CLI::App* ef_cmd = app.add_subcommand("ef_lowrank", "low-rank projection error-feedback diagnostic");
    ef_cmd->add_option("--rows", eo.rows, "layer rows");
    ef_cmd->add_option("--cols", eo.cols, "layer cols");
    ef_cmd->add_option("--rank", eo.rank, "projection rank");
    ef_cmd->add_option("--period", eo.period, "steps between basis refreshes (0 = fixed)");
    ef_cmd->add_option("--steps", eo.steps, "number of steps");
    ef_cmd->add_option("--seed", eo.seed, "data seed");
    ef_cmd->add_option("--lr", eo.lr, "step size");
    ef_cmd->add_option("--out", eo.out, "output CSV path")->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(std::move(rev));
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed()) {
            if (run_cmd->count("--k") > 0) ro.hp.k = explicit_k;
            if (!ro.config.empty()) {
                std::map<std::string, std::function<void(const nlohmann::json&)>> setters{
                    {"problem", [&](const nlohmann::json& v) { ro.problem = v.get<std::string>(); }},
                    {"optimizer", [&](const nlohmann::json& v) { ro.optimizer = v.get<std::string>(); }},
                    {"steps", [&](const nlohmann::json& v) { ro.steps = v.get<int64_t>(); }},
                    {"seed", [&](const nlohmann::json& v) { ro.seed = v.get<uint64_t>(); }},
                    {"theta0", [&](const nlohmann::json& v) { ro.theta0 = v.get<std::string>(); }},
                    {"schedule", [&](const nlohmann::json& v) { ro.schedule = v.get<std::string>(); }},
                    {"noise-sigma", [&](const nlohmann::json& v) { ro.noise_sigma = v.get<double>(); }},
                    {"clip", [&](const nlohmann::json& v) { ro.clip = v.get<double>(); }},
                    {"blockwise", [&](const nlohmann::json& v) { ro.blockwise = v.get<bool>(); }},
                    {"lr", [&](const nlohmann::json& v) { ro.hp.lr = v.get<double>(); }},
                    {"beta1", [&](const nlohmann::json& v) { ro.hp.beta1 = v.get<double>(); }},
                    {"beta2", [&](const nlohmann::json& v) { ro.hp.beta2 = v.get<double>(); }},
                    {"eps", [&](const nlohmann::json& v) { ro.hp.eps = v.get<double>(); }},
                    {"weight-decay",
                     [&](const nlohmann::json& v) { ro.hp.weight_decay = v.get<double>(); }},
                    {"window", [&](const nlohmann::json& v) { ro.hp.window = v.get<int64_t>(); }},
                    {"density", [&](const nlohmann::json& v) { ro.hp.density = v.get<double>(); }},
                    {"k", [&](const nlohmann::json& v) { ro.hp.k = v.get<int64_t>(); }},
                    {"bits", [&](const nlohmann::json& v) { ro.hp.bits = v.get<int>(); }},
                    {"block", [&](const nlohmann::json& v) { ro.hp.block = v.get<int64_t>(); }},
                    {"bucket", [&](const nlohmann::json& v) { ro.hp.bucket = v.get<int64_t>(); }},
                    {"quad-a", [&](const nlohmann::json& v) { ro.quad_a = v.get<std::string>(); }},
                    {"quad-b", [&](const nlohmann::json& v) { ro.quad_b = v.get<std::string>(); }},
                    {"logistic-n", [&](const nlohmann::json& v) { ro.logistic_n = v.get<int64_t>(); }},
                    {"logistic-dim",
                     [&](const nlohmann::json& v) { ro.logistic_dim = v.get<int64_t>(); }},
                    {"logistic-sep",
                     [&](const nlohmann::json& v) { ro.logistic_sep = v.get<double>(); }},
                    {"problem-seed",
                     [&](const nlohmann::json& v) { ro.problem_seed = v.get<uint64_t>(); }},
                };
                apply_config(*run_cmd, ro.config, setters);
            }
            return cmd_run(ro, out, err);
        }
        if (mem_cmd->parsed()) return cmd_memory(mo, out, err);
        if (const_cmd->parsed()) return cmd_constants(co, out, err);
        if (ef_cmd->parsed()) return cmd_ef_lowrank(eo, out, err);
    } catch (const nlohmann::json::exception& e) {
        err << "error: config file: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    err << "error: no subcommand\n";
    return 2;
}

}  // namespace microadam::cli
