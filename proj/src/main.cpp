// Command-line experiment runner for the random-subspace optimization library.
//
// Subcommands: opt, nlls, lls, sketch-bench, verify.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "rss/arc.hpp"
#include "rss/firstorder.hpp"
#include "rss/framework.hpp"
#include "rss/lls.hpp"
#include "rss/mmio.hpp"
#include "rss/nlls.hpp"
#include "rss/problems.hpp"
#include "rss/sketch.hpp"

namespace {

using namespace rss;

std::vector<uint64_t> parse_seeds(const std::string& spec) {
    std::vector<uint64_t> out;
    size_t pos = 0;
    while (pos < spec.size()) {
        size_t comma = spec.find(',', pos);
        std::string tok = spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        size_t dots = tok.find("..");
        if (dots != std::string::npos) {
            const uint64_t a = std::stoull(tok.substr(0, dots));
            const uint64_t b = std::stoull(tok.substr(dots + 2));
            if (b < a) throw InvalidConfig("seed range is reversed: " + tok);
            for (uint64_t s = a; s <= b; ++s) out.push_back(s);
        } else if (!tok.empty()) {
            out.push_back(std::stoull(tok));
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw InvalidConfig("no seeds given");
    return out;
}

int thread_cap() {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("SUBSPACE_OPT_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) cap = std::min(cap, v);
    }
    return cap;
}

// Deterministic trial-parallel map: results land in a pre-sized vector by index.
template <typename Fn>
void parallel_for(index_t n, Fn fn) {
    const int nthreads = std::min<index_t>(thread_cap(), n) > 0 ? static_cast<int>(std::min<index_t>(thread_cap(), n)) : 1;
    if (nthreads <= 1) {
        for (index_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<index_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    for (int t = 0; t < nthreads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const index_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidConfig("cannot open output file: " + path);
    out << content;
}

struct OptOptions {
    std::string engine = "tr";
    std::string ensemble = "gaussian";
    index_t l = 8;
    index_t s = 1;
    std::string problem = "rosenbrock";
    index_t d = 64;
    std::string seeds = "0";
    index_t budget = 1000;
    double eps = 1e-3;
    double gamma1 = 0.5;
    int c = 1;
    double theta = 0.125;
    double alpha_max = 10.0;
    int p = 1;
    double kappa_t = 0.0;
    double kappa_s = 0.0;
    double eps_s = 0.5;
    double s_max = 0.0;  // 0: derive from the ensemble bound where known
    bool identity = false;
    bool arc_second_order = false;
    std::string truth_variant = "norm";
    std::string out = ".";
};

double default_s_max(Ensemble e, index_t l, index_t d, index_t s, bool identity) {
    if (identity) return 1.0 + 1e-12;
    try {
        return s_max_bound(e, l, d, s, 1e-3);
    } catch (const InvalidConfig&) {
        return std::sqrt(static_cast<double>(d));  // conservative fallback
    }
}

int cmd_opt(const OptOptions& o) {
    const auto seeds = parse_seeds(o.seeds);
    SmoothProblem prob = make_problem(o.problem, o.d);
    StepControl ctrl;
    ctrl.gamma1 = o.gamma1;
    ctrl.c = o.c;
    ctrl.theta = o.theta;
    ctrl.alpha_max = o.alpha_max;
    ctrl.p = o.p;
    ctrl.validate();

    const Ensemble ens = ensemble_from_name(o.ensemble);
    const double smax = o.s_max > 0.0 ? o.s_max : default_s_max(ens, o.l, o.d, o.s, o.identity);

    std::vector<std::string> csvs(seeds.size());
    parallel_for(static_cast<index_t>(seeds.size()), [&](index_t i) {
        std::unique_ptr<StepEngine> engine;
        if (o.engine == "qr" || o.engine == "tr") {
            FirstOrderConfig cfg;
            cfg.ensemble = ens;
            cfg.l = o.l;
            cfg.s = o.s;
            cfg.kappa_T = o.kappa_t;
            cfg.truth = {o.eps_s, smax};
            cfg.identity_sketch = o.identity;
            if (prob.hess) cfg.B = prob.hess;
            if (o.engine == "qr")
                engine = std::make_unique<QrEngine>(cfg);
            else
                engine = std::make_unique<TrEngine>(cfg);
        } else if (o.engine == "arc") {
            ArcConfig cfg;
            cfg.ensemble = ens;
            cfg.l = o.l;
            cfg.s = o.s;
            cfg.kappa_T = o.kappa_t;
            cfg.kappa_S = o.kappa_s;
            cfg.second_order = o.arc_second_order;
            cfg.identity_sketch = o.identity;
            cfg.truth.S_max = smax;
            cfg.truth.eps_S2 = o.eps_s;
            cfg.truth.alpha_max = o.alpha_max;
            cfg.truth.eps = o.eps;
            if (o.truth_variant == "embed") cfg.truth.variant = ArcTruthVariant::hessian_embedding;
            else if (o.truth_variant == "sparse") cfg.truth.variant = ArcTruthVariant::sparse_hessian;
            else if (o.truth_variant == "norm") cfg.truth.variant = ArcTruthVariant::norm_only;
            else if (o.truth_variant == "full2") cfg.truth.variant = ArcTruthVariant::full_second_order;
            else throw InvalidConfig("unknown truth variant: " + o.truth_variant);
            engine = std::make_unique<ArcEngine>(cfg);
        } else {
            throw InvalidConfig("unknown engine: " + o.engine);
        }
        RunResult res = run(prob, *engine, ctrl, o.budget, o.eps, seeds[static_cast<size_t>(i)]);
        csvs[static_cast<size_t>(i)] = trace_csv(res.trace);
    });

    std::filesystem::create_directories(o.out);
    for (size_t i = 0; i < seeds.size(); ++i) {
        char name[256];
        std::snprintf(name, sizeof(name), "%s/trace_%s_%s_seed%llu.csv", o.out.c_str(),
                      o.problem.c_str(), o.engine.c_str(),
                      static_cast<unsigned long long>(seeds[i]));
        write_file(name, csvs[i]);
    }
    std::cout << "wrote " << seeds.size() << " trace files to " << o.out << "\n";
    return 0;
}

struct NllsOptions {
    std::string problem = "all";
    index_t d = 8;
    std::string engine = "tr";
    std::string ensemble = "gaussian";
    index_t l = 0;  // 0: l = d
    index_t s = 1;
    double tau = 0.1;
    index_t budget = 0;  // 0: 50 d
    std::string seeds = "0";
    double gamma1 = 0.5;
    int c = 1;
    double theta = 0.125;
    double alpha_max = 100.0;
    int p = 1;
    std::string out = ".";
};

int cmd_nlls(const NllsOptions& o) {
    const auto seeds = parse_seeds(o.seeds);
    std::vector<NlsProblem> probs;
    if (o.problem == "all")
        probs = builtin_problems(o.d);
    else
        probs.push_back(make_nls_problem(o.problem, o.d));

    struct Row {
        std::string problem;
        uint64_t seed;
        index_t l;
        double n_actions;
        index_t dim;
        double wall;
    };
    std::vector<Row> rows(probs.size() * seeds.size());
    parallel_for(static_cast<index_t>(rows.size()), [&](index_t idx) {
        const size_t pi = static_cast<size_t>(idx) / seeds.size();
        const size_t si = static_cast<size_t>(idx) % seeds.size();
        const NlsProblem& prob = probs[pi];
        SgnConfig cfg;
        cfg.engine = o.engine;
        cfg.ensemble = ensemble_from_name(o.ensemble);
        cfg.l = o.l > 0 ? std::min(o.l, prob.d) : prob.d;
        cfg.s = o.s;
        cfg.ctrl.gamma1 = o.gamma1;
        cfg.ctrl.c = o.c;
        cfg.ctrl.theta = o.theta;
        cfg.ctrl.alpha_max = o.alpha_max;
        cfg.ctrl.p = o.p;
        cfg.tau = o.tau;
        cfg.budget_actions = o.budget;
        cfg.truth.S_max = default_s_max(cfg.ensemble, cfg.l, prob.d, cfg.s, false);
        const auto t0 = std::chrono::steady_clock::now();
        SgnResult res = solve_sgn(prob, cfg, seeds[si]);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rows[static_cast<size_t>(idx)] = {prob.name, seeds[si], cfg.l,
                                          res.achieved ? static_cast<double>(res.actions_at_target)
                                                       : std::numeric_limits<double>::infinity(),
                                          prob.d, wall};
    });

    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.problem != b.problem ? a.problem < b.problem : a.seed < b.seed;
    });

    std::string csv = "problem,solver,seed,l,N_p,wall_time\n";
    std::vector<ProfileEntry> entries;
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%llu,%lld,%.17g,%.6f\n", r.problem.c_str(),
                      o.engine.c_str(), static_cast<unsigned long long>(r.seed),
                      static_cast<long long>(r.l), r.n_actions, r.wall);
        csv += buf;
        entries.push_back({r.n_actions, r.dim});
    }
    std::filesystem::create_directories(o.out);
    write_file(o.out + "/nlls_results.csv", csv);

    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(0.5 * i);
    std::vector<double> pi_vals = data_profile(entries, grid);
    std::string prof = "alpha,pi\n";
    for (size_t i = 0; i < grid.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", grid[i], pi_vals[i]);
        prof += buf;
    }
    write_file(o.out + "/nlls_profile.csv", prof);
    std::cout << "wrote nlls_results.csv and nlls_profile.csv to " << o.out << "\n";
    return 0;
}

struct LlsOptions {
    std::string matrix;
    std::string rhs;
    std::string ensemble = "hrht";
    index_t s = 1;
    double m_ratio = 1.7;
    index_t m = 0;
    double tau_a = 1e-8;
    double tau_r = 1e-6;
    index_t it_max = 10000;
    double rcond = 1e-12;
    bool rcond_absolute = false;
    bool min_norm = false;
    uint64_t seed = 0;
    std::string out_x = "x.mtx";
    std::string out_diag = "lls_diag.csv";
};

int cmd_lls(const LlsOptions& o) {
    if (o.matrix.empty()) throw InvalidConfig("lls: --matrix is required");
    LlsConfig cfg;
    cfg.ensemble = ensemble_from_name(o.ensemble);
    cfg.s = o.s;
    cfg.m_ratio = o.m_ratio;
    cfg.m = o.m;
    cfg.tau_a = o.tau_a;
    cfg.tau_r = o.tau_r;
    cfg.it_max = o.it_max;
    cfg.rcond = o.rcond;
    cfg.rcond_absolute = o.rcond_absolute;
    cfg.min_norm = o.min_norm;

    MmHeader hdr = peek_mm_header(o.matrix);
    LlsResult res;
    index_t nrows = 0;
    if (hdr.coordinate) {
        SparseMatrix A = read_mm_sparse(o.matrix);
        nrows = A.rows;
        Vector b = o.rhs.empty() ? Vector(static_cast<size_t>(nrows), 1.0) : read_mm_vector(o.rhs);
        res = sketch_solve(A, b, cfg, o.seed);
    } else {
        DenseMatrix A = read_mm_dense(o.matrix);
        nrows = A.rows;
        Vector b = o.rhs.empty() ? Vector(static_cast<size_t>(nrows), 1.0) : read_mm_vector(o.rhs);
        res = sketch_solve(A, b, cfg, o.seed);
    }

    DenseMatrix X(static_cast<index_t>(res.x.size()), 1);
    for (index_t i = 0; i < X.rows; ++i) X(i, 0) = res.x[static_cast<size_t>(i)];
    write_mm_dense(o.out_x, X);
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "rank,eps_measured,lsqr_iters,used_lsqr,residual_norm,perturbed\n"
                  "%lld,%.17g,%lld,%d,%.17g,%d\n",
                  static_cast<long long>(res.diag.rank), res.diag.eps_measured,
                  static_cast<long long>(res.diag.lsqr_iters), res.diag.used_lsqr ? 1 : 0,
                  res.diag.residual_norm, res.diag.perturbed ? 1 : 0);
    write_file(o.out_diag, buf);
    std::cout << "residual " << res.diag.residual_norm << ", rank " << res.diag.rank
              << ", lsqr iterations " << res.diag.lsqr_iters << "\n";
    return 0;
}

struct BenchOptions {
    std::string ensemble = "gaussian";
    index_t s = 1;
    index_t l = 32;
    index_t d = 1024;
    index_t trials = 10000;
    double eps_s = 0.5;
    uint64_t seed = 0;
    std::string out = "sketch_bench.csv";
};

int cmd_sketch_bench(const BenchOptions& o) {
    const Ensemble ens = ensemble_from_name(o.ensemble);
    const double rate = jl_failure_rate(ens, o.l, o.d, o.s, o.eps_s, o.trials, o.seed);
    double bound = std::numeric_limits<double>::quiet_NaN();
    if (ens == Ensemble::gaussian)
        bound = std::exp(-o.eps_s * o.eps_s * static_cast<double>(o.l) / 4.0);
    else if (ens == Ensemble::sampling)  // default test vector e_1 has nu = 1
        bound = std::exp(-o.eps_s * o.eps_s * static_cast<double>(o.l) /
                         (2.0 * static_cast<double>(o.d)));
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "ensemble,l,d,s,eps_s,trials,failure_rate,theory_bound\n"
                  "%s,%lld,%lld,%lld,%.17g,%lld,%.17g,%.17g\n",
                  o.ensemble.c_str(), static_cast<long long>(o.l), static_cast<long long>(o.d),
                  static_cast<long long>(o.s), o.eps_s, static_cast<long long>(o.trials), rate, bound);
    write_file(o.out, buf);
    std::cout << buf;
    return 0;
}

// lightweight property suites, re-runnable from the command line
int cmd_verify(const std::string& suite) {
    struct Check {
        std::string name;
        bool ok;
    };
    std::vector<Check> checks;

    if (suite == "framework" || suite == "all") {
        bool katya_ok = true, gratton_ok = true, monotone_ok = true, beta_ok = true;
        for (uint64_t seed = 0; seed < 50 && (katya_ok || gratton_ok); ++seed) {
            SmoothProblem prob = rosenbrock_problem(8);
            StepControl ctrl;
            ctrl.gamma1 = 0.5;
            ctrl.c = 1;
            ctrl.theta = 0.1;
            ctrl.alpha_max = 2.0;
            ctrl.p = 1;
            FirstOrderConfig cfg;
            cfg.ensemble = Ensemble::gaussian;
            cfg.l = 4;
            cfg.truth = {0.5, s_max_bound(Ensemble::gaussian, 4, 8, 1, 1e-3)};
            cfg.B = prob.hess;
            TrEngine eng(cfg);
            RunResult res = run(prob, eng, ctrl, 80, 1e-3, seed);
            auto [tau, alpha_min] = tau_alpha(1e-4 * ctrl.alpha0(), ctrl);
            CountsTable t = counts(res.trace, alpha_min, ctrl.c, ctrl.gamma1);
            if (t.n_unsucc_gt_amin > tau + ctrl.c * t.n_succ_gt_gamma) katya_ok = false;
            if (t.n_true_le_amin * (ctrl.c + 1) > t.n) gratton_ok = false;
            for (const auto& r : res.trace)
                if (r.f_next > r.f) monotone_ok = false;
            // every recorded alpha sits exactly on the gamma1 lattice
            for (const auto& r : res.trace) {
                const double beta = std::log(r.alpha / ctrl.alpha0()) / std::log(ctrl.gamma1);
                if (std::abs(beta - std::round(beta)) > 1e-9) beta_ok = false;
            }
        }
        checks.push_back({"framework/katya-count-bound", katya_ok});
        checks.push_back({"framework/gratton-count-bound", gratton_ok});
        checks.push_back({"framework/monotone-objective", monotone_ok});
        checks.push_back({"framework/beta-integrality", beta_ok});
    }
    if (suite == "sketch" || suite == "all") {
        bool norm_ok = true;
        for (uint64_t seed = 0; seed < 100; ++seed) {
            if (make_sketch(Ensemble::hashing_s, 16, 64, 2, seed).op_norm() >
                s_max_bound(Ensemble::hashing_s, 16, 64, 2) + 1e-12)
                norm_ok = false;
            if (make_sketch(Ensemble::stable_one_hashing, 16, 64, 1, seed).op_norm() >
                s_max_bound(Ensemble::stable_one_hashing, 16, 64, 1) + 1e-12)
                norm_ok = false;
            if (make_sketch(Ensemble::sampling, 16, 64, 1, seed).op_norm() >
                s_max_bound(Ensemble::sampling, 16, 64, 1) + 1e-12)
                norm_ok = false;
        }
        checks.push_back({"sketch/deterministic-norm-bounds", norm_ok});
    }
    if (suite == "lls" || suite == "all") {
        bool ok = true;
        Rng rng(7, 0);
        DenseMatrix A(60, 6);
        for (double& v : A.a) v = rng.next_gaussian();
        Vector xbar(6);
        for (double& v : xbar) v = rng.next_gaussian();
        Vector b = matvec(A, xbar);
        LlsConfig cfg;
        cfg.ensemble = Ensemble::gaussian;
        cfg.m = 24;
        for (uint64_t seed = 0; seed < 10; ++seed) {
            LlsResult res = sketch_solve(A, b, cfg, seed);
            Vector r = matvec(A, res.x);
            axpy(-1.0, b, r);
            if (norm2(r) > 1e-6) ok = false;
        }
        checks.push_back({"lls/consistent-system-exact", ok});
    }
    if (checks.empty()) throw InvalidConfig("unknown verify suite: " + suite);

    bool all_ok = true;
    for (const auto& c : checks) {
        std::cout << (c.ok ? "PASS" : "FAIL") << "  " << c.name << "\n";
        all_ok = all_ok && c.ok;
    }
    return all_ok ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"random-subspace optimization experiment runner"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file; flags override file values");

    OptOptions opt;
    auto* opt_cmd = app.add_subcommand("opt", "run the generic subspace framework on a smooth problem");
    opt_cmd->add_option("--engine", opt.engine, "step engine: qr, tr, arc");
    opt_cmd->add_option("--ensemble", opt.ensemble, "sketching ensemble");
    opt_cmd->add_option("--l", opt.l, "sketch dimension");
    opt_cmd->add_option("--s", opt.s, "nonzeros per column (hashing family)");
    opt_cmd->add_option("--problem", opt.problem, "objective name");
    opt_cmd->add_option("--d", opt.d, "problem dimension");
    opt_cmd->add_option("--seeds", opt.seeds, "seed list, e.g. 0..19 or 1,2,5");
    opt_cmd->add_option("--budget", opt.budget, "iteration budget");
    opt_cmd->add_option("--eps", opt.eps, "gradient-norm stopping tolerance");
    opt_cmd->add_option("--gamma1", opt.gamma1, "step-size decrease factor");
    opt_cmd->add_option("--c", opt.c, "step-size increase exponent");
    opt_cmd->add_option("--theta", opt.theta, "sufficient-decrease fraction");
    opt_cmd->add_option("--alpha-max", opt.alpha_max, "step-size cap");
    opt_cmd->add_option("--p", opt.p, "initial step-size exponent (alpha0 = alpha_max gamma1^p)");
    opt_cmd->add_option("--kappa-t", opt.kappa_t, "model stationarity slack");
    opt_cmd->add_option("--kappa-s", opt.kappa_s, "model curvature slack (arc)");
    opt_cmd->add_option("--eps-s", opt.eps_s, "embedding constant in the truth oracle");
    opt_cmd->add_option("--s-max", opt.s_max, "sketch norm cap in the truth oracle");
    opt_cmd->add_flag("--identity", opt.identity, "use S = I (full-space reference)");
    opt_cmd->add_flag("--arc-second-order", opt.arc_second_order, "enforce second-order model optimality");
    opt_cmd->add_option("--truth-variant", opt.truth_variant, "arc truth oracle: embed, sparse, norm, full2");
    opt_cmd->add_option("--out", opt.out, "output directory");

    NllsOptions nl;
    auto* nlls_cmd = app.add_subcommand("nlls", "run sketched Gauss-Newton on the builtin problems");
    nlls_cmd->add_option("--problem", nl.problem, "problem name or 'all'");
    nlls_cmd->add_option("--d", nl.d, "problem dimension");
    nlls_cmd->add_option("--engine", nl.engine, "step engine: tr (default) or qr");
    nlls_cmd->add_option("--ensemble", nl.ensemble, "sketching ensemble");
    nlls_cmd->add_option("--l", nl.l, "sketch dimension (0: full space)");
    nlls_cmd->add_option("--s", nl.s, "nonzeros per column");
    nlls_cmd->add_option("--tau", nl.tau, "decrease-target accuracy");
    nlls_cmd->add_option("--budget", nl.budget, "Jacobian-action budget (0: 50 d)");
    nlls_cmd->add_option("--seeds", nl.seeds, "seed list");
    nlls_cmd->add_option("--gamma1", nl.gamma1, "step-size decrease factor");
    nlls_cmd->add_option("--c", nl.c, "step-size increase exponent");
    nlls_cmd->add_option("--theta", nl.theta, "sufficient-decrease fraction");
    nlls_cmd->add_option("--alpha-max", nl.alpha_max, "step-size cap");
    nlls_cmd->add_option("--p", nl.p, "initial step-size exponent");
    nlls_cmd->add_option("--out", nl.out, "output directory");

    LlsOptions ll;
    auto* lls_cmd = app.add_subcommand("lls", "sketch-precondition-solve a linear least-squares problem");
    lls_cmd->add_option("--matrix", ll.matrix, "Matrix Market input matrix")->required();
    lls_cmd->add_option("--rhs", ll.rhs, "Matrix Market right-hand side (default: all ones)");
    lls_cmd->add_option("--ensemble", ll.ensemble, "sketching ensemble");
    lls_cmd->add_option("--s", ll.s, "nonzeros per column");
    lls_cmd->add_option("--m-ratio", ll.m_ratio, "sketch rows as a multiple of columns");
    lls_cmd->add_option("--m", ll.m, "sketch rows (overrides --m-ratio)");
    lls_cmd->add_option("--tau-a", ll.tau_a, "absolute residual tolerance");
    lls_cmd->add_option("--tau-r", ll.tau_r, "relative LSQR tolerance");
    lls_cmd->add_option("--it-max", ll.it_max, "LSQR iteration cap");
    lls_cmd->add_option("--rcond", ll.rcond, "rank-truncation threshold");
    lls_cmd->add_flag("--rcond-absolute", ll.rcond_absolute, "treat --rcond as an absolute threshold");
    lls_cmd->add_flag("--min-norm", ll.min_norm, "return the minimal-norm solution");
    lls_cmd->add_option("--seed", ll.seed, "sketch seed");
    lls_cmd->add_option("--out-x", ll.out_x, "solution output file");
    lls_cmd->add_option("--out-diag", ll.out_diag, "diagnostics CSV");

    BenchOptions be;
    auto* bench_cmd = app.add_subcommand("sketch-bench", "Monte-Carlo sketching failure rates");
    bench_cmd->add_option("--ensemble", be.ensemble, "sketching ensemble");
    bench_cmd->add_option("--s", be.s, "nonzeros per column");
    bench_cmd->add_option("--l", be.l, "sketch dimension");
    bench_cmd->add_option("--d", be.d, "ambient dimension");
    bench_cmd->add_option("--trials", be.trials, "number of trials");
    bench_cmd->add_option("--eps-s", be.eps_s, "embedding constant");
    bench_cmd->add_option("--seed", be.seed, "base seed");
    bench_cmd->add_option("--out", be.out, "output CSV");

    std::string suite = "all";
    auto* verify_cmd = app.add_subcommand("verify", "run a property suite and print a pass/fail table");
    verify_cmd->add_option("--suite", suite, "framework, sketch, lls, or all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (opt_cmd->parsed()) return cmd_opt(opt);
        if (nlls_cmd->parsed()) return cmd_nlls(nl);
        if (lls_cmd->parsed()) return cmd_lls(ll);
        if (bench_cmd->parsed()) return cmd_sketch_bench(be);
        if (verify_cmd->parsed()) return cmd_verify(suite);
    } catch (const InvalidConfig& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidInput& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
