#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "rss/errors.hpp"
#include "rss/matrix.hpp"

namespace rss {

/// A smooth objective with instrumentation hooks. `hess` may be empty for
/// first-order-only engines.
struct SmoothProblem {
    std::string name;
    index_t dim = 0;
    std::function<double(const Vector&)> f;
    std::function<Vector(const Vector&)> grad;
    std::function<DenseMatrix(const Vector&)> hess;
    Vector x0;
    double f_star = 0.0;
};

/// Step-size state machine. alpha lives on the exact gamma1 lattice:
/// alpha = alpha0 * gamma1^e with integer e >= -p, so alpha <= alpha_max
/// and beta_k = log_gamma1(alpha_k / alpha0) = e is exactly an integer.
struct StepControl {
    double gamma1 = 0.5;
    int c = 1;             // gamma2 = gamma1^{-c}
    double theta = 0.125;
    double alpha_max = 10.0;
    int p = 1;             // alpha0 = alpha_max * gamma1^p
    int e = 0;             // current exponent relative to alpha0

    double gamma2() const { return std::pow(gamma1, -c); }
    double alpha0() const { return alpha_max * std::pow(gamma1, p); }
    double alpha() const { return alpha_max * std::pow(gamma1, p + e); }
    int beta() const { return e; }

    void validate() const {
        if (!(gamma1 > 0.0 && gamma1 < 1.0)) throw InvalidConfig("StepControl: gamma1 must be in (0,1)");
        if (c < 1) throw InvalidConfig("StepControl: c must be a positive integer");
        if (!(theta > 0.0 && theta < 1.0)) throw InvalidConfig("StepControl: theta must be in (0,1)");
        if (!(alpha_max > 0.0)) throw InvalidConfig("StepControl: alpha_max must be positive");
        if (p < 1) throw InvalidConfig("StepControl: p must be a positive integer");
        if (e < -p) throw InvalidConfig("StepControl: alpha exceeds alpha_max");
    }
};

inline StepControl update_alpha(StepControl ctrl, bool successful) {
    if (successful)
        ctrl.e = std::max(-ctrl.p, ctrl.e - ctrl.c);  // min(alpha_max, gamma2*alpha)
    else
        ctrl.e += 1;                                   // gamma1*alpha
    return ctrl;
}

struct IterationRecord {
    index_t k = 0;
    bool is_true = false;
    bool successful = false;
    double alpha = 0.0;
    double f = 0.0;
    double f_next = 0.0;
    double grad_norm = 0.0;
    double model_decrease = 0.0;
};

using Trace = std::vector<IterationRecord>;

inline std::string trace_csv(const Trace& trace) {
    std::string out = "k,is_true,successful,alpha,f,grad_norm,model_decrease\n";
    char buf[256];
    for (const auto& r : trace) {
        std::snprintf(buf, sizeof(buf), "%lld,%d,%d,%.17g,%.17g,%.17g,%.17g\n",
                      static_cast<long long>(r.k), r.is_true ? 1 : 0, r.successful ? 1 : 0,
                      r.alpha, r.f, r.grad_norm, r.model_decrease);
        out += buf;
    }
    return out;
}

struct StepOutcome {
    Vector step;             // full-space step S^T s_hat
    double model_decrease = 0.0;
    bool is_true = false;
};

class StepEngine {
public:
    virtual ~StepEngine() = default;
    virtual StepOutcome compute(const SmoothProblem& prob, const Vector& x, double fx,
                                const Vector& grad, double alpha, index_t k, uint64_t seed) = 0;
    virtual std::string name() const = 0;
};

struct RunResult {
    Trace trace;
    Vector x;
    double f = 0.0;
    bool converged = false;
    index_t n_eps = -1;  // first k with ||grad f(x_k)|| <= eps, -1 if never
};

/// Carries the partial trace out of a run that hit non-finite values.
struct RunBreakdown : NumericalBreakdown {
    Trace trace;
    RunBreakdown(const std::string& msg, Trace t) : NumericalBreakdown(msg), trace(std::move(t)) {}
};

inline bool sufficient_decrease(double f_old, double f_new, double model_decrease, double theta) {
    return model_decrease > 0.0 && f_old - f_new >= theta * model_decrease;
}

inline RunResult run(const SmoothProblem& prob, StepEngine& engine, StepControl ctrl,
                     index_t budget, double eps, uint64_t seed, const Vector* x0_override = nullptr) {
    ctrl.validate();
    RunResult res;
    Vector x = x0_override ? *x0_override : prob.x0;
    if (static_cast<index_t>(x.size()) != prob.dim) throw InvalidInput("run: start point dimension mismatch");
    double fx = prob.f(x);
    if (!std::isfinite(fx)) throw RunBreakdown("run: non-finite objective at start", {});

    for (index_t k = 0; k < budget; ++k) {
        Vector g = prob.grad(x);
        bool gfin = true;
        for (double v : g) gfin = gfin && std::isfinite(v);
        if (!gfin) throw RunBreakdown("run: non-finite gradient", std::move(res.trace));
        const double gn = norm2(g);
        if (gn <= eps) {
            res.converged = true;
            res.n_eps = k;
            break;
        }

        const double alpha = ctrl.alpha();
        StepOutcome out;
        bool degenerate = false;
        try {
            out = engine.compute(prob, x, fx, g, alpha, k, seed);
        } catch (const DegenerateSketch&) {
            out.step.assign(x.size(), 0.0);
            out.model_decrease = 0.0;
            degenerate = true;
        }
        (void)degenerate;

        Vector x_trial = x;
        axpy(1.0, out.step, x_trial);
        const double f_trial = prob.f(x_trial);
        if (!std::isfinite(f_trial)) throw RunBreakdown("run: non-finite trial objective", std::move(res.trace));
        const bool succ = sufficient_decrease(fx, f_trial, out.model_decrease, ctrl.theta);

        IterationRecord rec;
        rec.k = k;
        rec.is_true = out.is_true;
        rec.successful = succ;
        rec.alpha = alpha;
        rec.f = fx;
        rec.grad_norm = gn;
        rec.model_decrease = out.model_decrease;
        if (succ) {
            x = std::move(x_trial);
            fx = f_trial;
        }
        rec.f_next = fx;
        res.trace.push_back(rec);
        ctrl = update_alpha(ctrl, succ);
    }
    res.x = std::move(x);
    res.f = fx;
    if (!res.converged) {
        // budget exhausted; n_eps stays -1 unless the last iterate converged
        Vector g = prob.grad(res.x);
        if (norm2(g) <= eps) {
            res.converged = true;
            res.n_eps = static_cast<index_t>(res.trace.size());
        }
    }
    return res;
}

/// tau = ceil(log_gamma1 min(alpha_low/alpha0, gamma1^c)); alpha_min = alpha0*gamma1^tau.
inline std::pair<int, double> tau_alpha(double alpha_low, const StepControl& ctrl) {
    if (!(alpha_low > 0.0)) throw InvalidInput("tau_alpha: alpha_low must be positive");
    const double a0 = ctrl.alpha0();
    const double ratio = std::min(alpha_low / a0, std::pow(ctrl.gamma1, ctrl.c));
    const double t = std::log(ratio) / std::log(ctrl.gamma1);
    const int tau = static_cast<int>(std::ceil(t - 1e-12));
    return {tau, a0 * std::pow(ctrl.gamma1, tau)};
}

/// g(deltaS, delta1) = [(1-deltaS)(1-delta1) - 1 + c/(c+1)^2]^{-1}.
inline double g_constant(double deltaS, double delta1, int c) {
    const double cc = static_cast<double>(c);
    const double corner = cc / ((cc + 1.0) * (cc + 1.0));
    if (!(deltaS >= 0.0 && deltaS < corner))
        throw BoundInfeasible("g_constant: requires deltaS < c/(c+1)^2");
    const double denom = (1.0 - deltaS) * (1.0 - delta1) - 1.0 + corner;
    if (!(denom > 0.0)) throw BoundInfeasible("g_constant: (1-deltaS)(1-delta1) too small");
    return 1.0 / denom;
}

inline double theorem2_bound(double deltaS, double delta1, int c, double f0, double fstar,
                             double h_value, int tau) {
    if (!(h_value > 0.0)) throw BoundInfeasible("theorem2_bound: h must be positive");
    if (f0 < fstar) throw BoundInfeasible("theorem2_bound: f0 < fstar");
    const double g = g_constant(deltaS, delta1, c);
    return g * ((f0 - fstar) / h_value + static_cast<double>(tau) / (1.0 + c));
}

inline double chernoff_tail(double deltaS, double delta1, double N) {
    return std::exp(-(delta1 * delta1 / 2.0) * (1.0 - deltaS) * N);
}

inline double success_probability(double deltaS, double delta1, double N) {
    return 1.0 - chernoff_tail(deltaS, delta1, N);
}

/// Convergence-rate calculator: eps_at_N inverts q(eps) = h(eps, gamma1^c*alpha_min)
/// at D1/(N - D2); the expectation bound adds the tail term.
inline std::pair<double, double>
corollary_rates(double deltaS, double delta1, int c, double f0, double fstar, int tau,
                const std::function<double(double, double)>& h, double N,
                double gamma1, double alpha0, double grad0_norm) {
    const double g = g_constant(deltaS, delta1, c);
    const double alpha_min = alpha0 * std::pow(gamma1, tau);
    const double alpha_q = std::pow(gamma1, c) * alpha_min;
    const double D1 = g * (f0 - fstar);
    const double D2 = g * static_cast<double>(tau) / (1.0 + c);
    const double D3 = (delta1 * delta1 / 2.0) * (1.0 - deltaS);
    if (!(N > D2)) throw BoundInfeasible("corollary_rates: N <= D2");

    double eps = 0.0;
    if (D1 > 0.0) {
        const double target = D1 / (N - D2);
        auto q = [&](double e) { return h(e, alpha_q); };
        double hi = 1.0;
        int guard = 0;
        while (q(hi) < target) {
            hi *= 2.0;
            if (++guard > 2000) throw BoundInfeasible("corollary_rates: q not invertible on probed range");
        }
        double lo = 0.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (q(mid) < target ? lo : hi) = mid;
        }
        eps = 0.5 * (lo + hi);
    }
    return {eps, eps + grad0_norm * std::exp(-D3 * N)};
}

struct CountsTable {
    index_t n = 0;          // total iterations
    index_t n_true = 0;     // N_T
    index_t n_true_succ = 0; // N_TS
    index_t n_succ = 0;     // N_S
    index_t n_unsucc = 0;   // N_U
    index_t n_true_le_amin = 0;        // true, alpha <= alpha_min
    index_t n_succ_le_amin = 0;        // successful, alpha <= alpha_min
    index_t n_unsucc_gt_amin = 0;      // unsuccessful, alpha > alpha_min
    index_t n_succ_gt_gamma = 0;       // successful, alpha > gamma1^c * alpha_min
    index_t n_true_succ_gt_amin = 0;   // true successful, alpha > alpha_min
    index_t n_true_succ_gt_gamma = 0;  // true successful, alpha > gamma1^c * alpha_min
    index_t n_false_succ_gt_gamma = 0; // false successful, alpha > gamma1^c * alpha_min
};

inline CountsTable counts(const Trace& trace, double alpha_min, int c, double gamma1) {
    const double a_gamma = std::pow(gamma1, c) * alpha_min;
    // lattice values compared with a multiplicative slack for float round-off
    auto le = [](double a, double b) { return a <= b * (1.0 + 1e-9); };
    CountsTable t;
    t.n = static_cast<index_t>(trace.size());
    for (const auto& r : trace) {
        const bool gt_amin = !le(r.alpha, alpha_min);
        const bool gt_gamma = !le(r.alpha, a_gamma);
        if (r.is_true) ++t.n_true;
        if (r.successful) ++t.n_succ; else ++t.n_unsucc;
        if (r.is_true && r.successful) ++t.n_true_succ;
        if (r.is_true && !gt_amin) ++t.n_true_le_amin;
        if (r.successful && !gt_amin) ++t.n_succ_le_amin;
        if (!r.successful && gt_amin) ++t.n_unsucc_gt_amin;
        if (r.successful && gt_gamma) ++t.n_succ_gt_gamma;
        if (r.is_true && r.successful && gt_amin) ++t.n_true_succ_gt_amin;
        if (r.is_true && r.successful && gt_gamma) ++t.n_true_succ_gt_gamma;
        if (!r.is_true && r.successful && gt_gamma) ++t.n_false_succ_gt_gamma;
    }
    return t;
}

} // namespace rss
