#pragma once

#include <cmath>
#include <functional>

#include "rss/framework.hpp"
#include "rss/qr.hpp"
#include "rss/sketch.hpp"

namespace rss {

/// Reduced quadratic model m(s) = f0 + g_hat's + 1/2 s'(S B S')s with the
/// proximal/trust parameter alpha attached.
struct SketchedModel {
    double f0 = 0.0;
    Vector g_hat;                                   // S grad f
    std::function<Vector(const Vector&)> B_action;  // v -> S B S' v
    const SketchOp* S = nullptr;
    double alpha = 0.0;
};

struct TrueIterationSpec {
    double eps_S = 0.5;
    double S_max = 1.0;
};

namespace detail {

inline DenseMatrix probe_operator(const std::function<Vector(const Vector&)>& op, index_t l) {
    DenseMatrix M(l, l);
    Vector e(static_cast<size_t>(l), 0.0);
    for (index_t j = 0; j < l; ++j) {
        e[static_cast<size_t>(j)] = 1.0;
        Vector y = op(e);
        for (index_t i = 0; i < l; ++i) M(i, j) = y[static_cast<size_t>(i)];
        e[static_cast<size_t>(j)] = 0.0;
    }
    return M;
}

// S S' for a realized sketch, via the densified operator.
inline DenseMatrix gram_sst(const SketchOp& S) {
    DenseMatrix Sd = S.densify();
    DenseMatrix G(S.m, S.m);
    for (index_t i = 0; i < S.m; ++i)
        for (index_t j = i; j < S.m; ++j) {
            double sum = 0.0;
            for (index_t k = 0; k < S.n; ++k) sum += Sd(i, k) * Sd(j, k);
            G(i, j) = sum;
            G(j, i) = sum;
        }
    return G;
}

// Solve the SPD-ish system A z = rhs by QR; near-singular triggers DegenerateSketch.
inline Vector solve_small(const DenseMatrix& A, Vector rhs) {
    HouseholderQR qr = householder_qr(A);
    DenseMatrix R = qr.r();
    double dmax = 0.0;
    for (index_t i = 0; i < R.rows; ++i) dmax = std::max(dmax, std::abs(R(i, i)));
    for (index_t i = 0; i < R.rows; ++i)
        if (std::abs(R(i, i)) <= 1e-12 * dmax) throw DegenerateSketch("solve_small: rank-deficient system");
    qr.apply_qt(rhs);
    rhs.resize(static_cast<size_t>(R.cols));
    return tri_solve(R, rhs, false);
}

} // namespace detail

/// Minimize l(s) = m(s) + (1/2 alpha)||S's||^2 exactly: the stationarity
/// system (S B S' + S S'/alpha) s = -g_hat. kappa_T is accepted for
/// interface stability; the exact solve satisfies any kappa_T >= 0.
inline std::pair<Vector, double> qr_step(const SketchedModel& model, double kappa_T = 0.0) {
    (void)kappa_T;
    if (!(model.alpha > 0.0)) throw InvalidInput("qr_step: alpha must be positive");
    const index_t l = static_cast<index_t>(model.g_hat.size());
    if (norm2(model.g_hat) == 0.0) return {Vector(static_cast<size_t>(l), 0.0), 0.0};

    DenseMatrix A = detail::probe_operator(model.B_action, l);
    DenseMatrix G = detail::gram_sst(*model.S);
    for (index_t i = 0; i < l; ++i)
        for (index_t j = 0; j < l; ++j) A(i, j) += G(i, j) / model.alpha;
    Vector rhs(static_cast<size_t>(l));
    for (index_t i = 0; i < l; ++i) rhs[static_cast<size_t>(i)] = -model.g_hat[static_cast<size_t>(i)];
    Vector s = detail::solve_small(A, std::move(rhs));

    Vector Bs = model.B_action(s);
    Vector Sts = model.S->apply_t(s);
    const double decrease = -(dot(model.g_hat, s) + 0.5 * dot(s, Bs)) -
                            dot(Sts, Sts) / (2.0 * model.alpha);
    return {std::move(s), decrease};
}

/// Cauchy point of the trust-region model with radius alpha.
inline std::pair<Vector, double> tr_step(const SketchedModel& model) {
    if (!(model.alpha > 0.0)) throw InvalidInput("tr_step: alpha must be positive");
    const index_t l = static_cast<index_t>(model.g_hat.size());
    const double gn = norm2(model.g_hat);
    if (gn == 0.0) return {Vector(static_cast<size_t>(l), 0.0), 0.0};

    Vector Bg = model.B_action(model.g_hat);
    const double curv = dot(model.g_hat, Bg);
    double tau = 1.0;
    if (curv > 0.0) tau = std::min(gn * gn * gn / (curv * model.alpha), 1.0);
    Vector s(static_cast<size_t>(l));
    const double sc = -tau * model.alpha / gn;
    for (index_t i = 0; i < l; ++i) s[static_cast<size_t>(i)] = sc * model.g_hat[static_cast<size_t>(i)];
    Vector Bs = model.B_action(s);
    const double decrease = -(dot(model.g_hat, s) + 0.5 * dot(s, Bs));
    return {std::move(s), decrease};
}

inline bool is_true_iteration(const SketchOp& S, const Vector& grad, const TrueIterationSpec& spec) {
    Vector sg = S.apply(grad);
    if (dot(sg, sg) < (1.0 - spec.eps_S) * dot(grad, grad)) return false;
    return S.op_norm() <= spec.S_max;
}

inline double h_qr(double eps, double alpha, double Smax, double Bmax, double kappaT,
                   double alpha_max, double theta, double eps_S) {
    const double denom = Smax * (Bmax + 1.0 / alpha) + kappaT;
    return theta * (1.0 - eps_S) * eps * eps / (2.0 * alpha_max * denom * denom);
}

inline double h_tr(double eps, double alpha, double Bmax, double C7, double theta, double eps_S) {
    const double lin = std::sqrt(1.0 - eps_S) * eps * alpha;
    const double quad = (1.0 - eps_S) * eps * eps / Bmax;
    return theta * C7 * std::min(lin, quad);
}

/// First-order step engines over a fresh sketch each iteration.
struct FirstOrderConfig {
    Ensemble ensemble = Ensemble::gaussian;
    index_t l = 1;
    index_t s = 1;
    double kappa_T = 0.0;
    TrueIterationSpec truth;
    // d x d curvature matrix B(x); empty means B = 0
    std::function<DenseMatrix(const Vector&)> B;
    bool identity_sketch = false;  // S = I_d, full-space reference runs
};

namespace detail {

inline SketchOp draw_sketch(const FirstOrderConfig& cfg, index_t d, index_t k, uint64_t seed) {
    if (cfg.identity_sketch) return make_explicit_sketch(DenseMatrix::identity(d));
    return make_sketch(cfg.ensemble, cfg.l, d, cfg.s, derive_seed(seed, static_cast<uint64_t>(k)));
}

inline SketchedModel build_model(const FirstOrderConfig& cfg, const Vector& x, double fx,
                                 const Vector& grad, double alpha, const SketchOp& S) {
    SketchedModel m;
    m.f0 = fx;
    m.g_hat = S.apply(grad);
    m.S = &S;
    m.alpha = alpha;
    if (cfg.B) {
        DenseMatrix B = cfg.B(x);
        m.B_action = [&S, B = std::move(B)](const Vector& v) {
            return S.apply(matvec(B, S.apply_t(v)));
        };
    } else {
        m.B_action = [](const Vector& v) { return Vector(v.size(), 0.0); };
    }
    return m;
}

} // namespace detail

class QrEngine : public StepEngine {
public:
    explicit QrEngine(FirstOrderConfig cfg) : cfg_(std::move(cfg)) {}
    StepOutcome compute(const SmoothProblem& prob, const Vector& x, double fx,
                        const Vector& grad, double alpha, index_t k, uint64_t seed) override {
        SketchOp S = detail::draw_sketch(cfg_, prob.dim, k, seed);
        SketchedModel m = detail::build_model(cfg_, x, fx, grad, alpha, S);
        auto [s_hat, decrease] = qr_step(m, cfg_.kappa_T);
        StepOutcome out;
        out.step = S.apply_t(s_hat);
        out.model_decrease = decrease;
        out.is_true = is_true_iteration(S, grad, cfg_.truth);
        return out;
    }
    std::string name() const override { return "qr"; }

private:
    FirstOrderConfig cfg_;
};

class TrEngine : public StepEngine {
public:
    explicit TrEngine(FirstOrderConfig cfg) : cfg_(std::move(cfg)) {}
    StepOutcome compute(const SmoothProblem& prob, const Vector& x, double fx,
                        const Vector& grad, double alpha, index_t k, uint64_t seed) override {
        SketchOp S = detail::draw_sketch(cfg_, prob.dim, k, seed);
        SketchedModel m = detail::build_model(cfg_, x, fx, grad, alpha, S);
        auto [s_hat, decrease] = tr_step(m);
        StepOutcome out;
        out.step = S.apply_t(s_hat);
        out.model_decrease = decrease;
        out.is_true = is_true_iteration(S, grad, cfg_.truth);
        return out;
    }
    std::string name() const override { return "tr"; }

private:
    FirstOrderConfig cfg_;
};

} // namespace rss
