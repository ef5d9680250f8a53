#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "rss/firstorder.hpp"
#include "rss/framework.hpp"
#include "rss/qr.hpp"
#include "rss/rng.hpp"
#include "rss/sketch.hpp"

namespace rss {

struct ActionCounter {
    index_t jacobian_actions = 0;
    index_t residual_evals = 0;
};

/// Nonlinear least squares f(x) = 1/2 ||r(x)||^2 with Jacobian access by
/// actions only.
struct NlsProblem {
    std::string name;
    index_t d = 0;
    index_t n = 0;
    std::function<Vector(const Vector&)> residual;
    std::function<Vector(const Vector&, const Vector&)> jac_action;    // (x, v) -> J(x) v
    std::function<Vector(const Vector&, const Vector&)> jac_t_action;  // (x, w) -> J(x)' w
    Vector x0;
    double f_star = 0.0;

    double f(const Vector& x) const {
        Vector r = residual(x);
        return 0.5 * dot(r, r);
    }
    Vector grad(const Vector& x) const { return jac_t_action(x, residual(x)); }
};

/// Sketched Gauss-Newton model: g_hat = (J S')' r, curvature (J S')'(J S').
/// Charges exactly l Jacobian actions (the columns of J S').
inline SketchedModel sgn_model(const NlsProblem& prob, const Vector& x, const SketchOp& S,
                               double alpha, ActionCounter& counter) {
    Vector r = prob.residual(x);
    ++counter.residual_evals;
    for (double v : r)
        if (!std::isfinite(v)) throw NumericalBreakdown("sgn_model: non-finite residual");

    const index_t l = S.m;
    DenseMatrix JS(prob.n, l);
    Vector e(static_cast<size_t>(l), 0.0);
    for (index_t j = 0; j < l; ++j) {
        e[static_cast<size_t>(j)] = 1.0;
        Vector col = prob.jac_action(x, S.apply_t(e));
        ++counter.jacobian_actions;
        for (index_t i = 0; i < prob.n; ++i) JS(i, j) = col[static_cast<size_t>(i)];
        e[static_cast<size_t>(j)] = 0.0;
    }

    SketchedModel m;
    m.f0 = 0.5 * dot(r, r);
    m.g_hat = matvec_t(JS, r);
    m.S = &S;
    m.alpha = alpha;
    m.B_action = [JS = std::move(JS)](const Vector& v) { return matvec_t(JS, matvec(JS, v)); };
    return m;
}

struct SgnConfig {
    std::string engine = "tr";  // "tr" (default) or "qr"
    Ensemble ensemble = Ensemble::gaussian;
    index_t l = 1;
    index_t s = 1;
    double kappa_T = 0.0;
    TrueIterationSpec truth;
    StepControl ctrl;
    double tau = 0.1;            // accuracy level of the decrease target
    index_t budget_actions = 0;  // 0 means 50 * d
};

struct SgnResult {
    Vector x;
    double f = 0.0;
    Trace trace;
    ActionCounter counter;
    bool achieved = false;          // hit f <= f* + tau (f0 - f*)
    index_t actions_at_target = -1; // Jacobian actions when the target was first met
};

inline SgnResult solve_sgn(const NlsProblem& prob, SgnConfig cfg, uint64_t seed,
                           double f_star_override = std::numeric_limits<double>::quiet_NaN()) {
    cfg.ctrl.validate();
    if (cfg.engine != "tr" && cfg.engine != "qr") throw InvalidConfig("solve_sgn: engine must be tr or qr");
    const index_t budget = cfg.budget_actions > 0 ? cfg.budget_actions : 50 * prob.d;
    const double fstar = std::isnan(f_star_override) ? prob.f_star : f_star_override;

    SgnResult res;
    Vector x = prob.x0;
    double fx = prob.f(x);
    ++res.counter.residual_evals;
    const double target = fstar + cfg.tau * (fx - fstar);
    StepControl ctrl = cfg.ctrl;

    for (index_t k = 0;; ++k) {
        if (fx <= target) {
            res.achieved = true;
            res.actions_at_target = res.counter.jacobian_actions;
            break;
        }
        if (res.counter.jacobian_actions + cfg.l > budget) break;

        SketchOp S = make_sketch(cfg.ensemble, cfg.l, prob.d, cfg.s,
                                 derive_seed(seed, static_cast<uint64_t>(k)));
        SketchedModel m = sgn_model(prob, x, S, ctrl.alpha(), res.counter);
        Vector s_hat;
        double decrease = 0.0;
        try {
            if (cfg.engine == "qr") {
                auto [sh, dec] = qr_step(m, cfg.kappa_T);
                s_hat = std::move(sh);
                decrease = dec;
            } else {
                auto [sh, dec] = tr_step(m);
                s_hat = std::move(sh);
                decrease = dec;
            }
        } catch (const DegenerateSketch&) {
            s_hat.assign(static_cast<size_t>(cfg.l), 0.0);
        }

        Vector step = S.apply_t(s_hat);
        Vector x_trial = x;
        axpy(1.0, step, x_trial);
        const double f_trial = prob.f(x_trial);
        ++res.counter.residual_evals;
        const bool succ = sufficient_decrease(fx, f_trial, decrease, ctrl.theta);

        Vector g = prob.grad(x);  // instrumentation only, not charged
        IterationRecord rec;
        rec.k = k;
        rec.is_true = is_true_iteration(S, g, cfg.truth);
        rec.successful = succ;
        rec.alpha = ctrl.alpha();
        rec.f = fx;
        rec.grad_norm = norm2(g);
        rec.model_decrease = decrease;
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
    return res;
}

// ---- data profiles ----

struct ProfileEntry {
    double n_actions = std::numeric_limits<double>::infinity();  // inf = budget exceeded
    index_t dim = 1;
};

/// pi(alpha) = |{p : N_p <= alpha * d_p}| / |P|.
inline std::vector<double> data_profile(const std::vector<ProfileEntry>& entries,
                                        const std::vector<double>& alpha_grid) {
    if (entries.empty()) throw InvalidInput("data_profile: no entries");
    std::vector<double> pi;
    pi.reserve(alpha_grid.size());
    for (double a : alpha_grid) {
        index_t cnt = 0;
        for (const auto& e : entries)
            if (e.n_actions <= a * static_cast<double>(e.dim)) ++cnt;
        pi.push_back(static_cast<double>(cnt) / static_cast<double>(entries.size()));
    }
    return pi;
}

// ---- builtin test problems ----

namespace detail {

inline NlsProblem linear_ls_problem(index_t d, index_t n, bool consistent, uint64_t seed) {
    Rng rng(seed, 0);
    auto A = std::make_shared<DenseMatrix>(n, d);
    for (index_t j = 0; j < d; ++j)
        for (index_t i = 0; i < n; ++i) (*A)(i, j) = rng.next_gaussian();
    Vector xbar(static_cast<size_t>(d));
    for (double& v : xbar) v = rng.next_gaussian();
    auto b = std::make_shared<Vector>(matvec(*A, xbar));
    double fstar = 0.0;
    if (!consistent) {
        // add a residual component orthogonal to range(A)
        Vector e(static_cast<size_t>(n));
        for (double& v : e) v = rng.next_gaussian();
        HouseholderQR qr = householder_qr(*A);
        Vector c = e;
        qr.apply_qt(c);
        for (index_t i = 0; i < d; ++i) c[static_cast<size_t>(i)] = 0.0;
        qr.apply_q(c);
        axpy(1.0, c, *b);
        fstar = 0.5 * dot(c, c);
    }

    NlsProblem p;
    p.name = consistent ? "linls-consistent" : "linls-inconsistent";
    p.d = d;
    p.n = n;
    p.residual = [A, b](const Vector& x) {
        Vector r = matvec(*A, x);
        axpy(-1.0, *b, r);
        return r;
    };
    p.jac_action = [A](const Vector&, const Vector& v) { return matvec(*A, v); };
    p.jac_t_action = [A](const Vector&, const Vector& w) { return matvec_t(*A, w); };
    p.x0.assign(static_cast<size_t>(d), 0.0);
    p.f_star = fstar;
    return p;
}

inline NlsProblem extended_rosenbrock_problem(index_t d) {
    if (d < 2 || d % 2 != 0) throw InvalidConfig("extended_rosenbrock: d must be even and >= 2");
    NlsProblem p;
    p.name = "ext-rosenbrock";
    p.d = d;
    p.n = d;
    p.residual = [d](const Vector& x) {
        Vector r(static_cast<size_t>(d));
        for (index_t i = 0; i < d; i += 2) {
            r[static_cast<size_t>(i)] = 10.0 * (x[static_cast<size_t>(i + 1)] - x[static_cast<size_t>(i)] * x[static_cast<size_t>(i)]);
            r[static_cast<size_t>(i + 1)] = 1.0 - x[static_cast<size_t>(i)];
        }
        return r;
    };
    p.jac_action = [d](const Vector& x, const Vector& v) {
        Vector w(static_cast<size_t>(d));
        for (index_t i = 0; i < d; i += 2) {
            w[static_cast<size_t>(i)] = -20.0 * x[static_cast<size_t>(i)] * v[static_cast<size_t>(i)] + 10.0 * v[static_cast<size_t>(i + 1)];
            w[static_cast<size_t>(i + 1)] = -v[static_cast<size_t>(i)];
        }
        return w;
    };
    p.jac_t_action = [d](const Vector& x, const Vector& w) {
        Vector v(static_cast<size_t>(d));
        for (index_t i = 0; i < d; i += 2) {
            v[static_cast<size_t>(i)] = -20.0 * x[static_cast<size_t>(i)] * w[static_cast<size_t>(i)] - w[static_cast<size_t>(i + 1)];
            v[static_cast<size_t>(i + 1)] = 10.0 * w[static_cast<size_t>(i)];
        }
        return v;
    };
    p.x0.assign(static_cast<size_t>(d), 0.0);
    for (index_t i = 0; i < d; i += 2) {
        p.x0[static_cast<size_t>(i)] = -1.2;
        p.x0[static_cast<size_t>(i + 1)] = 1.0;
    }
    p.f_star = 0.0;
    return p;
}

inline NlsProblem broyden_tridiagonal_problem(index_t d) {
    if (d < 2) throw InvalidConfig("broyden_tridiagonal: d must be >= 2");
    NlsProblem p;
    p.name = "broyden-tri";
    p.d = d;
    p.n = d;
    auto at = [](const Vector& x, index_t i) {
        return (i < 0 || i >= static_cast<index_t>(x.size())) ? 0.0 : x[static_cast<size_t>(i)];
    };
    p.residual = [d, at](const Vector& x) {
        Vector r(static_cast<size_t>(d));
        for (index_t i = 0; i < d; ++i)
            r[static_cast<size_t>(i)] = (3.0 - 2.0 * x[static_cast<size_t>(i)]) * x[static_cast<size_t>(i)] - at(x, i - 1) - 2.0 * at(x, i + 1) + 1.0;
        return r;
    };
    p.jac_action = [d, at](const Vector& x, const Vector& v) {
        Vector w(static_cast<size_t>(d));
        for (index_t i = 0; i < d; ++i)
            w[static_cast<size_t>(i)] = (3.0 - 4.0 * x[static_cast<size_t>(i)]) * v[static_cast<size_t>(i)] - at(v, i - 1) - 2.0 * at(v, i + 1);
        return w;
    };
    p.jac_t_action = [d, at](const Vector& x, const Vector& w) {
        Vector v(static_cast<size_t>(d));
        for (index_t i = 0; i < d; ++i)
            v[static_cast<size_t>(i)] = (3.0 - 4.0 * x[static_cast<size_t>(i)]) * w[static_cast<size_t>(i)] - at(w, i + 1) - 2.0 * at(w, i - 1);
        return v;
    };
    p.x0.assign(static_cast<size_t>(d), -1.0);
    p.f_star = 0.0;
    return p;
}

inline NlsProblem powell_singular_problem() {
    NlsProblem p;
    p.name = "powell-singular";
    p.d = 4;
    p.n = 4;
    p.residual = [](const Vector& x) {
        Vector r(4);
        r[0] = x[0] + 10.0 * x[1];
        r[1] = std::sqrt(5.0) * (x[2] - x[3]);
        r[2] = (x[1] - 2.0 * x[2]) * (x[1] - 2.0 * x[2]);
        r[3] = std::sqrt(10.0) * (x[0] - x[3]) * (x[0] - x[3]);
        return r;
    };
    p.jac_action = [](const Vector& x, const Vector& v) {
        Vector w(4);
        w[0] = v[0] + 10.0 * v[1];
        w[1] = std::sqrt(5.0) * (v[2] - v[3]);
        w[2] = 2.0 * (x[1] - 2.0 * x[2]) * (v[1] - 2.0 * v[2]);
        w[3] = 2.0 * std::sqrt(10.0) * (x[0] - x[3]) * (v[0] - v[3]);
        return w;
    };
    p.jac_t_action = [](const Vector& x, const Vector& w) {
        Vector v(4, 0.0);
        v[0] = w[0] + 2.0 * std::sqrt(10.0) * (x[0] - x[3]) * w[3];
        v[1] = 10.0 * w[0] + 2.0 * (x[1] - 2.0 * x[2]) * w[2];
        v[2] = std::sqrt(5.0) * w[1] - 4.0 * (x[1] - 2.0 * x[2]) * w[2];
        v[3] = -std::sqrt(5.0) * w[1] - 2.0 * std::sqrt(10.0) * (x[0] - x[3]) * w[3];
        return v;
    };
    p.x0 = {3.0, -1.0, 0.0, 1.0};
    p.f_star = 0.0;
    return p;
}

inline NlsProblem trigonometric_problem(index_t d) {
    if (d < 1) throw InvalidConfig("trigonometric: d must be >= 1");
    NlsProblem p;
    p.name = "trigonometric";
    p.d = d;
    p.n = d;
    p.residual = [d](const Vector& x) {
        double cs = 0.0;
        for (double v : x) cs += std::cos(v);
        Vector r(static_cast<size_t>(d));
        for (index_t i = 0; i < d; ++i)
            r[static_cast<size_t>(i)] = static_cast<double>(d) - cs +
                                        static_cast<double>(i + 1) * (1.0 - std::cos(x[static_cast<size_t>(i)])) -
                                        std::sin(x[static_cast<size_t>(i)]);
        return r;
    };
    p.jac_action = [d](const Vector& x, const Vector& v) {
        double sv = 0.0;
        for (index_t j = 0; j < d; ++j) sv += std::sin(x[static_cast<size_t>(j)]) * v[static_cast<size_t>(j)];
        Vector w(static_cast<size_t>(d));
        for (index_t i = 0; i < d; ++i) {
            const double xi = x[static_cast<size_t>(i)];
            w[static_cast<size_t>(i)] = sv + (static_cast<double>(i + 1) * std::sin(xi) - std::cos(xi)) * v[static_cast<size_t>(i)];
        }
        return w;
    };
    p.jac_t_action = [d](const Vector& x, const Vector& w) {
        double ws = 0.0;
        for (double v : w) ws += v;
        Vector out(static_cast<size_t>(d));
        for (index_t j = 0; j < d; ++j) {
            const double xj = x[static_cast<size_t>(j)];
            out[static_cast<size_t>(j)] = std::sin(xj) * ws + (static_cast<double>(j + 1) * std::sin(xj) - std::cos(xj)) * w[static_cast<size_t>(j)];
        }
        return out;
    };
    p.x0.assign(static_cast<size_t>(d), 1.0 / static_cast<double>(d));
    p.f_star = 0.0;
    return p;
}

/// Squared logistic losses on synthetic two-class Gaussian data, plus
/// ridge residuals sqrt(2 lambda) x_j giving a lambda ||x||^2 term in f.
inline NlsProblem logistic_squared_problem(index_t d, index_t nsamples, double lambda, uint64_t seed) {
    Rng rng(seed, 0);
    auto X = std::make_shared<DenseMatrix>(nsamples, d);
    auto y = std::make_shared<Vector>(static_cast<size_t>(nsamples));
    Vector wtrue(static_cast<size_t>(d));
    for (double& v : wtrue) v = rng.next_gaussian();
    for (index_t i = 0; i < nsamples; ++i) {
        const double label = rng.next_sign();
        (*y)[static_cast<size_t>(i)] = label;
        for (index_t j = 0; j < d; ++j)
            (*X)(i, j) = rng.next_gaussian() + 0.5 * label * wtrue[static_cast<size_t>(j)];
    }
    const double rl = std::sqrt(2.0 * lambda);

    NlsProblem p;
    p.name = "logistic-sq";
    p.d = d;
    p.n = nsamples + d;
    p.residual = [X, y, d, nsamples, rl](const Vector& w) {
        Vector r(static_cast<size_t>(nsamples + d));
        for (index_t i = 0; i < nsamples; ++i) {
            double z = 0.0;
            for (index_t j = 0; j < d; ++j) z += (*X)(i, j) * w[static_cast<size_t>(j)];
            z *= (*y)[static_cast<size_t>(i)];
            r[static_cast<size_t>(i)] = std::log1p(std::exp(-z));
        }
        for (index_t j = 0; j < d; ++j) r[static_cast<size_t>(nsamples + j)] = rl * w[static_cast<size_t>(j)];
        return r;
    };
    p.jac_action = [X, y, d, nsamples, rl](const Vector& w, const Vector& v) {
        Vector out(static_cast<size_t>(nsamples + d));
        for (index_t i = 0; i < nsamples; ++i) {
            double z = 0.0, xv = 0.0;
            for (index_t j = 0; j < d; ++j) {
                z += (*X)(i, j) * w[static_cast<size_t>(j)];
                xv += (*X)(i, j) * v[static_cast<size_t>(j)];
            }
            const double yi = (*y)[static_cast<size_t>(i)];
            const double sig = 1.0 / (1.0 + std::exp(yi * z));  // sigma(-y_i x_i'w)
            out[static_cast<size_t>(i)] = -sig * yi * xv;
        }
        for (index_t j = 0; j < d; ++j) out[static_cast<size_t>(nsamples + j)] = rl * v[static_cast<size_t>(j)];
        return out;
    };
    p.jac_t_action = [X, y, d, nsamples, rl](const Vector& w, const Vector& u) {
        Vector out(static_cast<size_t>(d), 0.0);
        for (index_t i = 0; i < nsamples; ++i) {
            double z = 0.0;
            for (index_t j = 0; j < d; ++j) z += (*X)(i, j) * w[static_cast<size_t>(j)];
            const double yi = (*y)[static_cast<size_t>(i)];
            const double c = -1.0 / (1.0 + std::exp(yi * z)) * yi * u[static_cast<size_t>(i)];
            for (index_t j = 0; j < d; ++j) out[static_cast<size_t>(j)] += c * (*X)(i, j);
        }
        for (index_t j = 0; j < d; ++j) out[static_cast<size_t>(j)] += rl * u[static_cast<size_t>(nsamples + j)];
        return out;
    };
    p.x0.assign(static_cast<size_t>(d), 0.0);
    p.f_star = 0.0;
    return p;
}

} // namespace detail

inline NlsProblem make_nls_problem(const std::string& name, index_t d) {
    if (name == "linls-consistent") return detail::linear_ls_problem(d, 2 * d, true, 11);
    if (name == "linls-inconsistent") return detail::linear_ls_problem(d, 2 * d, false, 13);
    if (name == "ext-rosenbrock") return detail::extended_rosenbrock_problem(d);
    if (name == "broyden-tri") return detail::broyden_tridiagonal_problem(d);
    if (name == "powell-singular") return detail::powell_singular_problem();
    if (name == "trigonometric") return detail::trigonometric_problem(d);
    if (name == "logistic-sq") return detail::logistic_squared_problem(d, 4 * d, 1e-2, 17);
    throw InvalidConfig("make_nls_problem: unknown problem '" + name + "'");
}

inline std::vector<NlsProblem> builtin_problems(index_t d = 8) {
    std::vector<NlsProblem> out;
    out.push_back(make_nls_problem("linls-consistent", d));
    out.push_back(make_nls_problem("linls-inconsistent", d));
    out.push_back(make_nls_problem("ext-rosenbrock", d % 2 == 0 ? d : d + 1));
    out.push_back(make_nls_problem("broyden-tri", d));
    out.push_back(make_nls_problem("powell-singular", 4));
    out.push_back(make_nls_problem("trigonometric", d));
    out.push_back(make_nls_problem("logistic-sq", d));
    return out;
}

/// View an NLS problem as a smooth objective (Gauss-Newton curvature is
/// supplied separately by the engines).
inline SmoothProblem nls_as_smooth(const NlsProblem& p) {
    auto pc = std::make_shared<NlsProblem>(p);
    SmoothProblem s;
    s.name = pc->name;
    s.dim = pc->d;
    s.f = [pc](const Vector& x) { return pc->f(x); };
    s.grad = [pc](const Vector& x) { return pc->grad(x); };
    s.x0 = pc->x0;
    s.f_star = pc->f_star;
    return s;
}

} // namespace rss
