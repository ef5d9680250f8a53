#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "rss/eig.hpp"
#include "rss/firstorder.hpp"
#include "rss/framework.hpp"
#include "rss/sketch.hpp"

namespace rss {

/// Reduced cubic model m(s) = f0 + g_hat's + 1/2 s'H_hat s + (s'Ms)^{3/2}/(3 alpha)
/// with M = S S' (so (s'Ms)^{1/2} = ||S's||).
struct CubicModel {
    double f0 = 0.0;
    Vector g_hat;
    DenseMatrix H_hat;  // S hess S'
    DenseMatrix M;      // S S'
    double alpha = 0.0;
    double kappa_T = 0.0;
    double kappa_S = 0.0;
};

enum class ArcTruthVariant { hessian_embedding, sparse_hessian, norm_only, full_second_order };

struct ArcTruthSpec {
    ArcTruthVariant variant = ArcTruthVariant::norm_only;
    double eps_S2 = 0.5;   // embedding / concentration constant
    double S_max = 1.0;
    double eps = 1e-3;     // first-order target (sparse_hessian variant)
    double eps_H = 1e-3;   // second-order target
    double alpha_max = 1.0;
};

struct ArcStepResult {
    Vector s_hat;
    double model_decrease = 0.0;   // m(0) - m(s)
    double taylor_decrease = 0.0;  // q(0) - q(s), quadratic part only
    double lambda = 0.0;           // multiplier ||u||/alpha at the solution
    double step_norm = 0.0;        // ||S' s_hat|| = ||u||
};

namespace detail {

// V diag(pow(values)) V' for a symmetric eigendecomposition.
inline DenseMatrix eig_power(const EigSymResult& e, double expo) {
    const index_t n = e.vecs.rows;
    DenseMatrix out(n, n);
    for (index_t i = 0; i < n; ++i)
        for (index_t j = i; j < n; ++j) {
            double sum = 0.0;
            for (index_t k = 0; k < n; ++k)
                sum += e.vecs(i, k) * std::pow(e.values[static_cast<size_t>(k)], expo) * e.vecs(j, k);
            out(i, j) = sum;
            out(j, i) = sum;
        }
    return out;
}

inline DenseMatrix sym_sandwich(const DenseMatrix& P, const DenseMatrix& H) {
    DenseMatrix T = matmul(P, matmul(H, P));
    for (index_t i = 0; i < T.rows; ++i)
        for (index_t j = i + 1; j < T.cols; ++j) {
            const double v = 0.5 * (T(i, j) + T(j, i));
            T(i, j) = v;
            T(j, i) = v;
        }
    return T;
}

} // namespace detail

/// Global minimizer of the reduced cubic model via the change of variables
/// u = M^{1/2} s, which yields the standard cubic-regularized subproblem;
/// solved by safeguarded Newton/bisection on the secular equation
/// ||u(lambda)|| = alpha*lambda with (H_tilde + lambda I) u = -g_tilde.
inline ArcStepResult arc_step(const CubicModel& model, bool want_second_order = false) {
    if (!(model.alpha > 0.0)) throw InvalidInput("arc_step: alpha must be positive");
    const index_t l = static_cast<index_t>(model.g_hat.size());

    EigSymResult em = eig_sym(model.M);
    const double mmax = em.values.empty() ? 0.0 : em.values.back();
    if (!(mmax > 0.0) || em.values.front() < 1e-12 * mmax)
        throw DegenerateSketch("arc_step: S S' is numerically singular");
    DenseMatrix Msqrt = detail::eig_power(em, 0.5);
    DenseMatrix Minv = detail::eig_power(em, -0.5);

    Vector gt = matvec(Minv, model.g_hat);
    DenseMatrix Ht = detail::sym_sandwich(Minv, model.H_hat);
    EigSymResult eh = eig_sym(Ht);
    const Vector& mu = eh.values;  // ascending
    Vector gbar = matvec_t(eh.vecs, gt);

    const double alpha = model.alpha;
    const double lam_lo = std::max(0.0, -mu.front());
    const double gscale = norm2(gbar);

    auto unorm2_at = [&](double lam) {
        double sum = 0.0;
        for (index_t i = 0; i < l; ++i) {
            const double den = mu[static_cast<size_t>(i)] + lam;
            const double gi = gbar[static_cast<size_t>(i)];
            if (gi == 0.0) continue;
            if (den <= 0.0) return std::numeric_limits<double>::infinity();
            sum += gi * gi / (den * den);
        }
        return sum;
    };

    double lam = 0.0;
    Vector ubar(static_cast<size_t>(l), 0.0);
    if (gscale == 0.0) {
        if (mu.front() >= 0.0) {
            lam = 0.0;  // origin is the global minimizer
        } else {
            lam = lam_lo;  // pure negative-curvature step to the model boundary
            ubar[0] = alpha * lam;
        }
    } else {
        auto secular = [&](double La) { return std::sqrt(unorm2_at(La)) - alpha * La; };
        if (secular(lam_lo) <= 0.0 && lam_lo > 0.0) {
            // hard case: no component along the most-negative eigenspace
            lam = lam_lo;
            double up2 = 0.0;
            for (index_t i = 0; i < l; ++i) {
                const double den = mu[static_cast<size_t>(i)] + lam;
                if (den > 1e-12 * (std::abs(mu.back()) + lam + 1.0)) {
                    ubar[static_cast<size_t>(i)] = -gbar[static_cast<size_t>(i)] / den;
                    up2 += ubar[static_cast<size_t>(i)] * ubar[static_cast<size_t>(i)];
                }
            }
            const double t2 = alpha * alpha * lam * lam - up2;
            ubar[0] += std::sqrt(std::max(0.0, t2));
        } else {
            double lo = lam_lo;
            double hi = std::max(1.0, 2.0 * lam_lo + 1.0);
            int guard = 0;
            while (secular(hi) > 0.0) {
                lo = hi;
                hi *= 2.0;
                if (++guard > 200) throw SubproblemFailure("arc_step: failed to bracket the secular root");
            }
            bool converged = false;
            lam = 0.5 * (lo + hi);
            for (int it = 0; it < 200; ++it) {
                const double un = std::sqrt(unorm2_at(lam));
                if (std::isfinite(un) && std::abs(un / alpha - lam) <= 1e-10 * (1.0 + lam)) {
                    converged = true;
                    break;
                }
                if (!std::isfinite(un) || un - alpha * lam > 0.0) lo = lam; else hi = lam;
                // Newton on the secular function, safeguarded by the bracket
                double next = 0.5 * (lo + hi);
                if (std::isfinite(un) && un > 0.0) {
                    double dsum = 0.0;
                    for (index_t i = 0; i < l; ++i) {
                        const double den = mu[static_cast<size_t>(i)] + lam;
                        const double gi = gbar[static_cast<size_t>(i)];
                        if (gi != 0.0) dsum += gi * gi / (den * den * den);
                    }
                    const double deriv = -dsum / un - alpha;
                    const double cand = lam - (un - alpha * lam) / deriv;
                    if (cand > lo && cand < hi) next = cand;
                }
                lam = next;
            }
            if (!converged) throw SubproblemFailure("arc_step: secular iteration did not converge");
            for (index_t i = 0; i < l; ++i)
                ubar[static_cast<size_t>(i)] = -gbar[static_cast<size_t>(i)] / (mu[static_cast<size_t>(i)] + lam);
        }
    }

    Vector u = matvec(eh.vecs, ubar);
    ArcStepResult res;
    res.s_hat = matvec(Minv, u);
    res.lambda = lam;
    res.step_norm = norm2(ubar);

    Vector Hs = matvec(model.H_hat, res.s_hat);
    res.taylor_decrease = -(dot(model.g_hat, res.s_hat) + 0.5 * dot(res.s_hat, Hs));
    res.model_decrease = res.taylor_decrease - res.step_norm * res.step_norm * res.step_norm / (3.0 * alpha);

    // first-order optimality of the reduced model
    Vector Ms = matvec(model.M, res.s_hat);
    Vector gm = model.g_hat;
    for (index_t i = 0; i < l; ++i)
        gm[static_cast<size_t>(i)] += Hs[static_cast<size_t>(i)] + (res.step_norm / alpha) * Ms[static_cast<size_t>(i)];
    const double opt_tol = model.kappa_T * res.step_norm * res.step_norm + 1e-8 * (1.0 + norm2(model.g_hat));
    if (norm2(gm) > opt_tol) throw SubproblemFailure("arc_step: stationarity check failed");

    if (want_second_order && res.step_norm > 0.0) {
        DenseMatrix Hm = model.H_hat;
        for (index_t i = 0; i < l; ++i)
            for (index_t j = 0; j < l; ++j)
                Hm(i, j) += (Ms[static_cast<size_t>(i)] * Ms[static_cast<size_t>(j)] / res.step_norm +
                             res.step_norm * model.M(i, j)) / alpha;
        const double lmin = eig_sym_min(Hm).first;
        if (lmin < -model.kappa_S * res.step_norm - 1e-6 * (1.0 + std::abs(lmin)))
            throw SubproblemFailure("arc_step: model Hessian not sufficiently positive");
    }
    return res;
}

inline bool arc_sufficient_decrease(double f_old, double f_new, double taylor_decrease, double theta) {
    return taylor_decrease > 0.0 && f_old - f_new >= theta * taylor_decrease;
}

inline bool arc_truth(const SketchOp& S, const Vector& grad, const DenseMatrix& hess,
                      const ArcTruthSpec& spec) {
    if (S.op_norm() > spec.S_max) return false;
    switch (spec.variant) {
        case ArcTruthVariant::norm_only:
            return true;
        case ArcTruthVariant::hessian_embedding: {
            // sigma_min(S U) >= sqrt(1 - eps) for U an orthonormal basis of
            // range([grad f, hess f])
            const index_t d = static_cast<index_t>(grad.size());
            DenseMatrix Mk(d, d + 1);
            for (index_t i = 0; i < d; ++i) {
                Mk(i, 0) = grad[static_cast<size_t>(i)];
                for (index_t j = 0; j < d; ++j) Mk(i, j + 1) = hess(i, j);
            }
            SvdResult svd = compact_svd(Mk);
            const index_t r = numerical_rank(svd.sigma);
            if (r == 0) return true;
            DenseMatrix SU(S.m, r);
            Vector col(static_cast<size_t>(d));
            for (index_t j = 0; j < r; ++j) {
                for (index_t i = 0; i < d; ++i) col[static_cast<size_t>(i)] = svd.u(i, j);
                Vector y = S.apply(col);
                for (index_t i = 0; i < S.m; ++i) SU(i, j) = y[static_cast<size_t>(i)];
            }
            SvdResult sv = compact_svd(SU);
            const double smin = sv.sigma.size() == static_cast<size_t>(r) ? sv.sigma.back() : 0.0;
            return smin >= std::sqrt(1.0 - spec.eps_S2);
        }
        case ArcTruthVariant::sparse_hessian: {
            const index_t d = static_cast<index_t>(grad.size());
            DenseMatrix SH(S.m, d);
            Vector col(static_cast<size_t>(d));
            for (index_t j = 0; j < d; ++j) {
                for (index_t i = 0; i < d; ++i) col[static_cast<size_t>(i)] = hess(i, j);
                Vector y = S.apply(col);
                for (index_t i = 0; i < S.m; ++i) SH(i, j) = y[static_cast<size_t>(i)];
            }
            const double ck = std::sqrt(4.0 * std::sqrt(1.0 - spec.eps_S2) * spec.S_max / (3.0 * spec.alpha_max));
            if (operator_norm(SH) > ck * std::sqrt(spec.eps)) return false;
            Vector sg = S.apply(grad);
            return dot(sg, sg) >= (1.0 - spec.eps_S2) * spec.eps * spec.eps;
        }
        case ArcTruthVariant::full_second_order: {
            EigSymResult e = eig_sym(hess);
            double amax = 0.0;
            for (double v : e.values) amax = std::max(amax, std::abs(v));
            if (amax == 0.0) return true;
            // nonzero eigenpairs in descending order; index r is the smallest
            std::vector<index_t> idx;
            for (index_t i = static_cast<index_t>(e.values.size()) - 1; i >= 0; --i)
                if (std::abs(e.values[static_cast<size_t>(i)]) > 1e-10 * amax) idx.push_back(i);
            if (idx.empty()) return true;
            const index_t d = hess.rows;
            Vector col(static_cast<size_t>(d));
            auto sketch_vec = [&](index_t j) {
                for (index_t i = 0; i < d; ++i) col[static_cast<size_t>(i)] = e.vecs(i, j);
                return S.apply(col);
            };
            Vector wr = sketch_vec(idx.back());
            const double wr2 = dot(wr, wr);
            if (wr2 < 1.0 - spec.eps_S2 || wr2 > 1.0 + spec.eps_S2) return false;
            const double cap = 16.0 * (1.0 + spec.eps_S2) / static_cast<double>(S.m);
            for (size_t t = 0; t + 1 < idx.size(); ++t) {
                Vector wi = sketch_vec(idx[t]);
                const double ip = dot(wi, wr);
                if (ip * ip > cap) return false;
            }
            return true;
        }
    }
    return false;
}

inline double h_arc_first(double eps, double alpha, double eps_S2, double Smax, double kappaT,
                          double LH, double theta, double alpha_max) {
    const double a = std::pow(2.0, 1.5) / std::pow(LH, 1.5);
    const double b = std::pow(std::sqrt(1.0 - eps_S2) / (Smax / alpha + kappaT), 1.5);
    return (theta / (3.0 * alpha_max)) * std::pow(eps / 2.0, 1.5) * std::min(a, b);
}

inline double h_arc_sparse(double eps, double alpha, double eps_S, double Smax,
                           double alpha_max, double theta) {
    const double base = std::sqrt(1.0 - eps_S) / (3.0 * Smax * alpha_max);
    return (theta * alpha * alpha * std::pow(eps, 1.5) / 3.0) * std::pow(base, 1.5);
}

/// m(eps_S, r, l, kappa_H) from the full-space second-order rate; m = 1
/// recovers the subspace variant.
inline double arc_second_multiplier(double eps_S, index_t r, index_t l, double kappa_H) {
    return 1.0 - eps_S +
           16.0 * (static_cast<double>(r - 1) / static_cast<double>(l)) *
               ((1.0 + eps_S) / (1.0 - eps_S)) * kappa_H;
}

inline double h_arc_second(double eps_H, double alpha, double Smax, double kappaS,
                           double theta, double m = 1.0) {
    const double denom = 2.0 * Smax * Smax / alpha + kappaS;
    const double em = eps_H * m;
    return theta * em * em * em / (3.0 * alpha) / (denom * denom * denom);
}

/// Instrumentation: smallest eigenvalue of the sketched and full Hessians.
inline std::pair<double, double> second_order_measures(const Vector& x, const SmoothProblem& prob,
                                                       const SketchOp& S) {
    DenseMatrix H = prob.hess(x);
    DenseMatrix Sd = S.densify();
    DenseMatrix SH = matmul(Sd, matmul(H, transpose(Sd)));
    for (index_t i = 0; i < SH.rows; ++i)
        for (index_t j = i + 1; j < SH.cols; ++j) {
            const double v = 0.5 * (SH(i, j) + SH(j, i));
            SH(i, j) = v;
            SH(j, i) = v;
        }
    return {eig_sym_min(SH).first, eig_sym_min(H).first};
}

struct ArcConfig {
    Ensemble ensemble = Ensemble::gaussian;
    index_t l = 1;
    index_t s = 1;
    double kappa_T = 0.0;
    double kappa_S = 0.0;
    bool second_order = false;
    ArcTruthSpec truth;
    bool identity_sketch = false;
};

class ArcEngine : public StepEngine {
public:
    explicit ArcEngine(ArcConfig cfg) : cfg_(std::move(cfg)) {}

    StepOutcome compute(const SmoothProblem& prob, const Vector& x, double fx,
                        const Vector& grad, double alpha, index_t k, uint64_t seed) override {
        if (!prob.hess) throw InvalidInput("arc engine requires a Hessian");
        SketchOp S = cfg_.identity_sketch
                         ? make_explicit_sketch(DenseMatrix::identity(prob.dim))
                         : make_sketch(cfg_.ensemble, cfg_.l, prob.dim, cfg_.s,
                                       derive_seed(seed, static_cast<uint64_t>(k)));
        DenseMatrix H = prob.hess(x);
        DenseMatrix Sd = S.densify();
        CubicModel m;
        m.f0 = fx;
        m.g_hat = S.apply(grad);
        m.H_hat = matmul(Sd, matmul(H, transpose(Sd)));
        m.M = matmul(Sd, transpose(Sd));
        for (index_t i = 0; i < S.m; ++i)
            for (index_t j = i + 1; j < S.m; ++j) {
                double v = 0.5 * (m.H_hat(i, j) + m.H_hat(j, i));
                m.H_hat(i, j) = v; m.H_hat(j, i) = v;
                v = 0.5 * (m.M(i, j) + m.M(j, i));
                m.M(i, j) = v; m.M(j, i) = v;
            }
        m.alpha = alpha;
        m.kappa_T = cfg_.kappa_T;
        m.kappa_S = cfg_.kappa_S;

        ArcStepResult r = arc_step(m, cfg_.second_order);
        StepOutcome out;
        out.step = S.apply_t(r.s_hat);
        // the framework's success test divides by the Taylor decrease here
        out.model_decrease = r.taylor_decrease;
        out.is_true = arc_truth(S, grad, H, cfg_.truth);
        return out;
    }
    std::string name() const override { return "arc"; }

private:
    ArcConfig cfg_;
};

} // namespace rss
