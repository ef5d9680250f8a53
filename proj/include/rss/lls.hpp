#pragma once

#include <cmath>
#include <functional>
#include <memory>

#include "rss/matrix.hpp"
#include "rss/qr.hpp"
#include "rss/rng.hpp"
#include "rss/sketch.hpp"
#include "rss/spmv.hpp"
#include "rss/svd.hpp"

namespace rss {

struct LinOp {
    index_t rows = 0;
    index_t cols = 0;
    std::function<Vector(const Vector&)> apply;    // W y
    std::function<Vector(const Vector&)> apply_t;  // W' r
};

struct LsqrResult {
    Vector y;
    index_t iters = 0;
    double resid_norm = 0.0;
};

/// Thrown when LSQR exhausts it_max; carries the best iterate found.
struct LsqrMaxIterations : MaxIterations {
    LsqrResult best;
    LsqrMaxIterations(const std::string& msg, LsqrResult b) : MaxIterations(msg), best(std::move(b)) {}
};

/// ||W||_2 estimate by power iteration on W'W (20 steps, fixed start).
inline double power_norm_estimate(const LinOp& W, int steps = 20) {
    Rng rng(0x57a7e, 0);
    Vector v(static_cast<size_t>(W.cols));
    for (double& x : v) x = rng.next_gaussian();
    double nv = norm2(v);
    if (nv == 0.0) return 0.0;
    for (double& x : v) x /= nv;
    double est = 0.0;
    for (int i = 0; i < steps; ++i) {
        Vector w = W.apply_t(W.apply(v));
        const double nw = norm2(w);
        if (nw == 0.0) return 0.0;
        est = std::sqrt(nw);
        for (size_t j = 0; j < v.size(); ++j) v[j] = w[j] / nw;
    }
    return est;
}

/// Golub-Kahan LSQR with warm start. Stops when the estimated
/// ||W'(Wy - b)|| / (||W|| ||Wy - b||) drops below tol_r.
inline LsqrResult lsqr(const LinOp& W, const Vector& b, double tol_r, index_t it_max,
                       const Vector* y0 = nullptr) {
    if (static_cast<index_t>(b.size()) != W.rows) throw InvalidInput("lsqr: rhs dimension mismatch");
    const double normW = std::max(power_norm_estimate(W), 1e-300);

    LsqrResult res;
    res.y.assign(static_cast<size_t>(W.cols), 0.0);
    if (y0) {
        if (static_cast<index_t>(y0->size()) != W.cols) throw InvalidInput("lsqr: warm start dimension mismatch");
        res.y = *y0;
    }
    // solve for the correction on the warm-start residual
    Vector u = b;
    {
        Vector wy = W.apply(res.y);
        axpy(-1.0, wy, u);
    }
    double beta = norm2(u);
    const double beta0 = beta;
    res.resid_norm = beta;
    if (beta == 0.0) return res;
    for (double& x : u) x /= beta;

    Vector v = W.apply_t(u);
    double alpha = norm2(v);
    if (alpha == 0.0) return res;  // W'(Wy - b) = 0 already
    for (double& x : v) x /= alpha;

    Vector w = v;
    Vector z(static_cast<size_t>(W.cols), 0.0);
    double phibar = beta, rhobar = alpha;

    double last_resid = beta;
    index_t stagnant = 0;
    for (index_t it = 1; it <= it_max; ++it) {
        Vector Wu = W.apply(v);
        for (size_t j = 0; j < u.size(); ++j) u[j] = Wu[j] - alpha * u[j];
        beta = norm2(u);
        if (beta > 0.0)
            for (double& x : u) x /= beta;

        Vector Wt = W.apply_t(u);
        for (size_t j = 0; j < v.size(); ++j) v[j] = Wt[j] - beta * v[j];
        alpha = norm2(v);
        if (alpha > 0.0)
            for (double& x : v) x /= alpha;

        const double rho = std::hypot(rhobar, beta);
        const double cs = rhobar / rho;
        const double sn = beta / rho;
        const double theta = sn * alpha;
        rhobar = -cs * alpha;
        const double phi = cs * phibar;
        phibar = sn * phibar;

        for (size_t j = 0; j < z.size(); ++j) {
            z[j] += (phi / rho) * w[j];
            w[j] = v[j] - (theta / rho) * w[j];
        }

        res.iters = it;
        res.resid_norm = phibar;
        const double arnorm = phibar * alpha * std::abs(cs);  // ||W'r|| estimate
        if (phibar <= 1e-14 * beta0 || arnorm / (normW * std::max(phibar, 1e-300)) <= tol_r) {
            for (size_t j = 0; j < z.size(); ++j) res.y[j] += z[j];
            return res;
        }
        if (std::abs(last_resid - phibar) <= 1e-15 * std::max(1.0, last_resid)) {
            if (++stagnant >= 50) throw Stagnation("lsqr: residual stagnated for 50 iterations");
        } else {
            stagnant = 0;
        }
        last_resid = phibar;
    }
    for (size_t j = 0; j < z.size(); ++j) res.y[j] += z[j];
    throw LsqrMaxIterations("lsqr: iteration limit reached", std::move(res));
}

struct LlsConfig {
    index_t m = 0;  // sketch rows; 0 means ceil(m_ratio * d)
    double m_ratio = 1.7;
    Ensemble ensemble = Ensemble::hrht;
    index_t s = 1;
    double tau_a = 1e-8;
    double tau_r = 1e-6;
    index_t it_max = 10000;
    double rcond = 1e-12;
    bool rcond_absolute = false;
    double rcond_thres = 1e-10;  // perturbed back-solve trigger, as diag ratio 1/thres
    double perturb = 1e-10;
    bool min_norm = false;

    index_t rows_for(index_t d) const {
        return m > 0 ? m : static_cast<index_t>(std::ceil(m_ratio * static_cast<double>(d)));
    }
};

/// Ski-LLS-style defaults for sparse inputs.
inline LlsConfig lls_sparse_defaults() {
    LlsConfig cfg;
    cfg.m_ratio = 1.4;
    cfg.ensemble = Ensemble::hashing_s;
    cfg.s = 2;
    return cfg;
}

struct LlsDiagnostics {
    index_t rank = 0;
    double eps_measured = 0.0;
    index_t lsqr_iters = 0;
    bool used_lsqr = false;
    double residual_norm = 0.0;
    bool perturbed = false;
};

struct LlsResult {
    Vector x;
    LlsDiagnostics diag;
};

struct LlsMaxIterations : MaxIterations {
    LlsResult best;
    LlsMaxIterations(const std::string& msg, LlsResult b) : MaxIterations(msg), best(std::move(b)) {}
};

namespace detail {

struct ColumnAccess {
    index_t rows = 0;
    index_t cols = 0;
    std::function<void(index_t, Vector&)> fill_col;      // dense column j
    std::function<Vector(const Vector&)> apply;          // A x
    std::function<Vector(const Vector&)> apply_t;        // A' r
};

inline ColumnAccess access_dense(const DenseMatrix& A) {
    ColumnAccess c;
    c.rows = A.rows;
    c.cols = A.cols;
    c.fill_col = [&A](index_t j, Vector& buf) {
        for (index_t i = 0; i < A.rows; ++i) buf[static_cast<size_t>(i)] = A(i, j);
    };
    c.apply = [&A](const Vector& x) { return matvec(A, x); };
    c.apply_t = [&A](const Vector& r) { return matvec_t(A, r); };
    return c;
}

inline ColumnAccess access_sparse(const SparseMatrix& A, std::shared_ptr<std::vector<std::vector<std::pair<index_t, double>>>> csc) {
    ColumnAccess c;
    c.rows = A.rows;
    c.cols = A.cols;
    c.fill_col = [csc](index_t j, Vector& buf) {
        std::fill(buf.begin(), buf.end(), 0.0);
        for (auto [i, v] : (*csc)[static_cast<size_t>(j)]) buf[static_cast<size_t>(i)] += v;
    };
    c.apply = [&A](const Vector& x) { return spmv(A, x); };
    c.apply_t = [&A](const Vector& r) { return spmv(A, r, true); };
    return c;
}

inline LlsResult sketch_solve_impl(const ColumnAccess& A, const Vector& b, const LlsConfig& cfg,
                                   uint64_t seed) {
    const index_t n = A.rows, d = A.cols;
    if (n < d || d < 1) throw InvalidInput("sketch_solve: need n >= d >= 1");
    if (static_cast<index_t>(b.size()) != n) throw InvalidInput("sketch_solve: rhs dimension mismatch");
    const index_t m = cfg.rows_for(d);

    SketchOp S = make_sketch(cfg.ensemble, m, n, cfg.s, seed);
    DenseMatrix SA(m, d);
    Vector buf(static_cast<size_t>(n));
    for (index_t j = 0; j < d; ++j) {
        A.fill_col(j, buf);
        Vector y = S.apply(buf);
        for (index_t i = 0; i < m; ++i) SA(i, j) = y[static_cast<size_t>(i)];
    }
    Vector Sb = S.apply(b);

    CodFactorization cod = column_pivoted_qr(SA, cfg.rcond, cfg.rcond_absolute, cfg.min_norm);
    if (cod.p == 0) throw DegenerateSketch("sketch_solve: sketched matrix is numerically zero");

    // perturbed back-solve when R11 is badly scaled
    double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
    for (index_t i = 0; i < cod.p; ++i) {
        const double v = std::abs(cod.r11(i, i));
        dmax = std::max(dmax, v);
        dmin = std::min(dmin, v);
    }
    const double perturb = (dmin == 0.0 || dmax / dmin >= 1.0 / cfg.rcond_thres) ? cfg.perturb : 0.0;

    LlsResult res;
    res.diag.rank = cod.p;
    res.diag.perturbed = perturb != 0.0;
    {
        DenseMatrix Ad(n, d);
        for (index_t j = 0; j < d; ++j) {
            A.fill_col(j, buf);
            for (index_t i = 0; i < n; ++i) Ad(i, j) = buf[static_cast<size_t>(i)];
        }
        res.diag.eps_measured = embedding_report(S, Ad).eps_measured;
    }

    Vector y0 = cod.apply_q1t(Sb);
    Vector xs = cod.v1_mul(cod.r_solve(y0, false, perturb));
    Vector rs = A.apply(xs);
    axpy(-1.0, b, rs);
    res.diag.residual_norm = norm2(rs);
    if (res.diag.residual_norm <= cfg.tau_a) {
        res.x = std::move(xs);
        return res;
    }

    LinOp W;
    W.rows = n;
    W.cols = cod.p;
    W.apply = [&](const Vector& y) { return A.apply(cod.v1_mul(cod.r_solve(y, false, perturb))); };
    W.apply_t = [&](const Vector& r) { return cod.r_solve(cod.v1t_mul(A.apply_t(r)), true, perturb); };

    res.diag.used_lsqr = true;
    try {
        LsqrResult ls = lsqr(W, b, cfg.tau_r, cfg.it_max, &y0);
        res.diag.lsqr_iters = ls.iters;
        res.x = cod.v1_mul(cod.r_solve(ls.y, false, perturb));
        Vector r = A.apply(res.x);
        axpy(-1.0, b, r);
        res.diag.residual_norm = norm2(r);
        return res;
    } catch (LsqrMaxIterations& ex) {
        res.diag.lsqr_iters = ex.best.iters;
        res.x = cod.v1_mul(cod.r_solve(ex.best.y, false, perturb));
        Vector r = A.apply(res.x);
        axpy(-1.0, b, r);
        res.diag.residual_norm = norm2(r);
        throw LlsMaxIterations("sketch_solve: LSQR iteration limit reached", std::move(res));
    }
}

inline std::shared_ptr<std::vector<std::vector<std::pair<index_t, double>>>> to_csc(const SparseMatrix& A) {
    auto csc = std::make_shared<std::vector<std::vector<std::pair<index_t, double>>>>(static_cast<size_t>(A.cols));
    for (index_t i = 0; i < A.rows; ++i)
        for (index_t k = A.row_ptr[static_cast<size_t>(i)]; k < A.row_ptr[static_cast<size_t>(i + 1)]; ++k)
            (*csc)[static_cast<size_t>(A.col_idx[static_cast<size_t>(k)])].emplace_back(i, A.val[static_cast<size_t>(k)]);
    return csc;
}

} // namespace detail

inline LlsResult sketch_solve(const DenseMatrix& A, const Vector& b, const LlsConfig& cfg, uint64_t seed) {
    return detail::sketch_solve_impl(detail::access_dense(A), b, cfg, seed);
}

inline LlsResult sketch_solve(const SparseMatrix& A, const Vector& b, const LlsConfig& cfg, uint64_t seed) {
    auto csc = detail::to_csc(A);
    return detail::sketch_solve_impl(detail::access_sparse(A, csc), b, cfg, seed);
}

struct PreconditionerSample {
    double kappa_w = 0.0;
    double eps_measured = 0.0;
};

/// Build the sketched preconditioner `trials` times and measure
/// kappa(W) = sigma_max / sigma_min of W = A V1 R11^{-1}.
inline std::vector<PreconditionerSample> preconditioner_quality(const DenseMatrix& A,
                                                                const LlsConfig& cfg,
                                                                index_t trials, uint64_t seed) {
    const index_t n = A.rows, d = A.cols;
    const index_t m = cfg.rows_for(d);
    std::vector<PreconditionerSample> out;
    out.reserve(static_cast<size_t>(trials));
    for (index_t t = 0; t < trials; ++t) {
        SketchOp S = make_sketch(cfg.ensemble, m, n, cfg.s, derive_seed(seed, static_cast<uint64_t>(t)));
        Vector buf(static_cast<size_t>(n));
        DenseMatrix SA(m, d);
        for (index_t j = 0; j < d; ++j) {
            for (index_t i = 0; i < n; ++i) buf[static_cast<size_t>(i)] = A(i, j);
            Vector y = S.apply(buf);
            for (index_t i = 0; i < m; ++i) SA(i, j) = y[static_cast<size_t>(i)];
        }
        CodFactorization cod = column_pivoted_qr(SA, cfg.rcond, cfg.rcond_absolute, false);
        if (cod.p == 0) throw DegenerateSketch("preconditioner_quality: zero sketch");

        DenseMatrix W(n, cod.p);
        Vector e(static_cast<size_t>(cod.p), 0.0);
        for (index_t j = 0; j < cod.p; ++j) {
            e[static_cast<size_t>(j)] = 1.0;
            Vector col = matvec(A, cod.v1_mul(cod.r_solve(e, false, 0.0)));
            for (index_t i = 0; i < n; ++i) W(i, j) = col[static_cast<size_t>(i)];
            e[static_cast<size_t>(j)] = 0.0;
        }
        SvdResult sv = compact_svd(W);
        PreconditionerSample ps;
        ps.kappa_w = sv.sigma.front() / sv.sigma.back();
        ps.eps_measured = embedding_report(S, A).eps_measured;
        out.push_back(ps);
    }
    return out;
}

} // namespace rss
