#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "rss/matrix.hpp"

namespace rss {

namespace detail {

// Generate a Householder reflector for x: H x = beta * e0, with v[0] = 1
// stored implicitly. Returns (tau, beta); v[1..] written over x[1..].
inline std::pair<double, double> make_householder(double* x, index_t n) {
    double sq = 0.0;
    for (index_t i = 1; i < n; ++i) sq += x[i] * x[i];
    const double alpha = x[0];
    if (sq == 0.0) {
        return {0.0, alpha};  // already e0-aligned, no reflection
    }
    const double norm = std::sqrt(alpha * alpha + sq);
    const double beta = (alpha >= 0.0) ? -norm : norm;
    const double tau = (beta - alpha) / beta;
    const double inv = 1.0 / (alpha - beta);
    for (index_t i = 1; i < n; ++i) x[i] *= inv;
    return {tau, beta};
}

// Apply H = I - tau v v^T (v[0]=1 implicit, v[1..] = vtail) to y in place.
inline void apply_householder(const double* vtail, index_t n, double tau, double* y) {
    if (tau == 0.0) return;
    double w = y[0];
    for (index_t i = 1; i < n; ++i) w += vtail[i - 1] * y[i];
    w *= tau;
    y[0] -= w;
    for (index_t i = 1; i < n; ++i) y[i] -= w * vtail[i - 1];
}

} // namespace detail

/// Packed Householder QR of an m x n matrix, m >= n.
struct HouseholderQR {
    DenseMatrix qf;           // reflectors below the diagonal, R on and above
    std::vector<double> tau;  // one per reflector

    index_t rows() const { return qf.rows; }
    index_t cols() const { return qf.cols; }

    /// y <- Q^T y (length m), using the first k reflectors (default: all).
    void apply_qt(Vector& y, index_t k = -1) const {
        if (k < 0) k = cols();
        for (index_t j = 0; j < k; ++j)
            detail::apply_householder(qf.col(j) + j + 1, rows() - j, tau[static_cast<size_t>(j)],
                                      y.data() + j);
    }

    /// y <- Q y (length m), using the first k reflectors (default: all).
    void apply_q(Vector& y, index_t k = -1) const {
        if (k < 0) k = cols();
        for (index_t j = k - 1; j >= 0; --j)
            detail::apply_householder(qf.col(j) + j + 1, rows() - j, tau[static_cast<size_t>(j)],
                                      y.data() + j);
    }

    /// Thin Q, m x k (default k = n).
    DenseMatrix thin_q(index_t k = -1) const {
        if (k < 0) k = cols();
        DenseMatrix Q(rows(), k);
        for (index_t j = 0; j < k; ++j) {
            Vector e(static_cast<size_t>(rows()), 0.0);
            e[static_cast<size_t>(j)] = 1.0;
            apply_q(e, k);
            for (index_t i = 0; i < rows(); ++i) Q(i, j) = e[static_cast<size_t>(i)];
        }
        return Q;
    }

    /// The n x n upper-triangular factor.
    DenseMatrix r() const {
        DenseMatrix R(cols(), cols());
        for (index_t j = 0; j < cols(); ++j)
            for (index_t i = 0; i <= j; ++i) R(i, j) = qf(i, j);
        return R;
    }
};

inline HouseholderQR householder_qr(const DenseMatrix& A) {
    if (!A.all_finite()) throw InvalidInput("householder_qr: non-finite entry");
    if (A.rows < A.cols) throw InvalidInput("householder_qr: requires rows >= cols");
    HouseholderQR f;
    f.qf = A;
    f.tau.resize(static_cast<size_t>(A.cols));
    for (index_t j = 0; j < A.cols; ++j) {
        auto [t, beta] = detail::make_householder(f.qf.col(j) + j, A.rows - j);
        f.tau[static_cast<size_t>(j)] = t;
        f.qf(j, j) = beta;
        for (index_t c = j + 1; c < A.cols; ++c)
            detail::apply_householder(f.qf.col(j) + j + 1, A.rows - j, t, f.qf.col(c) + j);
    }
    return f;
}

/// Back/forward substitution with an upper-triangular R (transpose solves
/// the lower-triangular system R^T x = b). With perturb > 0 each diagonal
/// division uses r_ii + perturb instead of r_ii.
inline Vector tri_solve(const DenseMatrix& R, const Vector& b, bool transpose = false,
                        double perturb = 0.0) {
    if (R.rows != R.cols) throw InvalidInput("tri_solve: R must be square");
    if (static_cast<index_t>(b.size()) != R.rows) throw InvalidInput("tri_solve: dimension mismatch");
    if (perturb < 0.0) throw InvalidInput("tri_solve: perturb must be >= 0");
    const index_t n = R.rows;
    Vector x = b;
    if (!transpose) {
        for (index_t i = n - 1; i >= 0; --i) {
            double s = x[static_cast<size_t>(i)];
            for (index_t j = i + 1; j < n; ++j) s -= R(i, j) * x[static_cast<size_t>(j)];
            const double d = R(i, i) + perturb;
            if (d == 0.0) throw SingularTriangular("tri_solve: zero diagonal");
            x[static_cast<size_t>(i)] = s / d;
        }
    } else {
        for (index_t i = 0; i < n; ++i) {
            double s = x[static_cast<size_t>(i)];
            for (index_t j = 0; j < i; ++j) s -= R(j, i) * x[static_cast<size_t>(j)];
            const double d = R(i, i) + perturb;
            if (d == 0.0) throw SingularTriangular("tri_solve: zero diagonal");
            x[static_cast<size_t>(i)] = s / d;
        }
    }
    return x;
}

/// Rank-revealing factorization A P = Q [R11 R12; 0 0] with detected rank p.
/// With the complete-orthogonal step (min_norm) the trailing block R12 is
/// annihilated from the right, so solves produce the minimal-norm iterate.
struct CodFactorization {
    HouseholderQR q;             // reflectors of the pivoted QR
    DenseMatrix r11;             // p x p upper triangular (CPQR mode)
    DenseMatrix r12;             // p x (k - p), may be empty
    std::vector<index_t> perm;   // column j of the factorization is A(:, perm[j])
    index_t p = 0;               // detected rank
    double rcond = 0.0;
    bool absolute_rcond = false;

    bool min_norm = false;
    DenseMatrix lt;   // p x p upper triangular, transpose of the L in [R11 R12] = L Qw
    DenseMatrix qz;   // k x p, orthonormal columns: V1 = P * qz

    index_t rows() const { return q.rows(); }
    index_t cols() const { return static_cast<index_t>(perm.size()); }

    /// Q1^T y: first p entries after applying the first p reflectors.
    Vector apply_q1t(const Vector& y) const {
        Vector w = y;
        q.apply_qt(w, p);
        w.resize(static_cast<size_t>(p));
        return w;
    }

    /// V1 w for w in R^p (permutation-embedded, or P * qz in min-norm mode).
    Vector v1_mul(const Vector& w) const {
        Vector x(static_cast<size_t>(cols()), 0.0);
        if (!min_norm) {
            for (index_t j = 0; j < p; ++j) x[static_cast<size_t>(perm[static_cast<size_t>(j)])] = w[static_cast<size_t>(j)];
        } else {
            Vector t = matvec(qz, w);
            for (index_t j = 0; j < cols(); ++j) x[static_cast<size_t>(perm[static_cast<size_t>(j)])] = t[static_cast<size_t>(j)];
        }
        return x;
    }

    /// V1^T x for x in R^d.
    Vector v1t_mul(const Vector& x) const {
        Vector xp(static_cast<size_t>(cols()));
        for (index_t j = 0; j < cols(); ++j) xp[static_cast<size_t>(j)] = x[static_cast<size_t>(perm[static_cast<size_t>(j)])];
        if (!min_norm) {
            xp.resize(static_cast<size_t>(p));
            return xp;
        }
        return matvec_t(qz, xp);
    }

    /// Solve with the triangular block: R11 (or L in min-norm mode).
    Vector r_solve(const Vector& b, bool transpose, double perturb = 0.0) const {
        if (!min_norm) return tri_solve(r11, b, transpose, perturb);
        // L = lt^T, so L y = b is the transposed solve with lt.
        return tri_solve(lt, b, !transpose, perturb);
    }
};

/// Column-pivoted Householder QR with rank truncation. The threshold is
/// rcond * |R[0,0]| by default; absolute_rcond compares |R[q,q]| >= rcond.
inline CodFactorization column_pivoted_qr(const DenseMatrix& A, double rcond,
                                          bool absolute_rcond = false, bool min_norm = false) {
    if (!A.all_finite()) throw InvalidInput("column_pivoted_qr: non-finite entry");
    if (rcond <= 0.0 || rcond >= 1.0) throw InvalidInput("column_pivoted_qr: rcond must be in (0,1)");
    const index_t m = A.rows, n = A.cols;
    const index_t kmax = std::min(m, n);
    CodFactorization f;
    f.rcond = rcond;
    f.absolute_rcond = absolute_rcond;
    f.q.qf = A;
    f.q.tau.assign(static_cast<size_t>(kmax), 0.0);
    f.perm.resize(static_cast<size_t>(n));
    std::iota(f.perm.begin(), f.perm.end(), index_t{0});

    std::vector<double> colnorm(static_cast<size_t>(n)), colnorm0(static_cast<size_t>(n));
    for (index_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (index_t i = 0; i < m; ++i) s += f.q.qf(i, j) * f.q.qf(i, j);
        colnorm[static_cast<size_t>(j)] = colnorm0[static_cast<size_t>(j)] = std::sqrt(s);
    }

    auto recompute = [&](index_t j, index_t from) {
        double s = 0.0;
        for (index_t i = from; i < m; ++i) s += f.q.qf(i, j) * f.q.qf(i, j);
        return std::sqrt(s);
    };

    for (index_t k = 0; k < kmax; ++k) {
        index_t piv = k;
        for (index_t j = k + 1; j < n; ++j)
            if (colnorm[static_cast<size_t>(j)] > colnorm[static_cast<size_t>(piv)]) piv = j;
        if (piv != k) {
            for (index_t i = 0; i < m; ++i) std::swap(f.q.qf(i, k), f.q.qf(i, piv));
            std::swap(colnorm[static_cast<size_t>(k)], colnorm[static_cast<size_t>(piv)]);
            std::swap(colnorm0[static_cast<size_t>(k)], colnorm0[static_cast<size_t>(piv)]);
            std::swap(f.perm[static_cast<size_t>(k)], f.perm[static_cast<size_t>(piv)]);
        }
        auto [t, beta] = detail::make_householder(f.q.qf.col(k) + k, m - k);
        f.q.tau[static_cast<size_t>(k)] = t;
        f.q.qf(k, k) = beta;
        for (index_t c = k + 1; c < n; ++c)
            detail::apply_householder(f.q.qf.col(k) + k + 1, m - k, t, f.q.qf.col(c) + k);
        // Downdate remaining column norms; recompute when cancellation bites.
        for (index_t j = k + 1; j < n; ++j) {
            double& cn = colnorm[static_cast<size_t>(j)];
            if (cn == 0.0) continue;
            const double tmp = std::abs(f.q.qf(k, j)) / cn;
            double d = 1.0 - tmp * tmp;
            if (d < 0.0) d = 0.0;
            const double rel = cn / colnorm0[static_cast<size_t>(j)];
            if (d * rel * rel < 1e-14)
                cn = recompute(j, k + 1);
            else
                cn *= std::sqrt(d);
        }
    }

    // Rank truncation on the pivoted diagonal.
    const double head = std::abs(f.q.qf(0, 0));
    const double thresh = absolute_rcond ? rcond : rcond * head;
    index_t p = 0;
    while (p < kmax && std::abs(f.q.qf(p, p)) >= thresh && head > 0.0) ++p;
    f.p = p;

    f.r11 = DenseMatrix(p, p);
    for (index_t j = 0; j < p; ++j)
        for (index_t i = 0; i <= j; ++i) f.r11(i, j) = f.q.qf(i, j);
    f.r12 = DenseMatrix(p, n - p);
    for (index_t j = p; j < n; ++j)
        for (index_t i = 0; i < p; ++i) f.r12(i, j - p) = f.q.qf(i, j);

    if (min_norm && p > 0) {
        // LQ of W = [R11 R12] via QR of W^T: W^T = qz * rz, so W = rz^T qz^T.
        DenseMatrix wt(n, p);
        for (index_t i = 0; i < p; ++i) {
            for (index_t j = 0; j < p; ++j) wt(j, i) = f.r11(i, j);
            for (index_t j = p; j < n; ++j) wt(j, i) = f.r12(i, j - p);
        }
        HouseholderQR lq = householder_qr(wt);
        f.lt = lq.r();
        f.qz = lq.thin_q();
        f.min_norm = true;
    }
    return f;
}

} // namespace rss
