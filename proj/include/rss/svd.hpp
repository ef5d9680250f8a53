#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rss/matrix.hpp"

namespace rss {

struct SvdResult {
    DenseMatrix u;        // m x k, orthonormal columns
    Vector sigma;         // k, non-negative, non-increasing
    DenseMatrix v;        // n x k, orthonormal columns
};

namespace detail {

// One-sided Jacobi on the columns of B (m x n, m >= n), accumulating V.
inline void jacobi_sweeps(DenseMatrix& B, DenseMatrix& V) {
    const index_t m = B.rows, n = B.cols;
    const double tol = 1e-15;
    for (int sweep = 0; sweep < 100; ++sweep) {
        bool converged = true;
        for (index_t p = 0; p < n - 1; ++p) {
            for (index_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                const double* bp = B.col(p);
                const double* bq = B.col(q);
                for (index_t i = 0; i < m; ++i) {
                    app += bp[i] * bp[i];
                    aqq += bq[i] * bq[i];
                    apq += bp[i] * bq[i];
                }
                if (std::abs(apq) <= tol * std::sqrt(app * aqq) || apq == 0.0) continue;
                converged = false;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                double* wp = B.col(p);
                double* wq = B.col(q);
                for (index_t i = 0; i < m; ++i) {
                    const double a = wp[i], b = wq[i];
                    wp[i] = cs * a - sn * b;
                    wq[i] = sn * a + cs * b;
                }
                double* vp = V.col(p);
                double* vq = V.col(q);
                for (index_t i = 0; i < n; ++i) {
                    const double a = vp[i], b = vq[i];
                    vp[i] = cs * a - sn * b;
                    vq[i] = sn * a + cs * b;
                }
            }
        }
        if (converged) break;
    }
}

// Fill trailing U columns (zero singular values) with unit vectors
// orthogonal to everything already placed.
inline void complete_orthonormal(DenseMatrix& U, const std::vector<index_t>& holes) {
    const index_t m = U.rows;
    index_t probe = 0;
    for (index_t j : holes) {
        for (; probe < m; ++probe) {
            Vector e(static_cast<size_t>(m), 0.0);
            e[static_cast<size_t>(probe)] = 1.0;
            for (index_t c = 0; c < j; ++c) {
                double d = 0.0;
                for (index_t i = 0; i < m; ++i) d += U(i, c) * e[static_cast<size_t>(i)];
                for (index_t i = 0; i < m; ++i) e[static_cast<size_t>(i)] -= d * U(i, c);
            }
            const double nrm = norm2(e);
            if (nrm > 0.5) {
                for (index_t i = 0; i < m; ++i) U(i, j) = e[static_cast<size_t>(i)] / nrm;
                ++probe;
                break;
            }
        }
    }
}

} // namespace detail

/// Thin SVD A = U diag(sigma) V^T with k = min(rows, cols) columns,
/// by one-sided Jacobi (applied to A^T when the matrix is wide).
inline SvdResult compact_svd(const DenseMatrix& A) {
    if (!A.all_finite()) throw InvalidInput("compact_svd: non-finite entry");
    if (A.rows < A.cols) {
        SvdResult t = compact_svd(transpose(A));
        std::swap(t.u, t.v);
        return t;
    }
    const index_t m = A.rows, n = A.cols;
    DenseMatrix B = A;
    DenseMatrix V = DenseMatrix::identity(n);
    detail::jacobi_sweeps(B, V);

    Vector sig(static_cast<size_t>(n));
    for (index_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (index_t i = 0; i < m; ++i) s += B(i, j) * B(i, j);
        sig[static_cast<size_t>(j)] = std::sqrt(s);
    }
    std::vector<index_t> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), index_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](index_t a, index_t b) { return sig[static_cast<size_t>(a)] > sig[static_cast<size_t>(b)]; });

    SvdResult out;
    out.u = DenseMatrix(m, n);
    out.v = DenseMatrix(n, n);
    out.sigma.resize(static_cast<size_t>(n));
    const double cutoff = (n > 0 && sig[static_cast<size_t>(order[0])] > 0.0)
                              ? 1e-300
                              : 0.0;
    std::vector<index_t> holes;
    for (index_t j = 0; j < n; ++j) {
        const index_t src = order[static_cast<size_t>(j)];
        const double s = sig[static_cast<size_t>(src)];
        out.sigma[static_cast<size_t>(j)] = s;
        for (index_t i = 0; i < n; ++i) out.v(i, j) = V(i, src);
        if (s > cutoff) {
            for (index_t i = 0; i < m; ++i) out.u(i, j) = B(i, src) / s;
        } else {
            holes.push_back(j);
        }
    }
    if (!holes.empty()) detail::complete_orthonormal(out.u, holes);
    return out;
}

/// Numerical rank: count of sigma > tol_rel * sigma_max.
inline index_t numerical_rank(const Vector& sigma, double tol_rel = 1e-10) {
    if (sigma.empty()) return 0;
    const double thresh = tol_rel * sigma[0];
    index_t r = 0;
    for (double s : sigma)
        if (s > thresh) ++r;
    return r;
}

/// Spectral norm via the thin SVD.
inline double operator_norm(const DenseMatrix& A) {
    SvdResult s = compact_svd(A);
    return s.sigma.empty() ? 0.0 : s.sigma[0];
}

} // namespace rss
