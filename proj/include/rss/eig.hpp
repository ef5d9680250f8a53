#pragma once

#include <algorithm>
#include <cmath>

#include "rss/matrix.hpp"

namespace rss {

struct EigSymResult {
    Vector values;    // ascending
    DenseMatrix vecs; // column j pairs with values[j]
};

namespace detail {

inline double hypot2(double a, double b) { return std::sqrt(a * a + b * b); }

// Householder reduction to tridiagonal form (tred2-style), accumulating Z.
inline void tridiagonalize(DenseMatrix& Z, Vector& d, Vector& e) {
    const index_t n = Z.rows;
    d.assign(static_cast<size_t>(n), 0.0);
    e.assign(static_cast<size_t>(n), 0.0);
    for (index_t j = 0; j < n; ++j) d[static_cast<size_t>(j)] = Z(n - 1, j);
    for (index_t i = n - 1; i > 0; --i) {
        double scale = 0.0, h = 0.0;
        for (index_t k = 0; k < i; ++k) scale += std::abs(d[static_cast<size_t>(k)]);
        if (scale == 0.0) {
            e[static_cast<size_t>(i)] = d[static_cast<size_t>(i - 1)];
            for (index_t j = 0; j < i; ++j) {
                d[static_cast<size_t>(j)] = Z(i - 1, j);
                Z(i, j) = 0.0;
                Z(j, i) = 0.0;
            }
        } else {
            for (index_t k = 0; k < i; ++k) {
                d[static_cast<size_t>(k)] /= scale;
                h += d[static_cast<size_t>(k)] * d[static_cast<size_t>(k)];
            }
            double f = d[static_cast<size_t>(i - 1)];
            double g = std::sqrt(h);
            if (f > 0) g = -g;
            e[static_cast<size_t>(i)] = scale * g;
            h -= f * g;
            d[static_cast<size_t>(i - 1)] = f - g;
            for (index_t j = 0; j < i; ++j) e[static_cast<size_t>(j)] = 0.0;
            for (index_t j = 0; j < i; ++j) {
                f = d[static_cast<size_t>(j)];
                Z(j, i) = f;
                g = e[static_cast<size_t>(j)] + Z(j, j) * f;
                for (index_t k = j + 1; k <= i - 1; ++k) {
                    g += Z(k, j) * d[static_cast<size_t>(k)];
                    e[static_cast<size_t>(k)] += Z(k, j) * f;
                }
                e[static_cast<size_t>(j)] = g;
            }
            f = 0.0;
            for (index_t j = 0; j < i; ++j) {
                e[static_cast<size_t>(j)] /= h;
                f += e[static_cast<size_t>(j)] * d[static_cast<size_t>(j)];
            }
            const double hh = f / (h + h);
            for (index_t j = 0; j < i; ++j) e[static_cast<size_t>(j)] -= hh * d[static_cast<size_t>(j)];
            for (index_t j = 0; j < i; ++j) {
                f = d[static_cast<size_t>(j)];
                g = e[static_cast<size_t>(j)];
                for (index_t k = j; k <= i - 1; ++k)
                    Z(k, j) -= f * e[static_cast<size_t>(k)] + g * d[static_cast<size_t>(k)];
                d[static_cast<size_t>(j)] = Z(i - 1, j);
                Z(i, j) = 0.0;
            }
        }
        d[static_cast<size_t>(i)] = h;
    }
    // Accumulate transformations.
    for (index_t i = 0; i < n - 1; ++i) {
        Z(n - 1, i) = Z(i, i);
        Z(i, i) = 1.0;
        const double h = d[static_cast<size_t>(i + 1)];
        if (h != 0.0) {
            for (index_t k = 0; k <= i; ++k) d[static_cast<size_t>(k)] = Z(k, i + 1) / h;
            for (index_t j = 0; j <= i; ++j) {
                double g = 0.0;
                for (index_t k = 0; k <= i; ++k) g += Z(k, i + 1) * Z(k, j);
                for (index_t k = 0; k <= i; ++k) Z(k, j) -= g * d[static_cast<size_t>(k)];
            }
        }
        for (index_t k = 0; k <= i; ++k) Z(k, i + 1) = 0.0;
    }
    for (index_t j = 0; j < n; ++j) {
        d[static_cast<size_t>(j)] = Z(n - 1, j);
        Z(n - 1, j) = 0.0;
    }
    Z(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

// Implicit QL with Wilkinson-style shifts on the tridiagonal (tql2-style).
inline void tridiagonal_ql(Vector& d, Vector& e, DenseMatrix& Z) {
    const index_t n = static_cast<index_t>(d.size());
    for (index_t i = 1; i < n; ++i) e[static_cast<size_t>(i - 1)] = e[static_cast<size_t>(i)];
    e[static_cast<size_t>(n - 1)] = 0.0;
    double f = 0.0, tst1 = 0.0;
    const double eps = 2.220446049250313e-16;
    for (index_t l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::abs(d[static_cast<size_t>(l)]) + std::abs(e[static_cast<size_t>(l)]));
        index_t m = l;
        while (m < n) {
            if (std::abs(e[static_cast<size_t>(m)]) <= eps * tst1) break;
            ++m;
        }
        if (m > l) {
            for (int iter = 0;; ++iter) {
                if (iter > 60) throw NumericalBreakdown("eig_sym: QL iteration failed to converge");
                // Wilkinson shift from the leading 2x2.
                double g = d[static_cast<size_t>(l)];
                double p = (d[static_cast<size_t>(l + 1)] - g) / (2.0 * e[static_cast<size_t>(l)]);
                double r = hypot2(p, 1.0);
                if (p < 0) r = -r;
                d[static_cast<size_t>(l)] = e[static_cast<size_t>(l)] / (p + r);
                d[static_cast<size_t>(l + 1)] = e[static_cast<size_t>(l)] * (p + r);
                const double dl1 = d[static_cast<size_t>(l + 1)];
                double h = g - d[static_cast<size_t>(l)];
                for (index_t i = l + 2; i < n; ++i) d[static_cast<size_t>(i)] -= h;
                f += h;
                p = d[static_cast<size_t>(m)];
                double c = 1.0, c2 = c, c3 = c;
                const double el1 = e[static_cast<size_t>(l + 1)];
                double s = 0.0, s2 = 0.0;
                for (index_t i = m - 1; i >= l; --i) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[static_cast<size_t>(i)];
                    h = c * p;
                    r = hypot2(p, e[static_cast<size_t>(i)]);
                    e[static_cast<size_t>(i + 1)] = s * r;
                    s = e[static_cast<size_t>(i)] / r;
                    c = p / r;
                    p = c * d[static_cast<size_t>(i)] - s * g;
                    d[static_cast<size_t>(i + 1)] = h + s * (c * g + s * d[static_cast<size_t>(i)]);
                    for (index_t k = 0; k < n; ++k) {
                        h = Z(k, i + 1);
                        Z(k, i + 1) = s * Z(k, i) + c * h;
                        Z(k, i) = c * Z(k, i) - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[static_cast<size_t>(l)] / dl1;
                e[static_cast<size_t>(l)] = s * p;
                d[static_cast<size_t>(l)] = c * p;
                if (std::abs(e[static_cast<size_t>(l)]) <= eps * tst1) break;
            }
        }
        d[static_cast<size_t>(l)] += f;
        e[static_cast<size_t>(l)] = 0.0;
    }
}

} // namespace detail

/// Full symmetric eigendecomposition H = Z diag(d) Z^T, values ascending.
/// Eigenvector sign convention: first component of magnitude above
/// 1e-12 * ||v||_inf is positive.
inline EigSymResult eig_sym(const DenseMatrix& H) {
    if (H.rows != H.cols) throw InvalidInput("eig_sym: matrix must be square");
    if (!H.all_finite()) throw InvalidInput("eig_sym: non-finite entry");
    double amax = 0.0;
    for (double v : H.a) amax = std::max(amax, std::abs(v));
    for (index_t j = 0; j < H.cols; ++j)
        for (index_t i = 0; i < j; ++i)
            if (std::abs(H(i, j) - H(j, i)) > 1e-10 * (1.0 + amax))
                throw InvalidInput("eig_sym: matrix not symmetric");

    const index_t n = H.rows;
    EigSymResult out;
    out.vecs = H;
    // Symmetrize to kill the sub-tolerance asymmetry before reduction.
    for (index_t j = 0; j < n; ++j)
        for (index_t i = 0; i < j; ++i) {
            const double v = 0.5 * (out.vecs(i, j) + out.vecs(j, i));
            out.vecs(i, j) = v;
            out.vecs(j, i) = v;
        }
    Vector e;
    if (n == 1) {
        out.values = {H(0, 0)};
        out.vecs = DenseMatrix::identity(1);
        return out;
    }
    detail::tridiagonalize(out.vecs, out.values, e);
    detail::tridiagonal_ql(out.values, e, out.vecs);

    // Sort ascending (QL output is nearly sorted but not guaranteed).
    std::vector<index_t> order(static_cast<size_t>(n));
    for (index_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](index_t a, index_t b) {
        return out.values[static_cast<size_t>(a)] < out.values[static_cast<size_t>(b)];
    });
    EigSymResult sorted;
    sorted.values.resize(static_cast<size_t>(n));
    sorted.vecs = DenseMatrix(n, n);
    for (index_t j = 0; j < n; ++j) {
        const index_t src = order[static_cast<size_t>(j)];
        sorted.values[static_cast<size_t>(j)] = out.values[static_cast<size_t>(src)];
        double vmax = 0.0;
        for (index_t i = 0; i < n; ++i) vmax = std::max(vmax, std::abs(out.vecs(i, src)));
        double sign = 1.0;
        for (index_t i = 0; i < n; ++i) {
            if (std::abs(out.vecs(i, src)) > 1e-12 * vmax) {
                sign = out.vecs(i, src) > 0.0 ? 1.0 : -1.0;
                break;
            }
        }
        for (index_t i = 0; i < n; ++i) sorted.vecs(i, j) = sign * out.vecs(i, src);
    }
    return sorted;
}

/// Smallest eigenpair of a symmetric matrix.
inline std::pair<double, Vector> eig_sym_min(const DenseMatrix& H) {
    EigSymResult r = eig_sym(H);
    Vector v(static_cast<size_t>(H.rows));
    for (index_t i = 0; i < H.rows; ++i) v[static_cast<size_t>(i)] = r.vecs(i, 0);
    return {r.values[0], v};
}

} // namespace rss
