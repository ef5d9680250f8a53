#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rss/errors.hpp"

namespace rss {

using index_t = std::ptrdiff_t;

/// Dense matrix, column-major. Entry (i,j) lives at a[i + j*rows].
struct DenseMatrix {
    index_t rows = 0;
    index_t cols = 0;
    std::vector<double> a;

    DenseMatrix() = default;
    DenseMatrix(index_t r, index_t c) : rows(r), cols(c), a(static_cast<size_t>(r * c), 0.0) {}

    double& operator()(index_t i, index_t j) { return a[static_cast<size_t>(i + j * rows)]; }
    double operator()(index_t i, index_t j) const { return a[static_cast<size_t>(i + j * rows)]; }

    double* col(index_t j) { return a.data() + j * rows; }
    const double* col(index_t j) const { return a.data() + j * rows; }

    static DenseMatrix identity(index_t n) {
        DenseMatrix m(n, n);
        for (index_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    bool all_finite() const {
        for (double v : a)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Compressed sparse row storage.
struct SparseMatrix {
    index_t rows = 0;
    index_t cols = 0;
    std::vector<index_t> row_ptr;  // size rows+1, non-decreasing
    std::vector<index_t> col_idx;  // strictly increasing within a row
    std::vector<double> val;

    index_t nnz() const { return static_cast<index_t>(val.size()); }

    void check() const {
        if (static_cast<index_t>(row_ptr.size()) != rows + 1)
            throw InvalidInput("sparse row_ptr size mismatch");
        for (index_t i = 0; i < rows; ++i) {
            if (row_ptr[i] > row_ptr[i + 1]) throw InvalidInput("sparse row_ptr not non-decreasing");
            for (index_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
                if (col_idx[k] < 0 || col_idx[k] >= cols) throw InvalidInput("sparse column index out of range");
                if (k > row_ptr[i] && col_idx[k] <= col_idx[k - 1])
                    throw InvalidInput("sparse column indices not strictly increasing in a row");
                if (!std::isfinite(val[k])) throw InvalidInput("sparse value not finite");
            }
        }
    }

    DenseMatrix densify() const {
        DenseMatrix d(rows, cols);
        for (index_t i = 0; i < rows; ++i)
            for (index_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) d(i, col_idx[k]) = val[k];
        return d;
    }

    /// Build CSR from (row, col, value) triplets; duplicates are summed.
    static SparseMatrix from_triplets(index_t rows, index_t cols,
                                      std::vector<std::tuple<index_t, index_t, double>> trip) {
        std::sort(trip.begin(), trip.end());
        SparseMatrix s;
        s.rows = rows;
        s.cols = cols;
        s.row_ptr.assign(static_cast<size_t>(rows + 1), 0);
        for (size_t k = 0; k < trip.size(); ++k) {
            auto [i, j, v] = trip[k];
            if (!s.val.empty() && k > 0) {
                auto [pi, pj, pv] = trip[k - 1];
                if (pi == i && pj == j) {
                    s.val.back() += v;
                    continue;
                }
            }
            s.col_idx.push_back(j);
            s.val.push_back(v);
            s.row_ptr[static_cast<size_t>(i) + 1]++;
        }
        for (index_t i = 0; i < rows; ++i) s.row_ptr[static_cast<size_t>(i) + 1] += s.row_ptr[static_cast<size_t>(i)];
        return s;
    }
};

using Vector = std::vector<double>;

inline double dot(const Vector& x, const Vector& y) {
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2(const Vector& x) { return std::sqrt(dot(x, x)); }

inline double norm_inf(const Vector& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

inline void axpy(double a, const Vector& x, Vector& y) {
    for (size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline void scale(Vector& x, double a) {
    for (double& v : x) v *= a;
}

inline Vector matvec(const DenseMatrix& A, const Vector& x) {
    if (static_cast<index_t>(x.size()) != A.cols) throw InvalidInput("matvec dimension mismatch");
    Vector y(static_cast<size_t>(A.rows), 0.0);
    for (index_t j = 0; j < A.cols; ++j) {
        const double xj = x[static_cast<size_t>(j)];
        if (xj == 0.0) continue;
        const double* c = A.col(j);
        for (index_t i = 0; i < A.rows; ++i) y[static_cast<size_t>(i)] += c[i] * xj;
    }
    return y;
}

inline Vector matvec_t(const DenseMatrix& A, const Vector& x) {
    if (static_cast<index_t>(x.size()) != A.rows) throw InvalidInput("matvec_t dimension mismatch");
    Vector y(static_cast<size_t>(A.cols), 0.0);
    for (index_t j = 0; j < A.cols; ++j) {
        const double* c = A.col(j);
        double s = 0.0;
        for (index_t i = 0; i < A.rows; ++i) s += c[i] * x[static_cast<size_t>(i)];
        y[static_cast<size_t>(j)] = s;
    }
    return y;
}

inline DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B) {
    if (A.cols != B.rows) throw InvalidInput("matmul dimension mismatch");
    DenseMatrix C(A.rows, B.cols);
    for (index_t j = 0; j < B.cols; ++j)
        for (index_t k = 0; k < A.cols; ++k) {
            const double b = B(k, j);
            if (b == 0.0) continue;
            const double* c = A.col(k);
            double* out = C.col(j);
            for (index_t i = 0; i < A.rows; ++i) out[i] += c[i] * b;
        }
    return C;
}

inline DenseMatrix transpose(const DenseMatrix& A) {
    DenseMatrix T(A.cols, A.rows);
    for (index_t j = 0; j < A.cols; ++j)
        for (index_t i = 0; i < A.rows; ++i) T(j, i) = A(i, j);
    return T;
}

inline double frob_norm(const DenseMatrix& A) {
    double s = 0.0;
    for (double v : A.a) s += v * v;
    return std::sqrt(s);
}

} // namespace rss
