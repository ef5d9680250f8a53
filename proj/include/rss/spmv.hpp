#pragma once

#include "rss/matrix.hpp"

namespace rss {

inline Vector spmv(const SparseMatrix& A, const Vector& x, bool transpose = false) {
    if (!transpose) {
        if (static_cast<index_t>(x.size()) != A.cols) throw InvalidInput("spmv: dimension mismatch");
        Vector y(static_cast<size_t>(A.rows), 0.0);
        for (index_t i = 0; i < A.rows; ++i) {
            double s = 0.0;
            for (index_t k = A.row_ptr[static_cast<size_t>(i)]; k < A.row_ptr[static_cast<size_t>(i) + 1]; ++k)
                s += A.val[static_cast<size_t>(k)] * x[static_cast<size_t>(A.col_idx[static_cast<size_t>(k)])];
            y[static_cast<size_t>(i)] = s;
        }
        return y;
    }
    if (static_cast<index_t>(x.size()) != A.rows) throw InvalidInput("spmv: dimension mismatch");
    Vector y(static_cast<size_t>(A.cols), 0.0);
    for (index_t i = 0; i < A.rows; ++i) {
        const double xi = x[static_cast<size_t>(i)];
        if (xi == 0.0) continue;
        for (index_t k = A.row_ptr[static_cast<size_t>(i)]; k < A.row_ptr[static_cast<size_t>(i) + 1]; ++k)
            y[static_cast<size_t>(A.col_idx[static_cast<size_t>(k)])] += A.val[static_cast<size_t>(k)] * xi;
    }
    return y;
}

} // namespace rss
