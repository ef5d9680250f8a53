#pragma once

#include <cmath>

#include "rss/matrix.hpp"

namespace rss {

inline bool is_power_of_two(index_t n) { return n > 0 && (n & (n - 1)) == 0; }

/// In-place fast Walsh-Hadamard transform. With normalize the transform is
/// orthogonal (H_ij = n^{-1/2} (-1)^{<(i-1)_2,(j-1)_2>}) and an involution.
inline void fwht(Vector& x, bool normalize = true) {
    const index_t n = static_cast<index_t>(x.size());
    if (!is_power_of_two(n)) throw InvalidInput("fwht: length must be a power of 2");
    for (index_t len = 1; len < n; len <<= 1) {
        for (index_t i = 0; i < n; i += len << 1) {
            for (index_t j = i; j < i + len; ++j) {
                const double a = x[static_cast<size_t>(j)];
                const double b = x[static_cast<size_t>(j + len)];
                x[static_cast<size_t>(j)] = a + b;
                x[static_cast<size_t>(j + len)] = a - b;
            }
        }
    }
    if (normalize) {
        const double s = 1.0 / std::sqrt(static_cast<double>(n));
        for (double& v : x) v *= s;
    }
}

inline index_t next_power_of_two(index_t n) {
    index_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace rss
