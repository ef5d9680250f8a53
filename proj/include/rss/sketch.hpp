#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "rss/fwht.hpp"
#include "rss/matrix.hpp"
#include "rss/rng.hpp"
#include "rss/svd.hpp"

namespace rss {

enum class Ensemble {
    gaussian,
    sampling,
    hashing_s,
    hashing_variant_s,
    stable_one_hashing,
    srht,
    hrht,
    explicit_dense,  // test hook: caller-provided matrix
};

inline std::string ensemble_name(Ensemble e) {
    switch (e) {
        case Ensemble::gaussian: return "gaussian";
        case Ensemble::sampling: return "sampling";
        case Ensemble::hashing_s: return "hashing";
        case Ensemble::hashing_variant_s: return "hashing-variant";
        case Ensemble::stable_one_hashing: return "stable1";
        case Ensemble::srht: return "srht";
        case Ensemble::hrht: return "hrht";
        case Ensemble::explicit_dense: return "explicit";
    }
    return "?";
}

inline Ensemble ensemble_from_name(const std::string& s) {
    if (s == "gaussian") return Ensemble::gaussian;
    if (s == "sampling") return Ensemble::sampling;
    if (s == "hashing") return Ensemble::hashing_s;
    if (s == "hashing-variant") return Ensemble::hashing_variant_s;
    if (s == "stable1") return Ensemble::stable_one_hashing;
    if (s == "srht") return Ensemble::srht;
    if (s == "hrht") return Ensemble::hrht;
    throw InvalidConfig("unknown ensemble '" + s + "'");
}

/// A realized random embedding R^n -> R^m. The structure is drawn once at
/// construction (eagerly) so repeated applications within an iteration are
/// cheap and bit-reproducible.
struct SketchOp {
    Ensemble ensemble = Ensemble::gaussian;
    index_t m = 0;       // output (sketch) dimension
    index_t n = 0;       // logical input dimension
    index_t s = 1;       // nonzeros per column (hashing family)
    uint64_t seed = 0;

    // dense entries (gaussian / explicit)
    DenseMatrix dense;
    // per-column (row, value) lists (hashing family; for hrht over n_pad)
    std::vector<std::vector<std::pair<index_t, double>>> cols;
    // one column index per row (sampling; for srht over n_pad)
    std::vector<index_t> row_cols;
    double samp_val = 0.0;
    // randomized Hadamard part (srht / hrht)
    std::vector<double> signs;  // +-1, length n_pad
    index_t n_pad = 0;

    mutable double cached_op_norm = -1.0;

    Vector apply(const Vector& x) const {
        if (static_cast<index_t>(x.size()) != n) throw InvalidInput("sketch apply: dimension mismatch");
        switch (ensemble) {
            case Ensemble::gaussian:
            case Ensemble::explicit_dense:
                return matvec(dense, x);
            case Ensemble::sampling: {
                Vector y(static_cast<size_t>(m));
                for (index_t i = 0; i < m; ++i) y[static_cast<size_t>(i)] = samp_val * x[static_cast<size_t>(row_cols[static_cast<size_t>(i)])];
                return y;
            }
            case Ensemble::hashing_s:
            case Ensemble::hashing_variant_s:
            case Ensemble::stable_one_hashing: {
                Vector y(static_cast<size_t>(m), 0.0);
                for (index_t j = 0; j < n; ++j)
                    for (auto [i, v] : cols[static_cast<size_t>(j)]) y[static_cast<size_t>(i)] += v * x[static_cast<size_t>(j)];
                return y;
            }
            case Ensemble::srht: {
                Vector z = hadamard_part(x);
                Vector y(static_cast<size_t>(m));
                for (index_t i = 0; i < m; ++i) y[static_cast<size_t>(i)] = samp_val * z[static_cast<size_t>(row_cols[static_cast<size_t>(i)])];
                return y;
            }
            case Ensemble::hrht: {
                Vector z = hadamard_part(x);
                Vector y(static_cast<size_t>(m), 0.0);
                for (index_t j = 0; j < n_pad; ++j)
                    for (auto [i, v] : cols[static_cast<size_t>(j)]) y[static_cast<size_t>(i)] += v * z[static_cast<size_t>(j)];
                return y;
            }
        }
        throw InvalidInput("sketch apply: bad ensemble");
    }

    Vector apply_t(const Vector& y) const {
        if (static_cast<index_t>(y.size()) != m) throw InvalidInput("sketch apply_t: dimension mismatch");
        switch (ensemble) {
            case Ensemble::gaussian:
            case Ensemble::explicit_dense:
                return matvec_t(dense, y);
            case Ensemble::sampling: {
                Vector x(static_cast<size_t>(n), 0.0);
                for (index_t i = 0; i < m; ++i) x[static_cast<size_t>(row_cols[static_cast<size_t>(i)])] += samp_val * y[static_cast<size_t>(i)];
                return x;
            }
            case Ensemble::hashing_s:
            case Ensemble::hashing_variant_s:
            case Ensemble::stable_one_hashing: {
                Vector x(static_cast<size_t>(n), 0.0);
                for (index_t j = 0; j < n; ++j) {
                    double sum = 0.0;
                    for (auto [i, v] : cols[static_cast<size_t>(j)]) sum += v * y[static_cast<size_t>(i)];
                    x[static_cast<size_t>(j)] = sum;
                }
                return x;
            }
            case Ensemble::srht: {
                Vector z(static_cast<size_t>(n_pad), 0.0);
                for (index_t i = 0; i < m; ++i) z[static_cast<size_t>(row_cols[static_cast<size_t>(i)])] += samp_val * y[static_cast<size_t>(i)];
                return hadamard_part_t(z);
            }
            case Ensemble::hrht: {
                Vector z(static_cast<size_t>(n_pad), 0.0);
                for (index_t j = 0; j < n_pad; ++j) {
                    double sum = 0.0;
                    for (auto [i, v] : cols[static_cast<size_t>(j)]) sum += v * y[static_cast<size_t>(i)];
                    z[static_cast<size_t>(j)] = sum;
                }
                return hadamard_part_t(z);
            }
        }
        throw InvalidInput("sketch apply_t: bad ensemble");
    }

    DenseMatrix densify() const {
        DenseMatrix S(m, n);
        Vector e(static_cast<size_t>(n), 0.0);
        for (index_t j = 0; j < n; ++j) {
            e[static_cast<size_t>(j)] = 1.0;
            Vector y = apply(e);
            for (index_t i = 0; i < m; ++i) S(i, j) = y[static_cast<size_t>(i)];
            e[static_cast<size_t>(j)] = 0.0;
        }
        return S;
    }

    /// ||S||_2 via SVD of the densified operator, computed once and cached.
    double op_norm() const {
        if (cached_op_norm < 0.0) cached_op_norm = operator_norm(densify());
        return cached_op_norm;
    }

private:
    // H D x with zero-padding of x to n_pad.
    Vector hadamard_part(const Vector& x) const {
        Vector z(static_cast<size_t>(n_pad), 0.0);
        for (index_t j = 0; j < n; ++j) z[static_cast<size_t>(j)] = signs[static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
        fwht(z, true);
        return z;
    }

    // D H z, truncated back to the logical dimension.
    Vector hadamard_part_t(Vector z) const {
        fwht(z, true);
        for (index_t j = 0; j < n_pad; ++j) z[static_cast<size_t>(j)] *= signs[static_cast<size_t>(j)];
        z.resize(static_cast<size_t>(n));
        return z;
    }
};

namespace detail {

// s distinct rows in [m], Fisher-Yates on a scratch index set.
inline std::vector<index_t> sample_distinct(Rng& rng, index_t m, index_t s) {
    std::vector<index_t> pool(static_cast<size_t>(m));
    for (index_t i = 0; i < m; ++i) pool[static_cast<size_t>(i)] = i;
    for (index_t k = 0; k < s; ++k) {
        const index_t j = k + static_cast<index_t>(rng.next_below(static_cast<uint64_t>(m - k)));
        std::swap(pool[static_cast<size_t>(k)], pool[static_cast<size_t>(j)]);
    }
    pool.resize(static_cast<size_t>(s));
    return pool;
}

inline std::vector<std::pair<index_t, double>> merge_entries(std::map<index_t, double>&& acc) {
    std::vector<std::pair<index_t, double>> out;
    for (auto& [i, v] : acc)
        if (v != 0.0) out.emplace_back(i, v);
    return out;
}

} // namespace detail

inline SketchOp make_sketch(Ensemble ensemble, index_t m, index_t n, index_t s, uint64_t seed) {
    if (m < 1 || n < 1) throw InvalidConfig("make_sketch: dimensions must be positive");
    SketchOp S;
    S.ensemble = ensemble;
    S.m = m;
    S.n = n;
    S.s = s;
    S.seed = seed;
    Rng rng(seed, 0);

    switch (ensemble) {
        case Ensemble::gaussian: {
            S.dense = DenseMatrix(m, n);
            const double sc = 1.0 / std::sqrt(static_cast<double>(m));
            for (index_t j = 0; j < n; ++j)
                for (index_t i = 0; i < m; ++i) S.dense(i, j) = sc * rng.next_gaussian();
            break;
        }
        case Ensemble::sampling: {
            // distinct columns keep ||S||_2 = sqrt(n/m) exactly; with
            // replacement a collision would break the deterministic bound
            if (m <= n) {
                S.row_cols = detail::sample_distinct(rng, n, m);
            } else {
                S.row_cols.resize(static_cast<size_t>(m));
                for (index_t i = 0; i < m; ++i)
                    S.row_cols[static_cast<size_t>(i)] = static_cast<index_t>(rng.next_below(static_cast<uint64_t>(n)));
            }
            S.samp_val = std::sqrt(static_cast<double>(n) / static_cast<double>(m));
            break;
        }
        case Ensemble::hashing_s: {
            if (s < 1 || s > m) throw InvalidConfig("make_sketch: hashing requires 1 <= s <= m");
            S.cols.resize(static_cast<size_t>(n));
            const double v = 1.0 / std::sqrt(static_cast<double>(s));
            for (index_t j = 0; j < n; ++j) {
                auto rows = detail::sample_distinct(rng, m, s);
                for (index_t i : rows) S.cols[static_cast<size_t>(j)].emplace_back(i, rng.next_sign() * v);
            }
            break;
        }
        case Ensemble::hashing_variant_s: {
            if (s < 1) throw InvalidConfig("make_sketch: hashing variant requires s >= 1");
            S.cols.resize(static_cast<size_t>(n));
            const double v = 1.0 / std::sqrt(static_cast<double>(s));
            for (index_t j = 0; j < n; ++j) {
                std::map<index_t, double> acc;
                for (index_t k = 0; k < s; ++k) {
                    const index_t i = static_cast<index_t>(rng.next_below(static_cast<uint64_t>(m)));
                    acc[i] += rng.next_sign() * v;
                }
                S.cols[static_cast<size_t>(j)] = detail::merge_entries(std::move(acc));
            }
            break;
        }
        case Ensemble::stable_one_hashing: {
            // Repeat [m] ceil(n/m) times, then sample n row indices from that
            // multiset without replacement; each row ends up with <= ceil(n/m)
            // nonzeros of value +-1.
            const index_t reps = (n + m - 1) / m;
            std::vector<index_t> D;
            D.reserve(static_cast<size_t>(reps * m));
            for (index_t r = 0; r < reps; ++r)
                for (index_t i = 0; i < m; ++i) D.push_back(i);
            for (index_t k = 0; k < n; ++k) {
                const index_t j = k + static_cast<index_t>(rng.next_below(static_cast<uint64_t>(static_cast<index_t>(D.size()) - k)));
                std::swap(D[static_cast<size_t>(k)], D[static_cast<size_t>(j)]);
            }
            S.cols.resize(static_cast<size_t>(n));
            for (index_t j = 0; j < n; ++j)
                S.cols[static_cast<size_t>(j)].emplace_back(D[static_cast<size_t>(j)], rng.next_sign());
            break;
        }
        case Ensemble::srht: {
            S.n_pad = next_power_of_two(n);
            S.signs.resize(static_cast<size_t>(S.n_pad));
            for (index_t j = 0; j < S.n_pad; ++j) S.signs[static_cast<size_t>(j)] = rng.next_sign();
            if (m <= S.n_pad) {
                S.row_cols = detail::sample_distinct(rng, S.n_pad, m);
            } else {
                S.row_cols.resize(static_cast<size_t>(m));
                for (index_t i = 0; i < m; ++i)
                    S.row_cols[static_cast<size_t>(i)] = static_cast<index_t>(rng.next_below(static_cast<uint64_t>(S.n_pad)));
            }
            S.samp_val = std::sqrt(static_cast<double>(S.n_pad) / static_cast<double>(m));
            break;
        }
        case Ensemble::hrht: {
            if (s < 1 || s > m) throw InvalidConfig("make_sketch: hrht requires 1 <= s <= m");
            S.n_pad = next_power_of_two(n);
            S.signs.resize(static_cast<size_t>(S.n_pad));
            for (index_t j = 0; j < S.n_pad; ++j) S.signs[static_cast<size_t>(j)] = rng.next_sign();
            S.cols.resize(static_cast<size_t>(S.n_pad));
            const double v = 1.0 / std::sqrt(static_cast<double>(s));
            for (index_t j = 0; j < S.n_pad; ++j) {
                auto rows = detail::sample_distinct(rng, m, s);
                for (index_t i : rows) S.cols[static_cast<size_t>(j)].emplace_back(i, rng.next_sign() * v);
            }
            break;
        }
        case Ensemble::explicit_dense:
            throw InvalidConfig("make_sketch: explicit ensemble needs make_explicit_sketch");
    }
    return S;
}

/// Wrap a caller-provided matrix as a sketch operator (test hook).
inline SketchOp make_explicit_sketch(DenseMatrix Smat) {
    SketchOp S;
    S.ensemble = Ensemble::explicit_dense;
    S.m = Smat.rows;
    S.n = Smat.cols;
    S.dense = std::move(Smat);
    return S;
}

/// Coherence mu(A): largest row norm of the rank-r left singular factor.
inline double coherence(const DenseMatrix& A) {
    double amax = 0.0;
    for (double v : A.a) amax = std::max(amax, std::abs(v));
    if (amax == 0.0) throw InvalidInput("coherence: zero matrix");
    SvdResult svd = compact_svd(A);
    const index_t r = numerical_rank(svd.sigma);
    double mu = 0.0;
    for (index_t i = 0; i < A.rows; ++i) {
        double row = 0.0;
        for (index_t j = 0; j < r; ++j) row += svd.u(i, j) * svd.u(i, j);
        mu = std::max(mu, row);
    }
    return std::sqrt(mu);
}

/// nu(x) = ||x||_inf / ||x||_2.
inline double non_uniformity(const Vector& x) {
    const double n2 = norm2(x);
    if (n2 == 0.0) throw InvalidInput("non_uniformity: zero vector");
    return norm_inf(x) / n2;
}

struct EmbeddingReport {
    double eps_measured = 0.0;  // max(1 - sigma_min^2(SU), sigma_max^2(SU) - 1)
    bool rank_preserved = false;
    double coherence = 0.0;
};

inline EmbeddingReport embedding_report(const SketchOp& S, const DenseMatrix& A) {
    EmbeddingReport rep;
    rep.coherence = coherence(A);
    SvdResult svd = compact_svd(A);
    const index_t r = numerical_rank(svd.sigma);
    const index_t rank_a = r;

    DenseMatrix SU(S.m, r);
    Vector col(static_cast<size_t>(A.rows));
    for (index_t j = 0; j < r; ++j) {
        for (index_t i = 0; i < A.rows; ++i) col[static_cast<size_t>(i)] = svd.u(i, j);
        Vector y = S.apply(col);
        for (index_t i = 0; i < S.m; ++i) SU(i, j) = y[static_cast<size_t>(i)];
    }
    SvdResult sv = compact_svd(SU);
    const double smax = sv.sigma.empty() ? 0.0 : sv.sigma.front();
    const double smin = sv.sigma.empty() ? 0.0 : sv.sigma.back();
    rep.eps_measured = std::max(1.0 - smin * smin, smax * smax - 1.0);

    DenseMatrix SA(S.m, A.cols);
    for (index_t j = 0; j < A.cols; ++j) {
        for (index_t i = 0; i < A.rows; ++i) col[static_cast<size_t>(i)] = A(i, j);
        Vector y = S.apply(col);
        for (index_t i = 0; i < S.m; ++i) SA(i, j) = y[static_cast<size_t>(i)];
    }
    rep.rank_preserved = numerical_rank(compact_svd(SA).sigma) == rank_a;
    return rep;
}

/// Fraction of trials where ||Sy||^2 < (1 - eps_S) ||y||^2 for a fixed test
/// vector. Default y: first basis vector for sampling (the coherence stress
/// case), a random unit vector otherwise.
inline double jl_failure_rate(Ensemble ensemble, index_t l, index_t d, index_t s, double eps_S,
                              index_t trials, uint64_t seed, const Vector* y_override = nullptr) {
    if (trials < 1) throw InvalidInput("jl_failure_rate: trials must be >= 1");
    Vector y(static_cast<size_t>(d), 0.0);
    if (y_override) {
        y = *y_override;
        if (norm2(y) == 0.0) throw InvalidInput("jl_failure_rate: zero test vector");
    } else if (ensemble == Ensemble::sampling) {
        y[0] = 1.0;
    } else {
        Rng rng(seed, ~uint64_t{0});
        for (double& v : y) v = rng.next_gaussian();
        const double nrm = norm2(y);
        for (double& v : y) v /= nrm;
    }
    const double rhs = (1.0 - eps_S) * dot(y, y);
    index_t failures = 0;
    for (index_t t = 0; t < trials; ++t) {
        SketchOp S = make_sketch(ensemble, l, d, s, derive_seed(seed, static_cast<uint64_t>(t)));
        Vector sy = S.apply(y);
        if (dot(sy, sy) < rhs) ++failures;
    }
    return static_cast<double>(failures) / static_cast<double>(trials);
}

/// Theoretical ||S||_2 bounds. delta2 only enters the Gaussian bound.
inline double s_max_bound(Ensemble ensemble, index_t l, index_t d, index_t s, double delta2 = 0.0) {
    const double dd = static_cast<double>(d), ll = static_cast<double>(l);
    switch (ensemble) {
        case Ensemble::gaussian:
            if (delta2 <= 0.0 || delta2 >= 1.0)
                throw InvalidConfig("s_max_bound: gaussian requires delta2 in (0,1)");
            return 1.0 + std::sqrt(dd / ll) + std::sqrt(2.0 * std::log(1.0 / delta2) / ll);
        case Ensemble::hashing_s:
        case Ensemble::hashing_variant_s:
            return std::sqrt(dd / static_cast<double>(s));
        case Ensemble::stable_one_hashing:
            return std::sqrt(std::ceil(dd / ll));
        case Ensemble::sampling:
            return std::sqrt(dd / ll);
        default:
            throw InvalidConfig("s_max_bound: no bound tabulated for this ensemble");
    }
}

} // namespace rss
