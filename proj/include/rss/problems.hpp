#pragma once

#include <cmath>

#include "rss/framework.hpp"

namespace rss {

/// f(x) = 1/2 ||x||^2, minimum 0 at the origin.
inline SmoothProblem quadratic_problem(index_t d) {
    if (d < 1) throw InvalidConfig("quadratic_problem: d must be positive");
    SmoothProblem p;
    p.name = "quadratic";
    p.dim = d;
    p.f = [](const Vector& x) { return 0.5 * dot(x, x); };
    p.grad = [](const Vector& x) { return x; };
    p.hess = [d](const Vector&) { return DenseMatrix::identity(d); };
    p.x0.assign(static_cast<size_t>(d), 1.0);
    p.f_star = 0.0;
    return p;
}

/// Chained Rosenbrock: sum_{i<d-1} 100(x_{i+1} - x_i^2)^2 + (1 - x_i)^2.
/// Minimum 0 at the all-ones point; d = 2 is the classic banana.
inline SmoothProblem rosenbrock_problem(index_t d) {
    if (d < 2) throw InvalidConfig("rosenbrock_problem: d must be >= 2");
    SmoothProblem p;
    p.name = "rosenbrock";
    p.dim = d;
    p.f = [d](const Vector& x) {
        double f = 0.0;
        for (index_t i = 0; i + 1 < d; ++i) {
            const double a = x[static_cast<size_t>(i + 1)] - x[static_cast<size_t>(i)] * x[static_cast<size_t>(i)];
            const double b = 1.0 - x[static_cast<size_t>(i)];
            f += 100.0 * a * a + b * b;
        }
        return f;
    };
    p.grad = [d](const Vector& x) {
        Vector g(static_cast<size_t>(d), 0.0);
        for (index_t i = 0; i + 1 < d; ++i) {
            const double xi = x[static_cast<size_t>(i)];
            const double a = x[static_cast<size_t>(i + 1)] - xi * xi;
            g[static_cast<size_t>(i)] += -400.0 * a * xi - 2.0 * (1.0 - xi);
            g[static_cast<size_t>(i + 1)] += 200.0 * a;
        }
        return g;
    };
    p.hess = [d](const Vector& x) {
        DenseMatrix H(d, d);
        for (index_t i = 0; i + 1 < d; ++i) {
            const double xi = x[static_cast<size_t>(i)];
            const double xn = x[static_cast<size_t>(i + 1)];
            H(i, i) += -400.0 * (xn - 3.0 * xi * xi) + 2.0;
            H(i, i + 1) += -400.0 * xi;
            H(i + 1, i) += -400.0 * xi;
            H(i + 1, i + 1) += 200.0;
        }
        return H;
    };
    p.x0.assign(static_cast<size_t>(d), 0.0);
    for (index_t i = 0; i < d; ++i) p.x0[static_cast<size_t>(i)] = (i % 2 == 0) ? -1.2 : 1.0;
    p.f_star = 0.0;
    return p;
}

inline SmoothProblem make_problem(const std::string& name, index_t d) {
    if (name == "quadratic") return quadratic_problem(d);
    if (name == "rosenbrock") return rosenbrock_problem(d);
    throw InvalidConfig("make_problem: unknown problem '" + name + "'");
}

} // namespace rss
