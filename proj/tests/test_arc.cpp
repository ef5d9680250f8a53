#include <catch2/catch_amalgamated.hpp>

#include "rss/arc.hpp"
#include "rss/problems.hpp"

#include <cmath>

using namespace rss;

namespace {

CubicModel cubic(const DenseMatrix& H, const DenseMatrix& M, const Vector& g, double alpha) {
    CubicModel m;
    m.f0 = 0.0;
    m.g_hat = g;
    m.H_hat = H;
    m.M = M;
    m.alpha = alpha;
    return m;
}

double cubic_value(const CubicModel& m, const Vector& s) {
    Vector Hs = matvec(m.H_hat, s);
    Vector Ms = matvec(m.M, s);
    const double w = std::sqrt(dot(s, Ms));
    return dot(m.g_hat, s) + 0.5 * dot(s, Hs) + w * w * w / (3.0 * m.alpha);
}

DenseMatrix random_sym(index_t n, uint64_t seed, double scale = 1.0) {
    Rng rng(seed, 0);
    DenseMatrix G(n, n), H(n, n);
    for (index_t j = 0; j < n; ++j)
        for (index_t i = 0; i < n; ++i) G(i, j) = rng.next_gaussian();
    for (index_t j = 0; j < n; ++j)
        for (index_t i = 0; i < n; ++i) H(i, j) = 0.5 * scale * (G(i, j) + G(j, i));
    return H;
}

}  // namespace

TEST_CASE("arc step scalar example") {
    // l=1, M=1, g=1, H=0, alpha=1: stationarity 1 + u|u| = 0 gives u = -1
    DenseMatrix H(1, 1), M = DenseMatrix::identity(1);
    auto r = arc_step(cubic(H, M, {1.0}, 1.0));
    REQUIRE(r.s_hat.size() == 1);
    CHECK(std::abs(r.s_hat[0] + 1.0) < 1e-10);
    CHECK(std::abs(r.lambda - 1.0) < 1e-10);
    CHECK(std::abs(r.model_decrease - 2.0 / 3.0) < 1e-10);
    CHECK(std::abs(r.step_norm - 1.0) < 1e-10);
    // taylor part: q(0) - q(s) = -(g s + 0) = 1
    CHECK(std::abs(r.taylor_decrease - 1.0) < 1e-10);
}

TEST_CASE("arc step zero gradient convex") {
    DenseMatrix H = DenseMatrix::identity(3), M = DenseMatrix::identity(3);
    auto r = arc_step(cubic(H, M, {0, 0, 0}, 1.0));
    CHECK(norm2(r.s_hat) == 0.0);
    CHECK(r.model_decrease == 0.0);
}

TEST_CASE("arc step negative curvature hard case") {
    // l=2, H = diag(-1, 1), g = 0, alpha = 1: boundary solution along e0
    DenseMatrix H(2, 2);
    H(0, 0) = -1.0;
    H(1, 1) = 1.0;
    DenseMatrix M = DenseMatrix::identity(2);
    auto r = arc_step(cubic(H, M, {0.0, 0.0}, 1.0));
    CHECK(std::abs(std::abs(r.s_hat[0]) - 1.0) < 1e-10);
    CHECK(std::abs(r.s_hat[1]) < 1e-10);
    CHECK(std::abs(r.model_decrease - (0.5 - 1.0 / 3.0)) < 1e-10);
}

TEST_CASE("arc step degenerate metric") {
    DenseMatrix H = DenseMatrix::identity(2);
    DenseMatrix M(2, 2);  // singular metric
    M(0, 0) = 1.0;
    CHECK_THROWS_AS(arc_step(cubic(H, M, {1.0, 1.0}, 1.0)), DegenerateSketch);
}

TEST_CASE("arc step optimality on random subproblems") {
    for (uint64_t t = 0; t < 100; ++t) {
        Rng rng(derive_seed(5150, t), 0);
        const index_t l = 1 + static_cast<index_t>(rng.next_below(10));
        DenseMatrix H = random_sym(l, derive_seed(1, t), 2.0);
        // well-conditioned random SPD metric
        DenseMatrix G = random_sym(l, derive_seed(2, t), 0.3);
        DenseMatrix M = DenseMatrix::identity(l);
        for (index_t j = 0; j < l; ++j)
            for (index_t i = 0; i < l; ++i) M(i, j) += G(i, j) * 0.2;
        // symmetrize and push up the diagonal to keep it SPD
        for (index_t i = 0; i < l; ++i) M(i, i) += 1.0;
        Vector g(static_cast<size_t>(l));
        for (auto& v : g) v = rng.next_gaussian();
        const double alpha = 0.2 + rng.next_double();
        CubicModel m = cubic(H, M, g, alpha);
        auto r = arc_step(m);
        // secular residual in the u variable: g + H s + (||u||/a) M s = 0
        Vector res = g;
        Vector Hs = matvec(H, r.s_hat);
        Vector Ms = matvec(M, r.s_hat);
        for (size_t i = 0; i < res.size(); ++i) res[i] += Hs[i] + r.lambda * Ms[i];
        CHECK(norm2(res) <= 1e-8 * (1.0 + norm2(g)));
        CHECK(std::abs(r.lambda - r.step_norm / alpha) <= 1e-8 * (1.0 + r.lambda));
        // model never increases
        CHECK(r.model_decrease >= -1e-12);
        CHECK(std::abs(-cubic_value(m, r.s_hat) - r.model_decrease) < 1e-9);
    }
}

TEST_CASE("arc step beats a brute-force grid on 2d instances") {
    for (uint64_t t = 0; t < 10; ++t) {
        DenseMatrix H = random_sym(2, derive_seed(77, t), 1.5);
        DenseMatrix M = DenseMatrix::identity(2);
        Rng rng(derive_seed(78, t), 0);
        Vector g = {rng.next_gaussian(), rng.next_gaussian()};
        CubicModel m = cubic(H, M, g, 0.8);
        auto r = arc_step(m);
        double best = 0.0;
        for (double a = -3.0; a <= 3.0; a += 1e-2)
            for (double b = -3.0; b <= 3.0; b += 1e-2)
                best = std::min(best, cubic_value(m, {a, b}));
        // grid resolution limits the oracle; allow its discretization error
        CHECK(cubic_value(m, r.s_hat) <= best + 1e-3);
    }
}

TEST_CASE("arc sufficient decrease uses the taylor part") {
    CHECK(arc_sufficient_decrease(1.0, 0.2, 1.0, 0.5));
    CHECK(arc_sufficient_decrease(1.0, 0.5, 1.0, 0.5));  // inclusive
    CHECK_FALSE(arc_sufficient_decrease(1.0, 0.9, 1.0, 0.5));
    CHECK_FALSE(arc_sufficient_decrease(1.0, 0.0, 0.0, 0.5));
}

TEST_CASE("arc truth variants on the identity sketch") {
    SketchOp I = make_explicit_sketch(DenseMatrix::identity(3));
    Vector g = {1.0, -2.0, 0.5};
    DenseMatrix Hess = random_sym(3, 4);
    ArcTruthSpec spec;
    spec.S_max = 1.0 + 1e-12;

    spec.variant = ArcTruthVariant::norm_only;
    CHECK(arc_truth(I, g, Hess, spec));

    spec.variant = ArcTruthVariant::hessian_embedding;
    CHECK(arc_truth(I, g, Hess, spec));

    DenseMatrix two = DenseMatrix::identity(3);
    for (index_t i = 0; i < 3; ++i) two(i, i) = 2.0;
    spec.variant = ArcTruthVariant::norm_only;
    CHECK_FALSE(arc_truth(make_explicit_sketch(two), g, Hess, spec));
}

TEST_CASE("hessian embedding truth with an exact row space sketch") {
    // S with orthonormal rows spanning range([grad hess]) embeds exactly
    Vector g = {1.0, 0.0, 0.0, 0.0};
    DenseMatrix Hess(4, 4);
    Hess(1, 1) = 2.0;  // range([g H]) = span{e0, e1}
    DenseMatrix S(2, 4);
    S(0, 0) = 1.0;
    S(1, 1) = 1.0;
    ArcTruthSpec spec;
    spec.variant = ArcTruthVariant::hessian_embedding;
    spec.eps_S2 = 0.9;
    spec.S_max = 1.0 + 1e-12;
    CHECK(arc_truth(make_explicit_sketch(S), g, Hess, spec));
}

TEST_CASE("sparse hessian truth when sampling misses the nonzero rows") {
    // Hessian with 2 nonzero rows; a sampling sketch that picks other rows
    // sees a zero sketched Hessian, so the small-norm condition holds and
    // the truth reduces to the gradient condition.
    const index_t d = 6;
    DenseMatrix Hess(d, d);
    Hess(0, 0) = 5.0;
    Hess(0, 1) = 1.0;
    Hess(1, 0) = 1.0;
    Hess(1, 1) = 3.0;
    DenseMatrix Srows(2, d);  // rows select coordinates 2 and 3
    Srows(0, 2) = std::sqrt(3.0);
    Srows(1, 3) = std::sqrt(3.0);
    SketchOp S = make_explicit_sketch(Srows);
    Vector g = {0.0, 0.0, 1.0, 1.0, 0.0, 0.0};
    ArcTruthSpec spec;
    spec.variant = ArcTruthVariant::sparse_hessian;
    spec.eps_S2 = 0.5;
    spec.S_max = std::sqrt(3.0) + 1e-12;
    spec.eps = 1e-3;
    spec.alpha_max = 1.0;
    CHECK(arc_truth(S, g, Hess, spec));
    // gradient condition fails when the sketch misses the gradient too
    Vector g2 = {1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
    CHECK_FALSE(arc_truth(S, g2, Hess, spec));
}

TEST_CASE("arc h functions") {
    // unit constants, eps = 2: (theta/3) * min(2^{3/2}, 1) = theta/3
    CHECK(std::abs(h_arc_first(2.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0) - 1.0 / 3.0) < 1e-14);
    CHECK(h_arc_first(0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0) == 0.0);
    double prev = 0.0;
    for (double a = 0.1; a <= 4.0; a *= 2.0) {
        double v = h_arc_first(0.5, a, 0.25, 2.0, 0.1, 3.0, 0.5, 4.0);
        CHECK(v >= prev - 1e-16);
        prev = v;
    }

    // h_arc_sparse unit constants: (theta a^2 e^{3/2}/3) ((1-eps)^{1/2}/(3 Smax amax))^{3/2}
    CHECK(std::abs(h_arc_sparse(1.0, 1.0, 0.0, 1.0, 1.0, 1.0) - (1.0 / 3.0) * std::pow(1.0 / 3.0, 1.5)) < 1e-14);
    CHECK(h_arc_sparse(0.0, 1.0, 0.0, 1.0, 1.0, 1.0) == 0.0);

    // h_arc_second with m = 1 recovers the subspace formula
    const double v = h_arc_second(1.0, 1.0, 1.0, 0.0, 1.0, 1.0);
    CHECK(std::abs(v - (1.0 / 3.0) * std::pow(2.0, -3.0)) < 1e-14);
    CHECK(h_arc_second(0.0, 1.0, 1.0, 0.0, 1.0, 1.0) == 0.0);

    // m(eps_S, r, l, kappa_H): l -> infinity recovers 1 - eps_S
    CHECK(std::abs(arc_second_multiplier(0.25, 5, 1 << 20, -1.0) - 0.75) < 1e-3);
}

TEST_CASE("second order measures") {
    SmoothProblem prob = make_problem("quadratic", 4);
    SketchOp I = make_explicit_sketch(DenseMatrix::identity(4));
    auto [sub, full] = second_order_measures(prob.x0, prob, I);
    CHECK(sub >= -1e-12);
    CHECK(full >= -1e-12);
    CHECK(std::abs(sub - full) < 1e-10);  // S = I: measures coincide

    // saddle f = -x0^2/2 + x1^2/2 with S = e0^T
    SmoothProblem saddle;
    saddle.name = "saddle";
    saddle.dim = 2;
    saddle.x0 = {1.0, 1.0};
    saddle.f = [](const Vector& x) { return -0.5 * x[0] * x[0] + 0.5 * x[1] * x[1]; };
    saddle.grad = [](const Vector& x) { return Vector{-x[0], x[1]}; };
    saddle.hess = [](const Vector&) {
        DenseMatrix H(2, 2);
        H(0, 0) = -1.0;
        H(1, 1) = 1.0;
        return H;
    };
    DenseMatrix e0(1, 2);
    e0(0, 0) = 1.0;
    SketchOp S = make_explicit_sketch(e0);
    auto [sub2, full2] = second_order_measures(saddle.x0, saddle, S);
    CHECK(std::abs(sub2 + 1.0) < 1e-12);
    CHECK(std::abs(full2 + 1.0) < 1e-12);
}

TEST_CASE("full-space arc run on rosenbrock") {
    SmoothProblem prob = make_problem("rosenbrock", 10);
    ArcConfig cfg;
    cfg.identity_sketch = true;
    cfg.truth.S_max = 1.0 + 1e-9;
    ArcEngine eng(cfg);
    StepControl ctrl;
    ctrl.alpha_max = 10.0;
    ctrl.p = 1;
    RunResult res = run(prob, eng, ctrl, 200, 1e-5, 0);
    CHECK(res.converged);
    // successful-step decrease: f_k - f_{k+1} >= (theta/(3 a)) ||step||^3
    // holds by the acceptance rule with the cubic-term lower bound; check
    // monotonicity which the framework guarantees
    for (size_t i = 1; i < res.trace.size(); ++i) CHECK(res.trace[i].f <= res.trace[i - 1].f + 1e-15);
}

TEST_CASE("sketched arc run makes progress") {
    SmoothProblem prob = make_problem("rosenbrock", 8);
    ArcConfig cfg;
    cfg.ensemble = Ensemble::gaussian;
    cfg.l = 4;
    cfg.truth.variant = ArcTruthVariant::norm_only;
    cfg.truth.S_max = s_max_bound(Ensemble::gaussian, 4, 8, 1, 0.01);
    ArcEngine eng(cfg);
    StepControl ctrl;
    ctrl.alpha_max = 10.0;
    ctrl.p = 1;
    RunResult res = run(prob, eng, ctrl, 150, 1e-4, 3);
    REQUIRE_FALSE(res.trace.empty());
    CHECK(res.f < res.trace.front().f);
}

TEST_CASE("arc second order step clears negative curvature") {
    // at the saddle point of -x0^2/2 + x1^2/2 the gradient vanishes but the
    // second-order step must still move along the negative eigenvector
    DenseMatrix H(2, 2);
    H(0, 0) = -1.0;
    H(1, 1) = 1.0;
    DenseMatrix M = DenseMatrix::identity(2);
    CubicModel m = cubic(H, M, {0.0, 0.0}, 0.5);
    auto r = arc_step(m, true);
    CHECK(r.step_norm > 0.0);
    CHECK(r.model_decrease > 0.0);
}
