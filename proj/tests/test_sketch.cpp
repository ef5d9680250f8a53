#include <catch2/catch_amalgamated.hpp>

#include "rss/sketch.hpp"
#include "rss/svd.hpp"

#include <cmath>
#include <map>

using namespace rss;

namespace {

DenseMatrix random_dense(index_t m, index_t n, uint64_t seed) {
    Rng rng(seed, 0);
    DenseMatrix A(m, n);
    for (index_t j = 0; j < n; ++j)
        for (index_t i = 0; i < m; ++i) A(i, j) = rng.next_gaussian();
    return A;
}

Vector random_unit(index_t n, uint64_t seed) {
    Rng rng(seed, 1);
    Vector x(static_cast<size_t>(n));
    for (auto& v : x) v = rng.next_gaussian();
    double nn = norm2(x);
    for (auto& v : x) v /= nn;
    return x;
}

}  // namespace

TEST_CASE("ensemble names round trip") {
    for (Ensemble e : {Ensemble::gaussian, Ensemble::sampling, Ensemble::hashing_s,
                       Ensemble::hashing_variant_s, Ensemble::stable_one_hashing,
                       Ensemble::srht, Ensemble::hrht})
        CHECK(ensemble_from_name(ensemble_name(e)) == e);
    CHECK_THROWS_AS(ensemble_from_name("bogus"), InvalidConfig);
}

TEST_CASE("sketches are reproducible from the seed") {
    for (Ensemble e : {Ensemble::gaussian, Ensemble::sampling, Ensemble::hashing_s,
                       Ensemble::stable_one_hashing, Ensemble::hrht}) {
        SketchOp a = make_sketch(e, 4, 16, 2, 77);
        SketchOp b = make_sketch(e, 4, 16, 2, 77);
        Vector x = random_unit(16, 5);
        Vector ya = a.apply(x), yb = b.apply(x);
        for (size_t i = 0; i < ya.size(); ++i) CHECK(ya[i] == yb[i]);
        SketchOp c = make_sketch(e, 4, 16, 2, 78);
        Vector yc = c.apply(x);
        bool differs = false;
        for (size_t i = 0; i < ya.size(); ++i) differs = differs || (ya[i] != yc[i]);
        CHECK(differs);
    }
}

TEST_CASE("apply and apply_t agree with the densified operator") {
    for (Ensemble e : {Ensemble::gaussian, Ensemble::sampling, Ensemble::hashing_s,
                       Ensemble::hashing_variant_s, Ensemble::stable_one_hashing,
                       Ensemble::srht, Ensemble::hrht}) {
        SketchOp S = make_sketch(e, 6, 16, 3, 11);
        DenseMatrix D = S.densify();
        REQUIRE(D.rows == 6);
        REQUIRE(D.cols == 16);
        for (uint64_t t = 0; t < 3; ++t) {
            Vector x = random_unit(16, 20 + t);
            Vector y1 = S.apply(x), y2 = matvec(D, x);
            for (size_t i = 0; i < y1.size(); ++i) CHECK(std::abs(y1[i] - y2[i]) < 1e-12);
            Vector w = random_unit(6, 30 + t);
            Vector z1 = S.apply_t(w), z2 = matvec_t(D, w);
            for (size_t i = 0; i < z1.size(); ++i) CHECK(std::abs(z1[i] - z2[i]) < 1e-12);
        }
    }
}

TEST_CASE("hashing columns have s distinct rows with values +-1/sqrt(s)") {
    SketchOp S = make_sketch(Ensemble::hashing_s, 4, 100, 4, 3);
    DenseMatrix D = S.densify();
    for (index_t j = 0; j < 100; ++j) {
        int nnz = 0;
        for (index_t i = 0; i < 4; ++i)
            if (D(i, j) != 0.0) {
                ++nnz;
                CHECK(std::abs(std::abs(D(i, j)) - 0.5) < 1e-15);
            }
        CHECK(nnz == 4);
    }
    // s = l makes every row dense: the sqrt(d/s) norm bound does not apply
    // here, only the trivial sqrt(max row nnz) one
    CHECK(operator_norm(D) <= 10.0 + 1e-12);
}

TEST_CASE("hashing variant columns have at most s nonzeros") {
    SketchOp S = make_sketch(Ensemble::hashing_variant_s, 4, 50, 3, 9);
    DenseMatrix D = S.densify();
    for (index_t j = 0; j < 50; ++j) {
        int nnz = 0;
        for (index_t i = 0; i < 4; ++i)
            if (D(i, j) != 0.0) ++nnz;
        CHECK(nnz >= 1);
        CHECK(nnz <= 3);
    }
}

TEST_CASE("hashing variant m=n=s=2 pmf matches brute force") {
    // column of the variant: sum of s=2 independent 1-hashing columns scaled
    // by 1/sqrt(2). Entries per column take values in {0, +-1/sqrt2, +-sqrt2}
    // with P(cancel to (0,0).. ) derived from 2 rows x 2 signs per draw:
    // each draw uniform over {(+-1/sqrt2) e_0, (+-1/sqrt2) e_1} (4 cases),
    // two draws -> 16 equally likely pairs.
    std::map<std::pair<int, int>, double> expected;  // keyed by rounded (2*sqrt2*v0, 2*sqrt2*v1)... use direct doubles
    std::map<std::pair<double, double>, int> brute;
    const double h = 1.0 / std::sqrt(2.0);
    for (int r1 = 0; r1 < 2; ++r1)
        for (int s1 = -1; s1 <= 1; s1 += 2)
            for (int r2 = 0; r2 < 2; ++r2)
                for (int s2 = -1; s2 <= 1; s2 += 2) {
                    double v0 = (r1 == 0 ? s1 * h : 0.0) + (r2 == 0 ? s2 * h : 0.0);
                    double v1 = (r1 == 1 ? s1 * h : 0.0) + (r2 == 1 ? s2 * h : 0.0);
                    brute[{std::round(v0 * 1e6) / 1e6, std::round(v1 * 1e6) / 1e6}]++;
                }
    // Monte Carlo over seeds, column 0
    std::map<std::pair<double, double>, int> mc;
    const int trials = 20000;
    for (int t = 0; t < trials; ++t) {
        SketchOp S = make_sketch(Ensemble::hashing_variant_s, 2, 2, 2, derive_seed(1234, static_cast<uint64_t>(t)));
        DenseMatrix D = S.densify();
        mc[{std::round(D(0, 0) * 1e6) / 1e6, std::round(D(1, 0) * 1e6) / 1e6}]++;
    }
    for (auto& [k, cnt] : brute) {
        double pexp = cnt / 16.0;
        double pemp = mc.count(k) ? mc[k] / double(trials) : 0.0;
        double sigma = std::sqrt(pexp * (1 - pexp) / trials);
        CHECK(std::abs(pemp - pexp) <= 5 * sigma + 1e-12);
    }
}

TEST_CASE("stable 1-hashing row occupancy is balanced") {
    SketchOp S = make_sketch(Ensemble::stable_one_hashing, 4, 10, 1, 21);
    DenseMatrix D = S.densify();
    for (index_t i = 0; i < 4; ++i) {
        int nnz = 0;
        for (index_t j = 0; j < 10; ++j)
            if (D(i, j) != 0.0) ++nnz;
        CHECK(nnz <= 3);  // ceil(10/4)
    }
    CHECK(operator_norm(D) <= std::sqrt(3.0) + 1e-12);
}

TEST_CASE("sampling rows select one scaled coordinate each") {
    SketchOp S = make_sketch(Ensemble::sampling, 2, 8, 1, 4);
    DenseMatrix D = S.densify();
    for (index_t i = 0; i < 2; ++i) {
        int nnz = 0;
        for (index_t j = 0; j < 8; ++j)
            if (D(i, j) != 0.0) {
                ++nnz;
                CHECK(D(i, j) == 2.0);  // sqrt(8/2)
            }
        CHECK(nnz == 1);
    }
}

TEST_CASE("permutation case of 1-hashing is an isometry") {
    SketchOp S = make_sketch(Ensemble::hashing_s, 8, 8, 1, 2);
    Vector x = random_unit(8, 3);
    // s=1 with m=n gives at most one nonzero per column; norm preserved only
    // when rows are all distinct. Check the sub-isometry property instead:
    // ||Sx|| <= ||x|| never fails for s=1 partition-style maps is not exact,
    // so assert via the densified operator norm bound sqrt(d/s).
    CHECK(norm2(S.apply(x)) <= std::sqrt(8.0) * norm2(x) + 1e-12);
    // and a genuinely distinct-rows draw keeps norms: construct explicitly
    DenseMatrix P(8, 8);
    for (index_t i = 0; i < 8; ++i) P(i, (i + 3) % 8) = (i % 2 ? -1.0 : 1.0);
    SketchOp E = make_explicit_sketch(P);
    CHECK(std::abs(norm2(E.apply(x)) - norm2(x)) < 1e-12);
}

TEST_CASE("srht and hrht pad to the next power of two") {
    SketchOp S = make_sketch(Ensemble::srht, 4, 12, 1, 6);
    CHECK(S.n == 12);
    CHECK(S.n_pad == 16);
    Vector x = random_unit(12, 8);
    CHECK(S.apply(x).size() == 4);

    SketchOp H = make_sketch(Ensemble::hrht, 4, 12, 2, 6);
    CHECK(H.n_pad == 16);
    CHECK(H.apply(x).size() == 4);
}

TEST_CASE("hrht hadamard stage preserves norms before hashing") {
    // HD applied to a unit basis vector spreads it to entries of equal
    // magnitude; the hashing stage then has columns of norm 1, so E||Sx||^2
    // stays near ||x||^2. Spot check the realized operator's column norms.
    SketchOp H = make_sketch(Ensemble::hrht, 4, 16, 2, 13);
    Vector e0(16, 0.0);
    e0[0] = 1.0;
    Vector y = H.apply(e0);
    CHECK(norm2(y) > 0.0);
    CHECK(norm2(y) < 2.0);
}

TEST_CASE("make_sketch parameter validation") {
    CHECK_THROWS_AS(make_sketch(Ensemble::hashing_s, 4, 16, 5, 0), InvalidConfig);   // s > m
    CHECK_THROWS_AS(make_sketch(Ensemble::gaussian, 0, 16, 1, 0), InvalidConfig);
}

TEST_CASE("coherence") {
    // [[I_r],[0]] is maximally coherent
    DenseMatrix A(8, 3);
    for (index_t i = 0; i < 3; ++i) A(i, i) = 1.0;
    CHECK(std::abs(coherence(A) - 1.0) < 1e-12);

    DenseMatrix ones(4, 1);
    for (index_t i = 0; i < 4; ++i) ones(i, 0) = 1.0;
    CHECK(std::abs(coherence(ones) - 0.5) < 1e-12);

    DenseMatrix e1(4, 1);
    e1(0, 0) = 1.0;
    CHECK(std::abs(coherence(e1) - 1.0) < 1e-12);

    DenseMatrix Z(3, 2);
    CHECK_THROWS_AS(coherence(Z), InvalidInput);

    // range bound sqrt(r/n) <= mu <= 1
    for (uint64_t s = 0; s < 20; ++s) {
        DenseMatrix R = random_dense(10, 4, s);
        double mu = coherence(R);
        CHECK(mu >= std::sqrt(4.0 / 10.0) - 1e-12);
        CHECK(mu <= 1.0 + 1e-12);
    }
}

TEST_CASE("non uniformity") {
    CHECK(std::abs(non_uniformity({3, 4}) - 0.8) < 1e-15);
    CHECK(non_uniformity({0, 1, 0}) == 1.0);
    CHECK_THROWS_AS(non_uniformity({0.0, 0.0}), InvalidInput);
    // nu(Ax) <= mu(A) over random pairs
    for (uint64_t s = 0; s < 100; ++s) {
        DenseMatrix A = random_dense(12, 3, s);
        Vector x = random_unit(3, s + 500);
        Vector y = matvec(A, x);
        CHECK(non_uniformity(y) <= coherence(A) + 1e-10);
    }
}

TEST_CASE("embedding report") {
    DenseMatrix A = random_dense(6, 3, 2);
    SketchOp I = make_explicit_sketch(DenseMatrix::identity(6));
    auto rep = embedding_report(I, A);
    CHECK(rep.eps_measured < 1e-12);
    CHECK(rep.rank_preserved);

    DenseMatrix two = DenseMatrix::identity(6);
    for (index_t i = 0; i < 6; ++i) two(i, i) = 2.0;
    auto rep2 = embedding_report(make_explicit_sketch(two), A);
    CHECK(std::abs(rep2.eps_measured - 3.0) < 1e-10);

    // eps < 1 implies rank preserved
    for (uint64_t s = 0; s < 30; ++s) {
        SketchOp G = make_sketch(Ensemble::gaussian, 12, 20, 1, s);
        DenseMatrix B = random_dense(20, 4, s + 9);
        auto r = embedding_report(G, B);
        if (r.eps_measured < 1.0) CHECK(r.rank_preserved);
    }
}

TEST_CASE("1-hashing loses rank on the coherent matrix at the predicted rate") {
    // A = [[I_r],[0]], m = r = 8: collisions of the 8 sampled rows kill rank.
    // P(failure) >= 1 - e^{-r(r-1)/(2m)} is a lower-bound flavor statement;
    // check the empirical rate is at least half the birthday bound to avoid
    // flakiness while still catching a wrongly-collision-free construction.
    const index_t r = 8, m = 8, n = 64;
    DenseMatrix A(n, r);
    for (index_t i = 0; i < r; ++i) A(i, i) = 1.0;
    int fails = 0;
    const int seeds = 1000;
    for (int t = 0; t < seeds; ++t) {
        SketchOp S = make_sketch(Ensemble::hashing_s, m, n, 1, derive_seed(321, static_cast<uint64_t>(t)));
        if (!embedding_report(S, A).rank_preserved) ++fails;
    }
    const double birthday = 1.0 - std::exp(-double(r * (r - 1)) / (2.0 * m));
    CHECK(fails / double(seeds) > 0.5 * birthday);
}

TEST_CASE("jl failure rate gaussian stays under the theory bound") {
    const index_t l = 64, d = 256;
    const double epsS = 0.5;
    const int trials = 20000;
    double rate = jl_failure_rate(Ensemble::gaussian, l, d, 1, epsS, trials, 9);
    const double bound = std::exp(-epsS * epsS * l / 4.0);
    const double sigma = std::sqrt(bound * (1.0 - bound) / trials);
    CHECK(rate <= bound + 4.0 * sigma);
}

TEST_CASE("jl failure rate sampling on e1 matches the combinatorial oracle") {
    // y = e1, failure iff coordinate 1 never sampled: rate ~ (1-1/d)^l for
    // with-replacement; with distinct column draws (m <= n) the exact
    // probability is C(d-1, l)/C(d, l) = (d-l)/d.
    const index_t d = 8, l = 4;
    const int trials = 40000;
    double rate = jl_failure_rate(Ensemble::sampling, l, d, 1, 0.999, trials, 31);
    const double exact = double(d - l) / double(d);
    const double sigma = std::sqrt(exact * (1.0 - exact) / trials);
    CHECK(std::abs(rate - exact) <= 5.0 * sigma);
}

TEST_CASE("s_max_bound table values") {
    CHECK(std::abs(s_max_bound(Ensemble::gaussian, 25, 100, 1, std::exp(-2.0)) - 3.4) < 1e-12);
    CHECK(std::abs(s_max_bound(Ensemble::hashing_s, 8, 100, 4) - 5.0) < 1e-12);
    CHECK(std::abs(s_max_bound(Ensemble::sampling, 16, 64, 1) - 2.0) < 1e-12);
    CHECK(std::abs(s_max_bound(Ensemble::stable_one_hashing, 4, 10, 1) - std::sqrt(3.0)) < 1e-12);
    CHECK_THROWS_AS(s_max_bound(Ensemble::srht, 4, 16, 1), InvalidConfig);
    CHECK_THROWS_AS(s_max_bound(Ensemble::gaussian, 4, 16, 1), InvalidConfig);  // needs delta2
}

TEST_CASE("deterministic operator norm bounds hold across seeds") {
    const index_t d = 30, l = 5;
    for (uint64_t t = 0; t < 200; ++t) {
        uint64_t sd = derive_seed(88, t);
        CHECK(make_sketch(Ensemble::hashing_s, l, d, 2, sd).op_norm() <= std::sqrt(d / 2.0) + 1e-9);
        CHECK(make_sketch(Ensemble::stable_one_hashing, l, d, 1, sd).op_norm() <= std::sqrt(std::ceil(double(d) / l)) + 1e-9);
        CHECK(make_sketch(Ensemble::sampling, l, d, 1, sd).op_norm() <= std::sqrt(double(d) / l) + 1e-9);
    }
}

TEST_CASE("norm preservation in expectation") {
    const index_t d = 32, l = 8;
    Vector x = random_unit(d, 2);
    for (Ensemble e : {Ensemble::gaussian, Ensemble::hashing_s, Ensemble::sampling,
                       Ensemble::stable_one_hashing}) {
        double acc = 0.0;
        const int trials = 4000;
        for (int t = 0; t < trials; ++t) {
            SketchOp S = make_sketch(e, l, d, 2, derive_seed(55, static_cast<uint64_t>(t)));
            double ns = norm2(S.apply(x));
            acc += ns * ns;
        }
        CHECK(std::abs(acc / trials - 1.0) < 0.1);
    }
}
