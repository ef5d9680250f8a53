#include <catch2/catch_amalgamated.hpp>

#include "rss/matrix.hpp"
#include "rss/mmio.hpp"
#include "rss/rng.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string bin_path() {
    const char* p = std::getenv("SUBSPACE_OPT_BIN");
    return p ? p : "./subspace-opt";
}

int run_cmd(const std::string& args, const std::string& workdir) {
    std::string cmd = "cd " + workdir + " && " + bin_path() + " " + args + " >/dev/null 2>&1";
    int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string fresh_dir(const std::string& tag) {
    std::string d = "/tmp/rss_cli_" + tag;
    std::system(("rm -rf " + d + " && mkdir -p " + d).c_str());
    return d;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("cli help and error exit codes") {
    std::string d = fresh_dir("exit");
    CHECK(run_cmd("--help", d) == 0);
    CHECK(run_cmd("opt --help", d) == 0);
    CHECK(run_cmd("--no-such-flag", d) == 2);
    CHECK(run_cmd("opt --engine bogus --problem rosenbrock --d 4", d) == 2);
    CHECK(run_cmd("opt --engine tr --problem no-such-problem --d 4", d) == 2);
}

TEST_CASE("opt writes one trace per seed with the exact header") {
    std::string d = fresh_dir("opt");
    int rc = run_cmd("opt --engine tr --ensemble gaussian --l 2 --problem rosenbrock --d 8 "
                     "--seeds 0..2 --budget 40", d);
    REQUIRE(rc == 0);
    for (int s = 0; s < 3; ++s) {
        std::string f = d + "/trace_rosenbrock_tr_seed" + std::to_string(s) + ".csv";
        std::string body = slurp(f);
        REQUIRE_FALSE(body.empty());
        CHECK(body.rfind("k,is_true,successful,alpha,f,grad_norm,model_decrease\n", 0) == 0);
    }
}

TEST_CASE("opt output is byte-identical for identical config and seed") {
    std::string d1 = fresh_dir("rep1");
    std::string d2 = fresh_dir("rep2");
    std::string args = "opt --engine qr --ensemble hashing --s 2 --l 3 --problem rosenbrock "
                       "--d 10 --seeds 5 --budget 30";
    REQUIRE(run_cmd(args, d1) == 0);
    REQUIRE(run_cmd(args, d2) == 0);
    std::string f = "/trace_rosenbrock_qr_seed5.csv";
    std::string a = slurp(d1 + f), b = slurp(d2 + f);
    REQUIRE_FALSE(a.empty());
    CHECK(a == b);
}

TEST_CASE("nlls experiment emits results and profile csvs") {
    std::string d = fresh_dir("nlls");
    int rc = run_cmd("nlls --problem ext-rosenbrock --engine qr --d 10 --l 5 --seeds 0..3", d);
    REQUIRE(rc == 0);
    std::string res = slurp(d + "/nlls_results.csv");
    CHECK(res.rfind("problem,solver,seed,l,N_p,wall_time\n", 0) == 0);
    // one row per seed plus header
    CHECK(std::count(res.begin(), res.end(), '\n') == 5);
    std::string prof = slurp(d + "/nlls_profile.csv");
    CHECK(prof.rfind("alpha,pi\n", 0) == 0);
}

TEST_CASE("lls solve reads matrix market input and writes the solution") {
    std::string d = fresh_dir("lls");
    // consistent dense system
    rss::Rng rng(3, 0);
    rss::DenseMatrix A(20, 4);
    for (rss::index_t j = 0; j < 4; ++j)
        for (rss::index_t i = 0; i < 20; ++i) A(i, j) = rng.next_gaussian();
    rss::write_mm_dense(d + "/A.mtx", A);

    int rc = run_cmd("lls --matrix A.mtx --ensemble gaussian --m-ratio 3.0", d);
    REQUIRE(rc == 0);
    rss::DenseMatrix X = rss::read_mm_dense(d + "/x.mtx");
    CHECK(X.rows == 4);
    std::string diag = slurp(d + "/lls_diag.csv");
    CHECK_FALSE(diag.empty());

    // sparse input goes down the sparse path
    rss::SparseMatrix S = rss::SparseMatrix::from_triplets(
        6, 2, {{0, 0, 1.0}, {1, 0, 2.0}, {2, 1, 1.0}, {3, 1, -1.0}, {5, 0, 0.5}});
    rss::write_mm_sparse(d + "/S.mtx", S);
    rc = run_cmd("lls --matrix S.mtx --m 6 --ensemble gaussian", d);
    CHECK(rc == 0);

    // missing file is a config error
    CHECK(run_cmd("lls --matrix missing.mtx", d) != 0);
}

TEST_CASE("sketch-bench reports failure rates") {
    std::string d = fresh_dir("bench");
    int rc = run_cmd("sketch-bench --ensemble gaussian --l 32 --d 256 --trials 2000", d);
    REQUIRE(rc == 0);
    std::string out = slurp(d + "/sketch_bench.csv");
    CHECK_FALSE(out.empty());
}

TEST_CASE("verify suites pass") {
    std::string d = fresh_dir("verify");
    CHECK(run_cmd("verify --suite framework", d) == 0);
    CHECK(run_cmd("verify --suite sketch", d) == 0);
    CHECK(run_cmd("verify --suite lls", d) == 0);
}
