// Drives the installed command-line binary end to end: JSON/CSV contracts,
// agreement with in-process results on the same input files, determinism
// across reruns, and the exit-code conventions (0 ok, 2 invalid input,
// 3 numeric failure).

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "pcatest/pcatest.hpp"

using namespace pcatest;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

struct RunResult {
    int code = -1;
    std::string out, err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

RunResult run(const std::string& args) {
    const std::string cmd =
        std::string(PCATEST_CLI_PATH) + " " + args + " > cli_stdout.txt 2> cli_stderr.txt";
    const int status = std::system(cmd.c_str());
    RunResult r;
    if (status >= 0 && WIFEXITED(status)) r.code = WEXITSTATUS(status);
    r.out = slurp("cli_stdout.txt");
    r.err = slurp("cli_stderr.txt");
    std::remove("cli_stdout.txt");
    std::remove("cli_stderr.txt");
    return r;
}

// Deterministic 3-column sample written once; both the CLI and the
// in-process expectations read it back, so they see identical doubles.
const std::string& dataPath() {
    static const std::string path = [] {
        Rng rng(424242u, 1);
        const RadialFamily f = parseFamily("t:5", 3);
        Vector lambda = {4.0, 2.0, 0.5};
        const double scale = std::cbrt(4.0 * 2.0 * 0.5);
        for (double& v : lambda) v /= scale;
        const Matrix x = sampleElliptical(60, Vector(3, 0.0), 1.0, Matrix::diag(lambda), f, rng);
        std::ofstream out("cli_data.csv", std::ios::binary);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            for (std::size_t j = 0; j < x.cols(); ++j) {
                if (j) out << ',';
                out << fmt17(x(i, j));
            }
            out << '\n';
        }
        return std::string("cli_data.csv");
    }();
    return path;
}

Matrix loadData() { return ingestCsv(dataPath()).x; }

std::string joinVector(const Vector& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += fmt17(v[i]);
    }
    return s;
}

}  // namespace

TEST_CASE("are subcommand") {
    const RunResult r = run("are --score vdw --family t:5 --k 3");
    REQUIRE(r.code == 0);
    const JsonValue j = parseJson(r.out);
    const JsonValue* are = j.find("are");
    REQUIRE(are != nullptr);
    CHECK(are->number == areRatio(vdwScore(3), parseFamily("t:5", 3)));
    CHECK(are->number == Approx(2.2704694612451042).epsilon(1e-9));

    // undefined below four finite moments
    const RunResult bad = run("are --score vdw --family t:3 --k 3");
    CHECK(bad.code == 2);
    CHECK_THAT(bad.err, ContainsSubstring("error"));
}

TEST_CASE("test-eigvec subcommand") {
    const Matrix x = loadData();
    const auto mc = meanCov(x);
    const EigenSym e = symmetricEigen(mc.second);
    const Vector b0 = e.vectors.column(0);

    SECTION("anderson at the fitted leading axis") {
        const RunResult r =
            run("test-eigvec --data " + dataPath() + " --beta0 " + joinVector(b0));
        REQUIRE(r.code == 0);
        const JsonValue j = parseJson(r.out);
        CHECK(j.find("method")->text == "anderson");
        CHECK(j.find("reference")->text == "chi-square(2)");
        CHECK(j.find("statistic")->number == Approx(0.0).margin(1e-10));
        CHECK(j.find("p_value")->number == Approx(1.0).margin(1e-8));
        CHECK(j.find("reject")->boolean == false);
        CHECK(j.find("n")->number == 60.0);
        CHECK(j.find("k")->number == 3.0);
        CHECK(j.find("nuisance")->find("lambda_1") != nullptr);
    }

    SECTION("rank method agrees with the library bitwise") {
        const EigvecHypothesis h{{1.0, 0.0, 0.0}};
        const TestReport expect = qRank(x, h, signScore(3));
        const RunResult r = run("test-eigvec --data " + dataPath() +
                                " --beta0 1,0,0 --method rank --score sign");
        REQUIRE(r.code == 0);
        const JsonValue j = parseJson(r.out);
        CHECK(j.find("method")->text == "rank:sign");
        CHECK(j.find("statistic")->number == expect.statistic);
        CHECK(j.find("p_value")->number == expect.pValue);
    }

    SECTION("input validation exits 2") {
        CHECK(run("test-eigvec --data " + dataPath()).code == 2);  // missing --beta0
        CHECK(run("test-eigvec --data " + dataPath() + " --beta0 1,0").code == 2);
        CHECK(run("test-eigvec --data " + dataPath() + " --beta0 2,0,0").code == 2);
        CHECK(run("test-eigvec --data no_such_file.csv --beta0 1,0,0").code == 2);
        CHECK(run("test-eigvec --data " + dataPath() +
                  " --beta0 1,0,0 --method anderson --score sign")
                  .code == 2);
        CHECK(run("test-eigvec --data " + dataPath() + " --beta0 1,0,0 --method bogus").code == 2);
    }
}

TEST_CASE("test-eigval subcommand") {
    const Matrix x = loadData();

    SECTION("davis agrees with the library bitwise") {
        const TestReport expect = tDavis(x, EigvalHypothesis(0.25, 1));
        const RunResult r =
            run("test-eigval --data " + dataPath() + " --p 0.25 --q 1 --method davis");
        REQUIRE(r.code == 0);
        const JsonValue j = parseJson(r.out);
        CHECK(j.find("method")->text == "davis");
        CHECK(j.find("reference")->text == "normal-lower");
        CHECK(j.find("statistic")->number == expect.statistic);
        CHECK(j.find("nuisance")->find("kappa_hat") != nullptr);
    }

    SECTION("rank with a simulated critical value") {
        // p near the sample trailing proportion keeps the constrained spectrum positive
        const RunResult r = run("test-eigval --data " + dataPath() +
                                " --p 0.4 --q 1 --method rank --score sign --cv simulated "
                                "--cv-reps 1000 --seed 9 --threads 1");
        REQUIRE(r.code == 0);
        const JsonValue j = parseJson(r.out);
        CHECK(j.find("method")->text == "rank:sign");
        CHECK(j.find("nuisance")->find("critical_value") != nullptr);
        CHECK(j.find("nuisance")->find("cv_mode")->text == "simulated");
        // small n: the asymptotic-cv warning lands on stderr in asymptotic mode
        const RunResult asy = run("test-eigval --data " + dataPath() +
                                  " --p 0.4 --q 1 --method rank --score sign");
        CHECK_THAT(asy.err, ContainsSubstring("warning"));
    }

    SECTION("infeasible null rejects by convention") {
        // p this small forces a negative constrained eigenvalue: infeasible null
        const RunResult r = run("test-eigval --data " + dataPath() +
                                " --p 0.001 --q 1 --method rank --score sign");
        REQUIRE(r.code == 0);
        const JsonValue j = parseJson(r.out);
        CHECK(j.find("reject")->boolean == true);
        CHECK_THAT(r.err, ContainsSubstring("infeasible"));
    }

    SECTION("numeric failure exits 3") {
        // the same infeasible p leaves no plug-in null design to simulate from
        const RunResult r = run("test-eigval --data " + dataPath() +
                                " --p 0.001 --q 1 --method rank --score sign --cv simulated "
                                "--cv-reps 1000 --seed 9 --threads 1");
        CHECK(r.code == 3);
        CHECK_THAT(r.err, ContainsSubstring("numeric error"));
    }

    SECTION("input validation exits 2") {
        CHECK(run("test-eigval --data " + dataPath() + " --p 1.5 --q 1").code == 2);
        CHECK(run("test-eigval --data " + dataPath() + " --p 0.25 --q 1 --cv bogus").code == 2);
        CHECK(run("test-eigval --data " + dataPath() +
                  " --p 0.25 --q 1 --method anderson --cv simulated")
                  .code == 2);
    }
}

TEST_CASE("critval subcommand") {
    const std::string args =
        "critval --score sign --problem eigvec --k 3 --n 50 --reps 1000 --seed 11 --threads 1";
    const RunResult a = run(args);
    REQUIRE(a.code == 0);
    const RunResult b = run(args);
    CHECK(a.out == b.out);  // byte-identical rerun

    const JsonValue j = parseJson(a.out);
    CHECK(j.find("tail")->text == "upper");
    CHECK(j.find("critical_value")->number ==
          simulateCriticalValue(signScore(3), Problem::eigvec, 3, 50, 1000, 0.05, 11));
    CHECK(j.find("reps")->number == 1000.0);

    const RunResult c = run(
        "critval --score sign --problem eigvec --k 3 --n 50 --reps 1000 --seed 12 --threads 1");
    CHECK(c.out != a.out);

    const RunResult ev = run(
        "critval --score sign --problem eigval --k 3 --n 50 --reps 1000 --seed 11 --threads 1");
    REQUIRE(ev.code == 0);
    CHECK(parseJson(ev.out).find("tail")->text == "lower");
    CHECK(parseJson(ev.out).find("critical_value")->number < 0.0);

    CHECK(run("critval --score sign --problem eigvec --k 3 --n 50 --reps 999").code == 2);
    CHECK(run("critval --score sign --problem bogus --k 3 --n 50 --reps 1000").code == 2);
}

TEST_CASE("simulate subcommand") {
    {
        std::ofstream cfg("cli_scenario.cfg", std::ios::binary);
        cfg << "problem = eigvec\n"
               "k = 3\n"
               "n = 30\n"
               "reps = 20\n"
               "families = gaussian\n"
               "xi = 0, 1\n"
               "lambda = 10, 4, 1\n"
               "methods = anderson\n"
               "seed = 3\n"
               "threads = 1\n";
    }

    const RunResult r = run("simulate --config cli_scenario.cfg");
    REQUIRE(r.code == 0);
    CHECK_THAT(r.out, ContainsSubstring("method,family,xi,freq,N,n,alpha,cv_mode\n"));

    // matches the library run on the same config, byte for byte
    const Scenario sc = scenarioFromConfig(parseConfigFile("cli_scenario.cfg"));
    CHECK(r.out == tableToCsv(runScenario(sc)));

    const RunResult rj = run("simulate --config cli_scenario.cfg --format json");
    REQUIRE(rj.code == 0);
    const JsonValue j = parseJson(rj.out);
    REQUIRE(j.find("rows") != nullptr);
    CHECK(j.find("rows")->items.size() == 2);

    const RunResult again = run("simulate --config cli_scenario.cfg");
    CHECK(again.out == r.out);

    CHECK(run("simulate --config cli_scenario.cfg --format yaml").code == 2);
    CHECK(run("simulate --config no_such.cfg").code == 2);
    std::remove("cli_scenario.cfg");
}

TEST_CASE("output file redirection") {
    const RunResult r = run("are --score sign --family gaussian --k 3 --out cli_out.json");
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    const std::string text = slurp("cli_out.json");
    CHECK(parseJson(text.substr(0, text.find_last_not_of('\n') + 1)).find("are") != nullptr);
    std::remove("cli_out.json");
    std::remove(dataPath().c_str());
}
