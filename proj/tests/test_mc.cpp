#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

#include "pcatest/errors.hpp"
#include "pcatest/montecarlo.hpp"
#include "pcatest/radial.hpp"
#include "pcatest/scores.hpp"
#include "pcatest/special.hpp"

using namespace pcatest;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("empirical quantile conventions") {
    std::vector<double> sorted(100);
    for (std::size_t i = 0; i < 100; ++i) sorted[i] = double(i + 1);

    // ceil(alpha m)-th order statistic, 1-based
    CHECK(empiricalQuantileLower(sorted, 0.05) == 5.0);
    CHECK(empiricalQuantileLower(sorted, 0.049) == 5.0);
    CHECK(empiricalQuantileLower(sorted, 0.005) == 1.0);
    CHECK(empiricalQuantileUpper(sorted, 0.05) == 95.0);
    CHECK(empiricalQuantileUpper(sorted, 0.049) == 96.0);

    CHECK_THROWS_AS(empiricalQuantileLower(sorted, 0.0), validation_error);

    std::vector<double> thousand(1000);
    for (std::size_t i = 0; i < 1000; ++i) thousand[i] = double(i + 1);
    CHECK(empiricalQuantileLower(thousand, 0.05) == 50.0);
    CHECK(empiricalQuantileUpper(thousand, 0.05) == 950.0);
}

TEST_CASE("simulated critical values") {
    const ScoreSpec sign3 = signScore(3);

    SECTION("validation") {
        CHECK_THROWS_WITH(simulateCriticalValue(sign3, Problem::eigvec, 3, 50, 999),
                          ContainsSubstring("1000"));
        CHECK_THROWS_AS(simulateCriticalValue(signScore(4), Problem::eigvec, 3, 50, 1000),
                        validation_error);
        // no default spectrum outside k = 3
        CHECK_THROWS_WITH(simulateCriticalValue(signScore(4), Problem::eigval, 4, 50, 1000),
                          ContainsSubstring("supply lambda"));
        const Vector bad = {10.0, 4.0, -1.0};
        CHECK_THROWS_AS(
            simulateCriticalValue(sign3, Problem::eigval, 3, 50, 1000, 0.05, 1, &bad),
            validation_error);
    }

    SECTION("determinism and thread invariance") {
        const double a = simulateCriticalValue(sign3, Problem::eigvec, 3, 50, 1000, 0.05, 7, nullptr,
                                               -1.0, 1, 1);
        const double b = simulateCriticalValue(sign3, Problem::eigvec, 3, 50, 1000, 0.05, 7, nullptr,
                                               -1.0, 1, 3);
        CHECK(a == b);
        const double c = simulateCriticalValue(sign3, Problem::eigvec, 3, 50, 1000, 0.05, 8, nullptr,
                                               -1.0, 1, 1);
        CHECK(a != c);
    }

    SECTION("tail sides") {
        // eigenvector statistic is nonnegative, upper-tail cv near chi-square(2) 0.95
        const double up = simulateCriticalValue(sign3, Problem::eigvec, 3, 100, 2000);
        CHECK(up > 3.0);
        CHECK(up < 12.0);
        // eigenvalue statistic is asymptotically standard normal, lower-tail cv
        const double lo = simulateCriticalValue(sign3, Problem::eigval, 3, 100, 2000);
        CHECK(lo < -1.0);
        CHECK(lo > -3.5);
    }

    SECTION("custom spectrum in two dimensions") {
        const Vector lambda = {4.0, 1.0};
        const double cv = simulateCriticalValue(signScore(2), Problem::eigval, 2, 60, 1000, 0.05,
                                                20250815, &lambda);
        CHECK(std::isfinite(cv));
        CHECK(cv < 0.0);
    }
}

TEST_CASE("rejection experiment") {
    Scenario sc;
    sc.problem = Problem::eigvec;
    sc.k = 3;
    sc.n = 40;
    sc.reps = 60;
    sc.families = {parseFamily("gaussian", 3), parseFamily("t:5", 3)};
    sc.xiGrid = {0.0, 2.0};
    sc.lambda = {10.0, 4.0, 1.0};
    sc.methods = {"anderson", "rank:sign"};
    sc.seed = 99;
    sc.threads = 1;

    SECTION("row layout and reproducibility across thread counts") {
        const RejectionTable t1 = runScenario(sc);
        REQUIRE(t1.rows.size() == 2 * 2 * 2);

        // method-major, family, then grid point
        CHECK(t1.rows[0].method == "anderson");
        CHECK(t1.rows[0].family == "gaussian");
        CHECK(t1.rows[0].xi == 0.0);
        CHECK(t1.rows[1].xi == 2.0);
        CHECK(t1.rows[2].family == "t:5");
        CHECK(t1.rows[4].method == "rank:sign");
        for (const auto& row : t1.rows) {
            CHECK(row.freq >= 0.0);
            CHECK(row.freq <= 1.0);
            CHECK(row.reps == 60);
            CHECK(row.n == 40);
            CHECK(row.alpha == 0.05);
            CHECK(row.cvMode == "asymptotic");
        }

        Scenario sc3 = sc;
        sc3.threads = 3;
        const RejectionTable t3 = runScenario(sc3);
        REQUIRE(t3.rows.size() == t1.rows.size());
        for (std::size_t i = 0; i < t1.rows.size(); ++i) {
            CHECK(t3.rows[i].freq == t1.rows[i].freq);
            CHECK(t3.rows[i].method == t1.rows[i].method);
        }

        // power should not decrease when the alternative is this far out
        double null0 = 0.0, far0 = 0.0;
        for (const auto& row : t1.rows)
            if (row.method == "anderson" && row.family == "gaussian")
                (row.xi == 0.0 ? null0 : far0) = row.freq;
        CHECK(far0 >= null0);
    }

    SECTION("single replicate yields a 0/1 frequency") {
        Scenario one = sc;
        one.reps = 1;
        one.xiGrid = {0.0};
        one.methods = {"anderson"};
        const RejectionTable t = runScenario(one);
        REQUIRE(t.rows.size() == 2);
        for (const auto& row : t.rows) CHECK((row.freq == 0.0 || row.freq == 1.0));
    }

    SECTION("method list overload") {
        Scenario base = sc;
        base.methods.clear();
        const RejectionTable t = runScenario(base, {"gauss"});
        REQUIRE(t.rows.size() == 4);
        CHECK(t.rows[0].method == "gauss");
    }

    SECTION("validation") {
        Scenario bad = sc;
        bad.lambda = {1.0, 4.0, 10.0};
        CHECK_THROWS_WITH(runScenario(bad), ContainsSubstring("decreasing"));
        bad = sc;
        bad.methods = {"nonsense"};
        CHECK_THROWS_WITH(runScenario(bad), ContainsSubstring("unknown eigenvector method"));
        bad = sc;
        bad.families.clear();
        CHECK_THROWS_AS(runScenario(bad), validation_error);
        bad = sc;
        bad.q = 3;
        CHECK_THROWS_AS(runScenario(bad), validation_error);
        bad = sc;
        bad.problem = Problem::eigval;
        bad.methods = {"tyler"};
        CHECK_THROWS_WITH(runScenario(bad), ContainsSubstring("unknown eigenvalue method"));
    }

    SECTION("simulated critical-value rows for rank eigenvalue tests") {
        Scenario ev = sc;
        ev.problem = Problem::eigval;
        ev.reps = 30;
        ev.methods = {"davis", "rank:sign"};
        ev.simulatedCv = true;
        ev.cvReps = 1000;
        const RejectionTable t = runScenario(ev);
        // davis: 1 slot; rank:sign: asymptotic + simulated
        REQUIRE(t.rows.size() == 3 * 2 * 2);
        CHECK(t.rows[0].method == "davis");
        CHECK(t.rows[0].cvMode == "asymptotic");
        CHECK(t.rows[4].method == "rank:sign");
        CHECK(t.rows[4].cvMode == "asymptotic");
        CHECK(t.rows[8].method == "rank:sign");
        CHECK(t.rows[8].cvMode == "simulated");
    }
}

TEST_CASE("kolmogorov-smirnov checks") {
    SECTION("one-sample statistic by hand") {
        const KsResult r = ksAgainstCdf({0.1, 0.5, 0.9}, [](double x) { return x; });
        CHECK(r.statistic == Approx(7.0 / 30.0).epsilon(1e-12));
        CHECK(r.draws == 3);
    }

    SECTION("accepts a matching reference") {
        std::vector<double> grid(400);
        for (std::size_t i = 0; i < 400; ++i) grid[i] = (double(i) + 0.5) / 400.0;
        const KsResult r = ksAgainstCdf(grid, [](double x) { return x; });
        CHECK(r.pValue > 0.9);
    }

    SECTION("rejects a gross mismatch") {
        std::vector<double> grid(400);
        for (std::size_t i = 0; i < 400; ++i) grid[i] = (double(i) + 0.5) / 400.0;
        const KsResult r = ksAgainstCdf(grid, [](double x) { return normalCdf(x); });
        CHECK(r.pValue < 1e-6);
    }

    SECTION("two-sample") {
        std::vector<double> a(300), b(300), far(300);
        for (std::size_t i = 0; i < 300; ++i) {
            a[i] = (double(i) + 0.5) / 300.0;
            b[i] = (double(i) + 0.25) / 300.0;
            far[i] = a[i] + 10.0;
        }
        CHECK(ksTwoSample(a, b).pValue > 0.9);
        const KsResult apart = ksTwoSample(a, far);
        CHECK(apart.statistic == 1.0);
        CHECK(apart.pValue < 1e-12);
        CHECK_THROWS_AS(ksTwoSample({1.0}, a), validation_error);
    }

    SECTION("null distribution harness") {
        CHECK_THROWS_WITH(nullDistributionCheck([](std::size_t) { return 0.0; }, 499,
                                                [](double x) { return x; }),
                          ContainsSubstring("500"));
        // quantile grid of the reference law is as null as it gets
        const KsResult r = nullDistributionCheck(
            [](std::size_t i) { return chiSquareQuantile((double(i) + 0.5) / 500.0, 2.0); }, 500,
            [](double x) { return chiSquareCdf(x, 2.0); });
        CHECK(r.pValue > 0.9);
        CHECK(r.draws == 500);
    }

    SECTION("input validation") {
        CHECK_THROWS_AS(ksAgainstCdf({0.5}, [](double x) { return x; }), validation_error);
    }
}
