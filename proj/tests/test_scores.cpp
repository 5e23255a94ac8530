#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pcatest/quadrature.hpp"
#include "pcatest/radial.hpp"
#include "pcatest/scores.hpp"

using namespace pcatest;

TEST_CASE("score spec grammar") {
    CHECK(parseScore("vdw", 3).kind == ScoreSpec::Kind::density);
    CHECK(parseScore("vdw", 3).label == "vdw");
    CHECK(parseScore("sign", 3).a == 0.0);
    CHECK(parseScore("wilcoxon", 3).a == 1.0);
    CHECK(parseScore("spearman", 3).a == 2.0);
    CHECK(parseScore("power:1.5", 3).a == 1.5);
    CHECK(parseScore("tscore:5", 3).family.nu == 5.0);
    CHECK(parseScore("tscore:5", 3).label == "tscore:5.000000");

    CHECK_THROWS_AS(parseScore("median", 3), validation_error);
    CHECK_THROWS_AS(parseScore("power:", 3), validation_error);
    CHECK_THROWS_AS(parseScore("tscore:x", 3), validation_error);
    CHECK_THROWS_AS(powerScore(3, -0.5), validation_error);
}

TEST_CASE("score evaluation") {
    SECTION("power scores") {
        for (double u : {0.1, 0.5, 0.9}) CHECK(evalScore(signScore(3), u) == 3.0);
        CHECK(evalScore(wilcoxonScore(3), 0.5) == Catch::Approx(3.0).epsilon(1e-14));
        CHECK(evalScore(spearmanScore(3), 0.5) == Catch::Approx(2.25).epsilon(1e-14));
        CHECK(evalScore(powerScore(2, 3.0), 0.5) == Catch::Approx(1.0).epsilon(1e-14));
    }
    SECTION("van der Waerden score is the chi-square quantile") {
        CHECK(evalScore(vdwScore(3), 0.5) ==
              Catch::Approx(2.3659738843753377).epsilon(1e-11));
        CHECK(evalScore(vdwScore(3), 0.95) ==
              Catch::Approx(7.814727903251179).epsilon(1e-10));
    }
    SECTION("student score closed form") {
        CHECK(evalScore(tScore(3, 5.0), 0.3) ==
              Catch::Approx(1.8386534717015306).epsilon(1e-10));
        CHECK(evalScore(tScore(3, 5.0), 0.8) ==
              Catch::Approx(4.5983652756184972).epsilon(1e-10));
        // bounded above by k + nu
        for (double u : {0.9, 0.99, 0.9999}) CHECK(evalScore(tScore(3, 5.0), u) < 8.0);
    }
    SECTION("boundary") {
        CHECK_THROWS_AS(evalScore(vdwScore(3), 0.0), validation_error);
        CHECK_THROWS_AS(evalScore(signScore(3), 1.0), validation_error);
    }
}

TEST_CASE("score normalization integrates to k") {
    for (std::size_t k : {2, 3, 10}) {
        const ScoreSpec specs[] = {signScore(k),       wilcoxonScore(k),
                                   spearmanScore(k),   powerScore(k, 3.5),
                                   vdwScore(k),        tScore(k, 5.0),
                                   tScore(k, 8.0),     densityScore(powerExpFamily(k, 2.0))};
        for (const ScoreSpec& s : specs) {
            const double mass = integrate01([&](double u) { return evalScore(s, u); });
            CHECK(mass == Catch::Approx(double(k)).epsilon(1e-6));
        }
    }
}

TEST_CASE("score information norms") {
    SECTION("closed forms") {
        CHECK(scoreNorm(signScore(3)) == Catch::Approx(9.0).epsilon(1e-14));
        CHECK(scoreNorm(wilcoxonScore(3)) == Catch::Approx(12.0).epsilon(1e-14));
        CHECK(scoreNorm(spearmanScore(3)) == Catch::Approx(16.2).epsilon(1e-14));
        CHECK(scoreNorm(vdwScore(3)) == Catch::Approx(15.0).epsilon(1e-14));
        CHECK(scoreNorm(tScore(3, 5.0)) == Catch::Approx(12.0).epsilon(1e-14));
    }
    SECTION("closed forms agree with quadrature") {
        const ScoreSpec specs[] = {wilcoxonScore(3), vdwScore(3), tScore(3, 5.0),
                                   spearmanScore(4), tScore(2, 8.0)};
        for (const ScoreSpec& s : specs) {
            const double byQuad = integrate01([&](double u) {
                const double v = evalScore(s, u);
                return v * v;
            });
            CHECK(byQuad == Catch::Approx(scoreNorm(s)).epsilon(1e-6));
        }
    }
}

TEST_CASE("cross-information") {
    SECTION("self cross-information reduces to the norm") {
        CHECK(crossInfo(vdwScore(3), gaussianFamily(3)) ==
              Catch::Approx(15.0).epsilon(1e-6));
        CHECK(crossInfo(tScore(3, 5.0), studentFamily(3, 5.0)) ==
              Catch::Approx(12.0).epsilon(1e-6));
    }
    SECTION("frozen reference values") {
        CHECK(crossInfo(vdwScore(3), studentFamily(3, 5.0)) ==
              Catch::Approx(13.049337515497973).epsilon(1e-7));
        CHECK(crossInfo(wilcoxonScore(3), gaussianFamily(3)) ==
              Catch::Approx(12.819718634066614).epsilon(1e-7));
        CHECK(crossInfo(spearmanScore(3), gaussianFamily(3)) ==
              Catch::Approx(15.24839414770722).epsilon(1e-7));
        CHECK(crossInfo(vdwScore(3), powerExpFamily(3, 2.0)) ==
              Catch::Approx(17.407669277197872).epsilon(1e-7));
    }
    SECTION("constant score factorizes to k^2") {
        for (const RadialFamily& f :
             {gaussianFamily(3), studentFamily(3, 5.0), studentFamily(3, 1.0),
              powerExpFamily(3, 3.0)})
            CHECK(crossInfo(signScore(3), f) == Catch::Approx(9.0).epsilon(1e-6));
    }
    SECTION("dimension mismatch") {
        CHECK_THROWS_AS(crossInfo(vdwScore(3), gaussianFamily(4)), validation_error);
    }
}

TEST_CASE("asymptotic relative efficiency") {
    SECTION("van der Waerden against its own family is one") {
        CHECK(areRatio(vdwScore(2), gaussianFamily(2)) == Catch::Approx(1.0).epsilon(1e-6));
        CHECK(areRatio(vdwScore(3), gaussianFamily(3)) == Catch::Approx(1.0).epsilon(1e-6));
    }
    SECTION("published table anchors") {
        CHECK(areRatio(vdwScore(2), studentFamily(2, 5.0)) ==
              Catch::Approx(2.204).margin(0.001));
        CHECK(areRatio(wilcoxonScore(2), gaussianFamily(2)) ==
              Catch::Approx(0.844).margin(0.001));
        CHECK(areRatio(spearmanScore(10), studentFamily(10, 5.0)) ==
              Catch::Approx(2.001).margin(0.001));
    }
    SECTION("frozen high-precision values") {
        CHECK(areRatio(vdwScore(3), studentFamily(3, 5.0)) ==
              Catch::Approx(2.2704694612451042).epsilon(1e-6));
        CHECK(areRatio(wilcoxonScore(3), gaussianFamily(3)) ==
              Catch::Approx(0.91302881031463756).epsilon(1e-6));
        CHECK(areRatio(spearmanScore(3), powerExpFamily(3, 3.0)) ==
              Catch::Approx(1.1411289188389813).epsilon(1e-6));
    }
    SECTION("van der Waerden never falls below one") {
        for (std::size_t k : {2, 4, 10}) {
            for (const RadialFamily& f :
                 {gaussianFamily(k), studentFamily(k, 5.0), studentFamily(k, 12.0),
                  powerExpFamily(k, 2.0), powerExpFamily(k, 5.0)})
                CHECK(areRatio(vdwScore(k), f) >= 1.0 - 1e-3);
        }
    }
    SECTION("kurtosis moment condition is enforced") {
        CHECK_THROWS_WITH(areRatio(vdwScore(3), studentFamily(3, 4.0)),
                          Catch::Matchers::ContainsSubstring("infinite-moment"));
    }
}
