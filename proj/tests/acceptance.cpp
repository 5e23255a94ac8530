// End-to-end acceptance checks. Each criterion prints exactly one PASS/FAIL
// line; diagnostics for failures go to stderr; the exit code is the number
// of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "pcatest/pcatest.hpp"

using namespace pcatest;

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool near(double got, double want, double tol, const std::string& what) {
    if (std::isfinite(got) && std::abs(got - want) <= tol) return true;
    std::fprintf(stderr, "  %s: got %.6f, expected %.6f +- %.6f\n", what.c_str(), got, want,
                 tol);
    return false;
}

bool below(double got, double bound, const std::string& what) {
    if (std::isfinite(got) && got < bound) return true;
    std::fprintf(stderr, "  %s: got %.6f, expected < %.6f\n", what.c_str(), got, bound);
    return false;
}

Matrix diagShape(Vector lambda) {
    double logdet = 0.0;
    for (double v : lambda) logdet += std::log(v);
    const double scale = std::exp(-logdet / double(lambda.size()));
    for (double& v : lambda) v *= scale;
    return Matrix::diag(lambda);
}

Vector shapeSpectrum(const Matrix& v) {
    Vector s(v.rows());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = v(i, i);
    return s;
}

Matrix drawSample(std::size_t n, const RadialFamily& f, const Matrix& v, const char* tag,
                  std::size_t rep) {
    Rng rng(20250815u, mixStream(fnv1a(tag, std::string(tag).size()), rep));
    return sampleElliptical(n, Vector(f.k, 0.0), 1.0, v, f, rng);
}

// --------------------------------------------------------------- criterion 1

bool efficiencyGrid() {
    const auto t0 = Clock::now();
    const char* familySpec[7] = {"t:5", "t:8", "t:12", "gaussian", "e:2", "e:3", "e:5"};
    const std::size_t dims[5] = {2, 3, 4, 6, 10};
    static const double vdwWant[5][7] = {
        {2.204, 1.215, 1.078, 1.000, 1.129, 1.308, 1.637},
        {2.270, 1.233, 1.086, 1.000, 1.108, 1.259, 1.536},
        {2.326, 1.249, 1.093, 1.000, 1.093, 1.223, 1.462},
        {2.413, 1.275, 1.106, 1.000, 1.072, 1.174, 1.363},
        {2.531, 1.312, 1.126, 1.000, 1.050, 1.121, 1.254}};
    static const double wilWant[5][7] = {
        {2.258, 1.174, 1.001, 0.844, 0.789, 0.804, 0.842},
        {2.386, 1.246, 1.068, 0.913, 0.897, 0.933, 1.001},
        {2.432, 1.273, 1.094, 0.945, 0.955, 1.006, 1.095},
        {2.451, 1.283, 1.105, 0.969, 1.008, 1.075, 1.188},
        {2.426, 1.264, 1.088, 0.970, 1.032, 1.106, 1.233}};
    static const double speWant[5][7] = {
        {2.301, 1.230, 1.067, 0.934, 0.965, 1.042, 1.168},
        {2.277, 1.225, 1.070, 0.957, 1.033, 1.141, 1.317},
        {2.225, 1.200, 1.051, 0.956, 1.057, 1.179, 1.383},
        {2.128, 1.146, 1.007, 0.936, 1.057, 1.189, 1.414},
        {2.001, 1.068, 0.936, 0.891, 1.017, 1.144, 1.365}};

    bool ok = true;
    for (std::size_t ki = 0; ki < 5; ++ki) {
        const std::size_t k = dims[ki];
        for (std::size_t fi = 0; fi < 7; ++fi) {
            const RadialFamily g = parseFamily(familySpec[fi], k);
            const std::string cell = std::string(familySpec[fi]) + "/k=" + std::to_string(k);
            ok &= near(areRatio(vdwScore(k), g), vdwWant[ki][fi], 0.001 + 1e-9, "vdw " + cell);
            ok &= near(areRatio(wilcoxonScore(k), g), wilWant[ki][fi], 0.001 + 1e-9,
                       "wilcoxon " + cell);
            ok &= near(areRatio(spearmanScore(k), g), speWant[ki][fi], 0.001 + 1e-9,
                       "spearman " + cell);
        }
    }
    ok &= below(seconds(t0), 10.0, "efficiency grid runtime (s)");
    return ok;
}

// --------------------------------------------------------------- criterion 2

bool informationConstants() {
    const auto t0 = Clock::now();
    bool ok = true;
    for (std::size_t k = 2; k <= 10; ++k) {
        const double kk = double(k);
        const RadialFamily gauss = gaussianFamily(k);
        ok &= near(crossInfo(densityScore(gauss), gauss), kk * (kk + 2.0),
                   1e-6 * kk * (kk + 2.0), "gaussian information k=" + std::to_string(k));
        for (double nu : {3.0, 5.0, 8.0, 12.0}) {
            const RadialFamily st = parseFamily("t:" + std::to_string(nu), k);
            const double want = kk * (kk + 2.0) * (kk + nu) / (kk + nu + 2.0);
            ok &= near(crossInfo(densityScore(st), st), want, 1e-6 * want,
                       "student information k=" + std::to_string(k) +
                           " nu=" + std::to_string(int(nu)));
        }
    }
    // kurtosis of the gaussian radial law, by direct moment quadrature
    for (std::size_t k = 2; k <= 10; ++k) {
        const RadialFamily gauss = gaussianFamily(k);
        const double m2 = integrate01([&](double u) {
            const double d = radialQuantile(gauss, u);
            return d * d;
        });
        const double m4 = integrate01([&](double u) {
            const double d = radialQuantile(gauss, u);
            return d * d * d * d;
        });
        const double kappa = double(k) * m4 / ((double(k) + 2.0) * m2 * m2) - 1.0;
        ok &= near(kappa, 0.0, 1e-9, "gaussian kurtosis k=" + std::to_string(k));
    }
    ok &= below(seconds(t0), 5.0, "information constants runtime (s)");
    return ok;
}

// ----------------------------------------------------------- criteria 3 and 4

double freqOf(const RejectionTable& t, const std::string& method, double xi,
              const std::string& cvMode) {
    for (const auto& r : t.rows)
        if (r.method == method && r.xi == xi && r.cvMode == cvMode) return r.freq;
    throw validation_error("rejection table is missing " + method + " at xi=" +
                           std::to_string(xi) + " (" + cvMode + ")");
}

double tol3se(double v) { return 3.0 * std::sqrt(v * (1.0 - v) / 2500.0); }

Scenario baseDesign(Problem problem) {
    Scenario sc;
    sc.problem = problem;
    return sc;  // k=3, n=100, reps=2500, lambda (10,4,1), alpha 0.05, default seed
}

bool eigvecFrequencies() {
    bool ok = true;

    Scenario a = baseDesign(Problem::eigvec);
    a.families = {gaussianFamily(3)};
    a.xiGrid = {0.0};
    a.methods = {"anderson"};
    ok &= near(freqOf(runScenario(a), "anderson", 0.0, "asymptotic"), 0.0572, tol3se(0.0572),
               "anderson size, gaussian");

    Scenario b = baseDesign(Problem::eigvec);
    b.families = {gaussianFamily(3)};
    b.xiGrid = {3.0};
    b.methods = {"rank:vdw"};
    ok &= near(freqOf(runScenario(b), "rank:vdw", 3.0, "asymptotic"), 0.9608, tol3se(0.9608),
               "vdw power at xi=3, gaussian");

    Scenario c = baseDesign(Problem::eigvec);
    c.families = {parseFamily("t:3", 3)};
    c.xiGrid = {0.0};
    c.methods = {"anderson", "rank:vdw"};
    const RejectionTable tc = runScenario(c);
    ok &= near(freqOf(tc, "anderson", 0.0, "asymptotic"), 0.4772, tol3se(0.4772),
               "anderson overrejection, t3");
    ok &= near(freqOf(tc, "rank:vdw", 0.0, "asymptotic"), 0.0444, tol3se(0.0444),
               "vdw size, t3");

    Scenario d = baseDesign(Problem::eigvec);
    d.families = {parseFamily("t:5", 3)};
    d.xiGrid = {0.0};
    d.methods = {"pseudo"};
    ok &= near(freqOf(runScenario(d), "pseudo", 0.0, "asymptotic"), 0.0544, tol3se(0.0544),
               "kurtosis-corrected size, t5");

    Scenario e = baseDesign(Problem::eigvec);
    e.families = {parseFamily("t:1", 3)};
    e.xiGrid = {0.0};
    e.methods = {"rank:sign"};
    ok &= near(freqOf(runScenario(e), "rank:sign", 0.0, "asymptotic"), 0.0512, tol3se(0.0512),
               "sign size, t1");
    return ok;
}

bool eigvalFrequencies() {
    bool ok = true;

    Scenario f = baseDesign(Problem::eigval);
    f.families = {gaussianFamily(3)};
    f.xiGrid = {0.0};
    f.methods = {"anderson", "rank:vdw"};
    f.simulatedCv = true;
    const RejectionTable tf = runScenario(f);
    ok &= near(freqOf(tf, "anderson", 0.0, "asymptotic"), 0.0460, tol3se(0.0460),
               "anderson size, gaussian");
    ok &= near(freqOf(tf, "rank:vdw", 0.0, "asymptotic"), 0.0608, tol3se(0.0608),
               "vdw asymptotic size, gaussian");
    ok &= near(freqOf(tf, "rank:vdw", 0.0, "simulated"), 0.0480, tol3se(0.0480),
               "vdw simulated-cv size, gaussian");

    Scenario g = baseDesign(Problem::eigval);
    g.families = {parseFamily("t:1", 3)};
    g.xiGrid = {0.0};
    g.methods = {"davis"};
    ok &= near(freqOf(runScenario(g), "davis", 0.0, "asymptotic"), 0.0072, tol3se(0.0072),
               "davis breakdown size, t1");

    Scenario h = baseDesign(Problem::eigval);
    h.families = {parseFamily("t:1", 3)};
    h.xiGrid = {3.0};
    h.methods = {"rank:vdw"};
    h.simulatedCv = true;
    ok &= near(freqOf(runScenario(h), "rank:vdw", 3.0, "simulated"), 0.8332, tol3se(0.8332),
               "vdw simulated-cv power at xi=3, t1");
    return ok;
}

// --------------------------------------------------------------- criterion 5

bool criticalValues() {
    bool ok = true;
    const char* specs[7] = {"vdw", "tscore:5", "tscore:3", "tscore:1",
                            "sign", "wilcoxon", "spearman"};
    double cv[7];
    for (int i = 0; i < 7; ++i) {
        cv[i] = simulateCriticalValue(parseScore(specs[i], 3), Problem::eigval, 3, 100, 100000);
        ok &= below(cv[i], -1.645, std::string(specs[i]) + " cv below the normal quantile");
    }
    ok &= near(cv[0], -1.7782, 0.02, "vdw critical value");
    ok &= near(cv[4], -1.9320, 0.02, "sign critical value");
    return ok;
}

// --------------------------------------------------------------- criterion 6

bool nullLaws() {
    bool ok = true;
    const Matrix v = diagShape({10.0, 4.0, 1.0});
    const RadialFamily gauss = gaussianFamily(3);
    const RadialFamily t3 = parseFamily("t:3", 3);
    const EigvecHypothesis hv({1.0, 0.0, 0.0});
    const ScoreSpec vdw = vdwScore(3);
    const std::size_t reps = 5000, n = 1000;

    {
        const KsResult r = nullDistributionCheck(
            [&](std::size_t i) {
                return qRank(drawSample(n, gauss, v, "null-qrank", i), hv, vdw).statistic;
            },
            reps, [](double x) { return chiSquareCdf(x, 2.0); });
        ok &= below(0.01, r.pValue, "rank eigenvector statistic vs chi-square(2), KS p");
    }
    {
        EllipticalParams vt;
        vt.theta = Vector(3, 0.0);
        vt.lambda = shapeSpectrum(v);
        vt.beta = Matrix::identity(3);
        const EigvalHypothesis hl(1.0 / 3.0, 1);
        const KsResult r = nullDistributionCheck(
            [&](std::size_t i) {
                return tParametricOracle(drawSample(n, gauss, v, "null-oracle", i), vt, gauss,
                                         hl);
            },
            reps, [](double x) { return normalCdf(x); });
        ok &= below(0.01, r.pValue, "parametric oracle statistic vs normal, KS p");
    }
    {
        const Vector theta0(3, 0.0);
        std::vector<double> ga(reps), tb(reps);
        for (std::size_t i = 0; i < reps; ++i) {
            ga[i] = qRankOracle(drawSample(n, gauss, v, "free-gauss", i), hv, vdw, theta0, v);
            tb[i] = qRankOracle(drawSample(n, t3, v, "free-t3", i), hv, vdw, theta0, v);
        }
        const KsResult r = ksTwoSample(std::move(ga), std::move(tb));
        ok &= below(0.01, r.pValue, "distribution-freeness across radial laws, KS p");
    }
    return ok;
}

// --------------------------------------------------------------- criterion 7

bool relErrWithin(double a, double b, double tol, const std::string& what) {
    const double err = std::abs(a - b) / std::max(1.0, std::abs(b));
    if (err <= tol) return true;
    std::fprintf(stderr, "  %s: %.12g vs %.12g (rel err %.3g > %.3g)\n", what.c_str(), a, b,
                 err, tol);
    return false;
}

bool invariances() {
    const auto t0 = Clock::now();
    bool ok = true;
    const Matrix v = diagShape({10.0, 4.0, 1.0});
    const RadialFamily t5 = parseFamily("t:5", 3);
    const Matrix x = drawSample(200, t5, v, "invariance", 0);
    const std::size_t n = x.rows();
    const EigvecHypothesis hv({1.0, 0.0, 0.0});
    const EigvalHypothesis hl(1.0 / 3.0, 1);
    const ScoreSpec vdw = vdwScore(3);

    // rotation in the plane orthogonal to the hypothesized axis
    const double co = std::cos(0.6), si = std::sin(0.6);
    Matrix xr(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        xr(i, 0) = x(i, 0);
        xr(i, 1) = co * x(i, 1) - si * x(i, 2);
        xr(i, 2) = si * x(i, 1) + co * x(i, 2);
    }
    ok &= relErrWithin(qAnderson(xr, hv).statistic, qAnderson(x, hv).statistic, 1e-8,
                       "rotation: anderson");
    ok &= relErrWithin(qGaussian(xr, hv).statistic, qGaussian(x, hv).statistic, 1e-8,
                       "rotation: gauss");
    ok &= relErrWithin(qPseudoGaussian(xr, hv).statistic, qPseudoGaussian(x, hv).statistic,
                       1e-8, "rotation: pseudo");
    ok &= relErrWithin(qRank(xr, hv, vdw).statistic, qRank(x, hv, vdw).statistic, 1e-8,
                       "rotation: rank");

    // global rescaling
    Matrix x3 = x;
    x3 *= 3.0;
    ok &= relErrWithin(qAnderson(x3, hv).statistic, qAnderson(x, hv).statistic, 1e-8,
                       "scale: anderson");
    ok &= relErrWithin(qGaussian(x3, hv).statistic, qGaussian(x, hv).statistic, 1e-8,
                       "scale: gauss");
    ok &= relErrWithin(qPseudoGaussian(x3, hv).statistic, qPseudoGaussian(x, hv).statistic,
                       1e-8, "scale: pseudo");
    ok &= relErrWithin(
        qPseudoGaussian(x3, hv, 0.05, PseudoVariant::tyler).statistic,
        qPseudoGaussian(x, hv, 0.05, PseudoVariant::tyler).statistic, 1e-8, "scale: tyler");
    ok &= relErrWithin(qRank(x3, hv, vdw).statistic, qRank(x, hv, vdw).statistic, 1e-8,
                       "scale: rank eigenvector");
    ok &= relErrWithin(tAnderson(x3, hl).statistic, tAnderson(x, hl).statistic, 1e-8,
                       "scale: anderson eigenvalue");
    ok &= relErrWithin(tDavis(x3, hl).statistic, tDavis(x, hl).statistic, 1e-8,
                       "scale: davis");
    ok &= relErrWithin(tRank(x3, hl, vdw).statistic, tRank(x, hl, vdw).statistic, 1e-8,
                       "scale: rank eigenvalue");

    // oracle rank statistics under the radial transform d -> d^3
    {
        const Vector theta0(3, 0.0);
        Matrix y(n, 3);
        for (std::size_t i = 0; i < n; ++i) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < 3; ++j) d2 += x(i, j) * x(i, j);
            for (std::size_t j = 0; j < 3; ++j) y(i, j) = x(i, j) * d2;
        }
        const SignsRanks sx = signsRanks(x, theta0, Matrix::identity(3));
        const SignsRanks sy = signsRanks(y, theta0, Matrix::identity(3));
        bool same = sx.R == sy.R;
        for (std::size_t i = 0; same && i < n; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                if (std::abs(sx.U[i][j] - sy.U[i][j]) > 1e-12) same = false;
        if (!same) std::fprintf(stderr, "  radial transform altered signs or ranks\n");
        ok &= same;
        ok &= relErrWithin(
            qRankOracle(y, hv, vdw, theta0, Matrix::identity(3)),
            qRankOracle(x, hv, vdw, theta0, Matrix::identity(3)), 1e-12, "radial: rank oracle");
        EllipticalParams vt;
        vt.theta = theta0;
        vt.lambda = {1.0, 1.0, 1.0};
        vt.beta = Matrix::identity(3);
        ok &= relErrWithin(tRankOracle(y, hl, vdw, vt), tRankOracle(x, hl, vdw, vt), 1e-12,
                           "radial: eigenvalue rank oracle");
    }

    // information-matrix inverse identity
    for (const Vector& lam : {shapeSpectrum(diagShape({10.0, 4.0, 1.0})),
                              shapeSpectrum(diagShape({8.0, 4.0, 2.0, 1.0}))}) {
        Matrix prod = shapeInfoD(lam) * shapeInfoDInverse(lam);
        prod -= Matrix::identity(lam.size() - 1);
        ok &= below(prod.maxAbs(), 1e-10,
                    "information inverse residual, k=" + std::to_string(lam.size()));
    }

    // diagonal selector orthonormality
    for (std::size_t k : {3u, 4u, 6u}) {
        const Matrix hk = diagSelector(k);
        Matrix prod = hk * hk.transpose();
        prod -= Matrix::identity(k);
        ok &= below(prod.maxAbs(), 1e-10, "diag selector residual, k=" + std::to_string(k));
    }

    // Tyler fixed point
    {
        const Matrix vhat = tylerShape(x, Vector(3, 0.0));
        const Matrix w = symmetricInvSqrt(vhat);
        Matrix acc(3, 3);
        for (std::size_t i = 0; i < n; ++i) {
            Vector z(3);
            for (std::size_t r = 0; r < 3; ++r) {
                z[r] = 0.0;
                for (std::size_t c = 0; c < 3; ++c) z[r] += w(r, c) * x(i, c);
            }
            const double nrm2 = dot(z, z);
            for (std::size_t r = 0; r < 3; ++r)
                for (std::size_t c = 0; c < 3; ++c) acc(r, c) += z[r] * z[c] / nrm2;
        }
        acc *= 3.0 / double(n);
        acc -= Matrix::identity(3);
        ok &= below(acc.maxAbs(), 1e-10, "tyler fixed-point residual");
    }

    // constrained estimators satisfy their constraints
    {
        const ShapeEstimate est = shapeAtHrTyler(x);
        const double s = 1.0 / std::sqrt(3.0);
        const Matrix frame = constrainedEigvecs(est.beta, Vector{s, s, s});
        Matrix gram = frame.transpose() * frame;
        gram -= Matrix::identity(3);
        ok &= below(gram.maxAbs(), 1e-10, "pinned frame orthonormality");
        double colErr = 0.0;
        for (std::size_t r = 0; r < 3; ++r) colErr = std::max(colErr, std::abs(frame(r, 0) - s));
        ok &= below(colErr, 1e-10, "pinned frame first column");
        ok &= below(std::abs(determinant(frame) - 1.0), 1e-10, "pinned frame determinant");

        const Vector lt = constrainedEigvals(est.lambda, 0.4, 1);
        ok &= below(std::abs(dot(contrastC(3, 0.4, 1), lt)), 1e-10,
                    "constrained spectrum contrast");
        ok &= below(std::abs(lt[0] * lt[1] * lt[2] - 1.0), 1e-10,
                    "constrained spectrum determinant");
    }

    ok &= below(seconds(t0), 30.0, "invariance runtime (s)");
    return ok;
}

// --------------------------------------------------------------- criterion 8

bool equivalenceTrend() {
    const Matrix v = diagShape({10.0, 4.0, 1.0});
    const RadialFamily gauss = gaussianFamily(3);
    const EigvecHypothesis hv({1.0, 0.0, 0.0});
    double med[3];
    const std::size_t sizes[3] = {100, 400, 1600};
    for (int si = 0; si < 3; ++si) {
        std::vector<double> gaps(200);
        for (std::size_t rep = 0; rep < 200; ++rep) {
            const Matrix x = drawSample(sizes[si], gauss, v, "trend", rep + 1000 * si);
            gaps[rep] =
                std::abs(qAnderson(x, hv).statistic - qGaussian(x, hv).statistic);
        }
        std::nth_element(gaps.begin(), gaps.begin() + 100, gaps.end());
        med[si] = gaps[100];
    }
    bool ok = true;
    ok &= below(med[1], med[0], "median gap shrinks from n=100 to n=400");
    ok &= below(med[2], med[1], "median gap shrinks from n=400 to n=1600");
    std::fprintf(stderr, "  median |anderson - gauss| gaps: %.5f (n=100) %.5f (n=400) %.5f (n=1600)\n",
                 med[0], med[1], med[2]);
    return ok;
}

int runCriterion(int index, const char* name, bool (*fn)()) {
    bool ok = false;
    try {
        ok = fn();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "  criterion %d threw: %s\n", index, e.what());
    }
    std::printf("criterion %d (%s): %s\n", index, name, ok ? "PASS" : "FAIL");
    std::fflush(stdout);
    return ok ? 0 : 1;
}

}  // namespace

int main() {
    int failed = 0;
    failed += runCriterion(1, "rank-test efficiency grid", efficiencyGrid);
    failed += runCriterion(2, "score information closed forms", informationConstants);
    failed += runCriterion(3, "eigenvector test size and power", eigvecFrequencies);
    failed += runCriterion(4, "eigenvalue test size and power", eigvalFrequencies);
    failed += runCriterion(5, "simulated critical values", criticalValues);
    failed += runCriterion(6, "null distribution checks", nullLaws);
    failed += runCriterion(7, "invariance identities", invariances);
    failed += runCriterion(8, "gaussian-limit agreement trend", equivalenceTrend);
    if (failed) std::fprintf(stderr, "%d criterion(s) failed\n", failed);
    return failed == 0 ? 0 : 1;
}
