#pragma once

// Test statistics for the two principal-component hypotheses:
//   (a) the leading eigenvector of the scatter/shape matrix equals a given
//       unit vector beta0 up to sign (chi-square reference, upper tail);
//   (b) the trailing eigenvalues carry a given proportion p of the total
//       variance (normal reference, lower tail, one-sided).
// Variants: Gaussian-optimal statistics, their kurtosis-corrected
// pseudo-Gaussian versions, signed-rank statistics with a configurable score,
// and oracle statistics evaluated at the true parameters (used for
// benchmarking and distribution-free critical values). Local-power and
// noncentrality calculators round the module off.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pcatest/errors.hpp"
#include "pcatest/estimators.hpp"
#include "pcatest/matrix.hpp"
#include "pcatest/operators.hpp"
#include "pcatest/radial.hpp"
#include "pcatest/scores.hpp"
#include "pcatest/special.hpp"

namespace pcatest {

struct EigvecHypothesis {
    Vector beta0;

    explicit EigvecHypothesis(Vector b) : beta0(std::move(b)) {
        const double nrm = norm2(beta0);
        if (std::abs(nrm - 1.0) > 1e-6)
            throw validation_error("eigenvector hypothesis: beta0 norm deviates from 1 by " +
                                   std::to_string(std::abs(nrm - 1.0)) +
                                   " (more than 1e-6); refusing to reinterpret");
        for (double& v : beta0) v /= nrm;
    }
};

struct EigvalHypothesis {
    double p;
    std::size_t q;

    EigvalHypothesis(double p_, std::size_t q_) : p(p_), q(q_) {
        if (!(p > 0.0 && p < 1.0))
            throw validation_error("eigenvalue hypothesis: p must lie in (0,1)");
        if (q < 1) throw validation_error("eigenvalue hypothesis: q must be >= 1");
    }
};

// True parameters for oracle statistics: location, scale, det-one shape
// spectrum (descending) and its eigenframe.
struct EllipticalParams {
    Vector theta;
    double sigma2 = 1.0;
    Vector lambda;
    Matrix beta;
};

struct TestReport {
    std::string method;
    double statistic = 0.0;
    std::string reference;
    double pValue = 1.0;
    double alpha = 0.05;
    bool reject = false;
    std::size_t n = 0, k = 0;
    std::vector<std::pair<std::string, double>> nuisance;
    std::vector<std::pair<std::string, std::string>> nuisanceText;
    std::vector<std::string> warnings;
};

enum class CvMode { asymptotic, simulated };

namespace detail {

struct CovPieces {
    Vector mean;
    Matrix s;
    Vector lambda;
    Matrix beta;
};

inline CovPieces covPieces(const Matrix& x) {
    CovPieces p;
    auto mc = meanCov(x);
    p.mean = std::move(mc.first);
    p.s = std::move(mc.second);
    EigenSym e = symmetricEigen(p.s);
    if (!(e.values.back() > 0.0))
        throw validation_error("sample covariance is singular (degenerate data)");
    p.lambda = std::move(e.values);
    p.beta = std::move(e.vectors);
    return p;
}

inline void requireDim(std::size_t have, std::size_t want, const char* what) {
    if (have != want)
        throw validation_error(std::string(what) + ": dimension mismatch");
}

inline TestReport chiSquareReport(const std::string& method, double stat, double alpha,
                                  std::size_t n, std::size_t k) {
    TestReport r;
    r.method = method;
    r.statistic = stat;
    r.reference = "chi-square(" + std::to_string(k - 1) + ")";
    r.pValue = 1.0 - chiSquareCdf(stat, double(k - 1));
    r.alpha = alpha;
    r.reject = r.pValue < alpha;
    r.n = n;
    r.k = k;
    return r;
}

inline TestReport lowerNormalReport(const std::string& method, double stat, double alpha,
                                    std::size_t n, std::size_t k) {
    TestReport r;
    r.method = method;
    r.statistic = stat;
    r.reference = "normal-lower";
    r.pValue = normalCdf(stat);
    r.alpha = alpha;
    r.reject = r.pValue < alpha;
    r.n = n;
    r.k = k;
    return r;
}

inline void pushSpectrum(TestReport& r, const char* name, const Vector& lambda) {
    for (std::size_t j = 0; j < lambda.size(); ++j)
        r.nuisance.emplace_back(name + std::string("_") + std::to_string(j + 1), lambda[j]);
}

inline void pushVector(TestReport& r, const char* name, const Vector& v) {
    for (std::size_t j = 0; j < v.size(); ++j)
        r.nuisance.emplace_back(name + std::string("_") + std::to_string(j + 1), v[j]);
}

// sum_{j>=2} (lambda_j - lambda_1)^2 / lambda_j^3 * (beta_j' S beta0)^2, scaled by n/lambda_1
inline double andersonStat(const CovPieces& c, const Vector& beta0, std::size_t n) {
    const std::size_t k = c.lambda.size();
    const Vector sb = c.s * beta0;
    double sum = 0.0;
    for (std::size_t j = 1; j < k; ++j) {
        const double gap = c.lambda[j] - c.lambda[0];
        const double proj = dot(c.beta.column(j), sb);
        sum += gap * gap / (c.lambda[j] * c.lambda[j] * c.lambda[j]) * proj * proj;
    }
    return double(n) / c.lambda[0] * sum;
}

// sum_{j>=2} (betaTilde_j' S beta0)^2 / lambda_j, scaled by n/lambda_1, with
// betaTilde the Gram-Schmidt frame pinned at beta0
inline double gaussianStat(const CovPieces& c, const Vector& beta0, std::size_t n) {
    const std::size_t k = c.lambda.size();
    const Matrix frame = constrainedEigvecs(c.beta, beta0);
    const Vector sb = c.s * beta0;
    double sum = 0.0;
    for (std::size_t j = 1; j < k; ++j) {
        const double proj = dot(frame.column(j), sb);
        sum += proj * proj / c.lambda[j];
    }
    return double(n) / c.lambda[0] * sum;
}

inline double eigvalNumerator(const Vector& lambda, double p, std::size_t q) {
    return dot(contrastC(lambda.size(), p, q), lambda);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// signed-rank building blocks

// Score values at the rank grid i/(n+1), i = 1..n.
inline Vector scoreTable(const ScoreSpec& k, std::size_t n) {
    Vector t(n);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = evalScore(k, double(i + 1) / double(n + 1));
    return t;
}

// S_K = n^{-1} sum K(R_i/(n+1)) U_i U_i'.
inline Matrix signedRankCov(const std::vector<Vector>& u, const std::vector<std::size_t>& r,
                            const Vector& table) {
    const std::size_t n = u.size(), k = u.empty() ? 0 : u[0].size();
    Matrix s(k, k);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = table[r[i] - 1];
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b) s(a, b) += w * u[i][a] * u[i][b];
    }
    s *= 1.0 / double(n);
    return s;
}

// Frame-free form of the eigenvector rank statistic:
// (n k(k+2)/J_K) * beta0' S_K (I - beta0 beta0') S_K beta0.
inline double qRankStatFromCov(const Matrix& sk, std::size_t n, double scoreNormJk,
                               const Vector& beta0) {
    const std::size_t k = beta0.size();
    const Vector sb = sk * beta0;
    const double along = dot(beta0, sb);
    const double stat = dot(sb, sb) - along * along;
    return double(n) * double(k) * (double(k) + 2.0) / scoreNormJk * stat;
}

// Eigenvalue rank statistic from a signed-rank covariance at frame beta and
// det-one spectrum lambda:
// (n k(k+2)/J_K)^{1/2} a_{p,q}(lambda)^{-1/2} c' dvec(L^{1/2} beta' S_K beta L^{1/2}).
inline double tRankStatFromCov(const Matrix& sk, std::size_t n, double scoreNormJk,
                               const Vector& lambda, const Matrix& beta, double p,
                               std::size_t q) {
    const std::size_t k = lambda.size();
    const Matrix inner = beta.transpose() * sk * beta;
    const Vector c = contrastC(k, p, q);
    double num = 0.0;
    for (std::size_t j = 0; j < k; ++j) num += c[j] * lambda[j] * inner(j, j);
    const double a = normalizerA(lambda, p, q);
    return std::sqrt(double(n) * double(k) * (double(k) + 2.0) / scoreNormJk) * num /
           std::sqrt(a);
}

// ---------------------------------------------------------------------------
// eigenvector tests

inline TestReport qAnderson(const Matrix& x, const EigvecHypothesis& h, double alpha = 0.05) {
    const std::size_t n = x.rows(), k = x.cols();
    detail::requireDim(h.beta0.size(), k, "qAnderson");
    if (n <= k) throw validation_error("qAnderson: need n > k");
    const detail::CovPieces c = detail::covPieces(x);
    TestReport r =
        detail::chiSquareReport("anderson", detail::andersonStat(c, h.beta0, n), alpha, n, k);
    detail::pushSpectrum(r, "lambda", c.lambda);
    return r;
}

inline TestReport qGaussian(const Matrix& x, const EigvecHypothesis& h, double alpha = 0.05) {
    const std::size_t n = x.rows(), k = x.cols();
    detail::requireDim(h.beta0.size(), k, "qGaussian");
    if (n <= k) throw validation_error("qGaussian: need n > k");
    const detail::CovPieces c = detail::covPieces(x);
    TestReport r =
        detail::chiSquareReport("gauss", detail::gaussianStat(c, h.beta0, n), alpha, n, k);
    detail::pushSpectrum(r, "lambda", c.lambda);
    return r;
}

enum class PseudoVariant { gaussian, tyler };

// Kurtosis-corrected eigenvector tests: the Gram-Schmidt statistic over
// (1 + kappaHat), or the spectral (Tyler) variant applied to the
// uncorrected statistic.
inline TestReport qPseudoGaussian(const Matrix& x, const EigvecHypothesis& h,
                                  double alpha = 0.05,
                                  PseudoVariant variant = PseudoVariant::gaussian) {
    const std::size_t n = x.rows(), k = x.cols();
    detail::requireDim(h.beta0.size(), k, "qPseudoGaussian");
    if (n <= k) throw validation_error("qPseudoGaussian: need n > k");
    const detail::CovPieces c = detail::covPieces(x);
    const double kappa = kurtosisHat(x);
    if (!(1.0 + kappa > 0.0))
        throw validation_error("qPseudoGaussian: degenerate kurtosis estimate");
    const double base = (variant == PseudoVariant::gaussian)
                            ? detail::gaussianStat(c, h.beta0, n)
                            : detail::andersonStat(c, h.beta0, n);
    TestReport r = detail::chiSquareReport(
        variant == PseudoVariant::gaussian ? "pseudo" : "tyler", base / (1.0 + kappa), alpha,
        n, k);
    detail::pushSpectrum(r, "lambda", c.lambda);
    r.nuisance.emplace_back("kappa_hat", kappa);
    return r;
}

// Signed-rank eigenvector test. Ranks and signs are taken at the HR median
// and the Tyler shape re-assembled with the Gram-Schmidt frame pinned at
// beta0. Both algebraic forms of the statistic are evaluated; a material
// discrepancy aborts.
inline TestReport qRank(const Matrix& x, const EigvecHypothesis& h, const ScoreSpec& score,
                        double alpha = 0.05) {
    const std::size_t n = x.rows(), k = x.cols();
    detail::requireDim(h.beta0.size(), k, "qRank");
    detail::requireDim(score.k, k, "qRank score");
    const ShapeEstimate est = shapeAtHrTyler(x);
    const Matrix frame = constrainedEigvecs(est.beta, h.beta0);
    const Matrix v0 = frame * Matrix::diag(est.lambda) * frame.transpose();
    const SignsRanks sr = signsRanks(x, est.theta, v0);
    const Vector table = scoreTable(score, n);
    const Matrix sk = signedRankCov(sr.U, sr.R, table);
    const double jk = scoreNorm(score);

    const double formA = qRankStatFromCov(sk, n, jk, h.beta0);
    const Vector sb = sk * h.beta0;
    double sum = 0.0;
    for (std::size_t j = 1; j < k; ++j) {
        const double proj = dot(frame.column(j), sb);
        sum += proj * proj;
    }
    const double formB = double(n) * double(k) * (double(k) + 2.0) / jk * sum;
    if (std::abs(formA - formB) > 1e-6 * std::max(1.0, std::abs(formA)))
        throw numeric_error("qRank: internal consistency failure, the two forms differ by " +
                            std::to_string(formA - formB));

    TestReport r = detail::chiSquareReport("rank:" + score.label, formA, alpha, n, k);
    detail::pushVector(r, "theta", est.theta);
    detail::pushSpectrum(r, "lambda", est.lambda);
    if (sr.ties) r.warnings.push_back("tied distances broken by observation index");
    return r;
}

// Oracle eigenvector rank statistic at the true location and shape.
inline double qRankOracle(const Matrix& x, const EigvecHypothesis& h, const ScoreSpec& score,
                          const Vector& theta, const Matrix& v) {
    const std::size_t n = x.rows(), k = x.cols();
    detail::requireDim(h.beta0.size(), k, "qRankOracle");
    const SignsRanks sr = signsRanks(x, theta, v);
    const Matrix sk = signedRankCov(sr.U, sr.R, scoreTable(score, n));
    return qRankStatFromCov(sk, n, scoreNorm(score), h.beta0);
}

// Locally optimal parametric statistic at the true parameters, for a given
// standardized radial density f1.
inline double qParametricOracle(const Matrix& x, const EllipticalParams& vt,
                                const RadialFamily& f1, const EigvecHypothesis& h) {
    const std::size_t n = x.rows(), k = x.cols();
    detail::requireDim(h.beta0.size(), k, "qParametricOracle");
    detail::requireDim(vt.lambda.size(), k, "qParametricOracle");
    if (std::abs(std::abs(dot(vt.beta.column(0), h.beta0)) - 1.0) > 1e-8)
        throw validation_error(
            "qParametricOracle: beta0 is not the leading eigenvector of the supplied shape");
    const Matrix v = vt.beta * Matrix::diag(vt.lambda) * vt.beta.transpose();
    const SignsRanks sr = signsRanks(x, vt.theta, v);
    const double sigma = std::sqrt(vt.sigma2);

    Matrix s(k, k);
    for (std::size_t i = 0; i < n; ++i) {
        if (sr.d[i] == 0.0) continue;  // zero sign contributes nothing
        const double t = sr.d[i] / sigma;
        const double w = optimalScorePhi(f1, t) * t;
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b) s(a, b) += w * sr.U[i][a] * sr.U[i][b];
    }
    s *= 1.0 / double(n);

    const double jk = densitySummary(f1).Jk;
    const Vector sb = s * h.beta0;
    double sum = 0.0;
    for (std::size_t j = 1; j < k; ++j) {
        const double proj = dot(vt.beta.column(j), sb);
        sum += proj * proj;
    }
    return double(n) * double(k) * (double(k) + 2.0) / jk * sum;
}

// ---------------------------------------------------------------------------
// eigenvalue tests

inline TestReport tAnderson(const Matrix& x, const EigvalHypothesis& h, double alpha = 0.05) {
    const std::size_t n = x.rows(), k = x.cols();
    if (n <= k) throw validation_error("tAnderson: need n > k");
    if (h.q >= k) throw validation_error("tAnderson: q must be < k");
    const detail::CovPieces c = detail::covPieces(x);
    const double stat = std::sqrt(double(n)) * detail::eigvalNumerator(c.lambda, h.p, h.q) /
                        std::sqrt(normalizerA(c.lambda, h.p, h.q));
    TestReport r = detail::lowerNormalReport("anderson", stat, alpha, n, k);
    detail::pushSpectrum(r, "lambda", c.lambda);
    return r;
}

inline TestReport tDavis(const Matrix& x, const EigvalHypothesis& h, double alpha = 0.05) {
    const std::size_t n = x.rows(), k = x.cols();
    if (n <= k) throw validation_error("tDavis: need n > k");
    if (h.q >= k) throw validation_error("tDavis: q must be < k");
    const detail::CovPieces c = detail::covPieces(x);
    const double kappa = kurtosisHat(x);
    if (!(1.0 + kappa > 0.0)) throw validation_error("tDavis: degenerate kurtosis estimate");
    const double stat = std::sqrt(double(n)) * detail::eigvalNumerator(c.lambda, h.p, h.q) /
                        (std::sqrt(normalizerA(c.lambda, h.p, h.q)) * std::sqrt(1.0 + kappa));
    TestReport r = detail::lowerNormalReport("davis", stat, alpha, n, k);
    detail::pushSpectrum(r, "lambda", c.lambda);
    r.nuisance.emplace_back("kappa_hat", kappa);
    return r;
}

// Signed-rank eigenvalue test. Ranks and signs are taken at the HR median
// and the Tyler shape re-assembled with the constrained (null-projected)
// eigenvalues. Decision against the asymptotic normal quantile or a
// caller-supplied simulated critical value. When the null projection leaves
// the positive cone the constrained shape does not exist: such a sample is
// maximally incompatible with the null and the test rejects (statistic -inf).
inline TestReport tRank(const Matrix& x, const EigvalHypothesis& h, const ScoreSpec& score,
                        double alpha = 0.05, CvMode cvMode = CvMode::asymptotic,
                        double simulatedCv = std::numeric_limits<double>::quiet_NaN()) {
    const std::size_t n = x.rows(), k = x.cols();
    detail::requireDim(score.k, k, "tRank score");
    if (h.q >= k) throw validation_error("tRank: q must be < k");
    const ShapeEstimate est = shapeAtHrTyler(x);
    if (!constrainedEigvalsFeasible(est.lambda, h.p, h.q)) {
        TestReport r = detail::lowerNormalReport(
            "rank:" + score.label, -std::numeric_limits<double>::infinity(), alpha, n, k);
        detail::pushVector(r, "theta", est.theta);
        detail::pushSpectrum(r, "lambda", est.lambda);
        if (cvMode == CvMode::simulated) {
            if (!std::isfinite(simulatedCv))
                throw validation_error("tRank: simulated critical-value mode needs a finite cv");
            r.reject = true;
            r.nuisance.emplace_back("critical_value", simulatedCv);
            r.nuisanceText.emplace_back("cv_mode", "simulated");
        } else {
            r.nuisanceText.emplace_back("cv_mode", "asymptotic");
        }
        r.warnings.push_back("null projection infeasible, rejecting by convention");
        return r;
    }
    const Vector lambdaTilde = constrainedEigvals(est.lambda, h.p, h.q);
    const Matrix v0 = est.beta * Matrix::diag(lambdaTilde) * est.beta.transpose();
    const SignsRanks sr = signsRanks(x, est.theta, v0);
    const Matrix sk = signedRankCov(sr.U, sr.R, scoreTable(score, n));
    const double stat =
        tRankStatFromCov(sk, n, scoreNorm(score), lambdaTilde, est.beta, h.p, h.q);

    TestReport r = detail::lowerNormalReport("rank:" + score.label, stat, alpha, n, k);
    detail::pushVector(r, "theta", est.theta);
    detail::pushSpectrum(r, "lambda_constrained", lambdaTilde);
    if (cvMode == CvMode::simulated) {
        if (!std::isfinite(simulatedCv))
            throw validation_error("tRank: simulated critical-value mode needs a finite cv");
        r.reject = stat < simulatedCv;
        r.nuisance.emplace_back("critical_value", simulatedCv);
        r.nuisanceText.emplace_back("cv_mode", "simulated");
    } else {
        r.nuisanceText.emplace_back("cv_mode", "asymptotic");
        if (n < 250)
            r.warnings.push_back(
                "asymptotic critical value with n < 250 tends to overreject; consider a "
                "simulated critical value");
    }
    if (sr.ties) r.warnings.push_back("tied distances broken by observation index");
    return r;
}

// Oracle eigenvalue rank statistic at the true parameters.
inline double tRankOracle(const Matrix& x, const EigvalHypothesis& h, const ScoreSpec& score,
                          const EllipticalParams& vt) {
    const std::size_t n = x.rows(), k = x.cols();
    detail::requireDim(vt.lambda.size(), k, "tRankOracle");
    const Matrix v = vt.beta * Matrix::diag(vt.lambda) * vt.beta.transpose();
    const SignsRanks sr = signsRanks(x, vt.theta, v);
    const Matrix sk = signedRankCov(sr.U, sr.R, scoreTable(score, n));
    return tRankStatFromCov(sk, n, scoreNorm(score), vt.lambda, vt.beta, h.p, h.q);
}

// Locally optimal parametric eigenvalue statistic at the true parameters.
inline double tParametricOracle(const Matrix& x, const EllipticalParams& vt,
                                const RadialFamily& f1, const EigvalHypothesis& h) {
    const std::size_t n = x.rows(), k = x.cols();
    detail::requireDim(vt.lambda.size(), k, "tParametricOracle");
    if (h.q >= k) throw validation_error("tParametricOracle: q must be < k");
    const double nullResidual = detail::eigvalNumerator(vt.lambda, h.p, h.q);
    if (std::abs(nullResidual) > 1e-10)
        throw validation_error(
            "tParametricOracle: supplied spectrum violates the null constraint, residual " +
            std::to_string(nullResidual));

    const Matrix v = vt.beta * Matrix::diag(vt.lambda) * vt.beta.transpose();
    const SignsRanks sr = signsRanks(x, vt.theta, v);
    const double sigma = std::sqrt(vt.sigma2);
    Matrix s(k, k);
    for (std::size_t i = 0; i < n; ++i) {
        if (sr.d[i] == 0.0) continue;  // zero sign contributes nothing
        const double t = sr.d[i] / sigma;
        const double w = optimalScorePhi(f1, t) * t;
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b) s(a, b) += w * sr.U[i][a] * sr.U[i][b];
    }
    s *= 1.0 / double(n);

    const double jk = densitySummary(f1).Jk;
    const Matrix inner = vt.beta.transpose() * s * vt.beta;
    const Vector c = contrastC(k, h.p, h.q);
    double num = 0.0;
    for (std::size_t j = 0; j < k; ++j) num += c[j] * vt.lambda[j] * inner(j, j);
    return std::sqrt(double(n) * double(k) * (double(k) + 2.0) / jk) * num /
           std::sqrt(normalizerA(vt.lambda, h.p, h.q));
}

// ---------------------------------------------------------------------------
// noncentralities and local powers

// r_beta = 4 sum_{j>=2} nu_{1j}^{-1} (beta_j' b1)^2 for a local perturbation
// b1 of the leading eigenvector.
inline double noncentralityEigvec(const Vector& lambda, const Matrix& beta, const Vector& b1) {
    const std::size_t k = lambda.size();
    detail::requireDim(b1.size(), k, "noncentralityEigvec");
    const EigvecOperators ops = eigvecOperators(beta, lambda);  // enforces strict ordering
    double sum = 0.0;
    for (std::size_t j = 1; j < k; ++j) {
        const double proj = dot(beta.column(j), b1);
        sum += proj * proj / ops.nu(0, j);
    }
    return 4.0 * sum;
}

// r_lambda = (1-p) sum_{j>q} l_j - p sum_{j<=q} l_j for a diagonal spectrum
// perturbation l with tr(Lambda^{-1} l) = 0.
inline double noncentralityEigval(const Vector& lambda, const Vector& l, double p,
                                  std::size_t q) {
    const std::size_t k = lambda.size();
    detail::requireDim(l.size(), k, "noncentralityEigval");
    double tr = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        tr += l[j] / lambda[j];
        scale = std::max(scale, std::abs(l[j] / lambda[j]));
    }
    if (std::abs(tr) > 1e-10 * std::max(1.0, scale))
        throw validation_error(
            "noncentralityEigval: perturbation violates tr(Lambda^{-1} l) = 0, residual " +
            std::to_string(tr));
    return dot(contrastC(k, p, q), l);
}

enum class PowerMethod { pseudoGaussian, rank };

// Local power of the eigenvector tests against a perturbation b1 of the
// leading eigenvector, under radial density g1.
inline double localPowerEigvec(PowerMethod method, const ScoreSpec* score,
                               const RadialFamily& g1, const Vector& lambda,
                               const Matrix& beta, const Vector& b1, double alpha) {
    const std::size_t k = lambda.size();
    const double rb = noncentralityEigvec(lambda, beta, b1);
    double delta;
    if (method == PowerMethod::pseudoGaussian) {
        const double kappa = densitySummary(g1).kappa;
        delta = rb / (4.0 * (1.0 + kappa));
    } else {
        if (score == nullptr) throw validation_error("localPowerEigvec: rank method needs a score");
        const double j = crossInfo(*score, g1);
        delta = j * j / (4.0 * double(k) * (double(k) + 2.0) * scoreNorm(*score)) * rb;
    }
    const double cv = chiSquareQuantile(1.0 - alpha, double(k - 1));
    return 1.0 - noncentralChiSquareCdf(cv, double(k - 1), delta);
}

// Local power of the eigenvalue tests against a spectrum perturbation l
// (tr(Lambda^{-1} l) = 0), under radial density g1.
inline double localPowerEigval(PowerMethod method, const ScoreSpec* score,
                               const RadialFamily& g1, const Vector& lambda, const Vector& l,
                               double p, std::size_t q, double alpha) {
    const std::size_t k = lambda.size();
    const double rl = noncentralityEigval(lambda, l, p, q);
    const double a = normalizerA(lambda, p, q);
    double shift;
    if (method == PowerMethod::pseudoGaussian) {
        const double kappa = densitySummary(g1).kappa;
        shift = rl / std::sqrt(4.0 * a * (1.0 + kappa));
    } else {
        if (score == nullptr) throw validation_error("localPowerEigval: rank method needs a score");
        shift = crossInfo(*score, g1) * rl /
                std::sqrt(4.0 * double(k) * (double(k) + 2.0) * a * scoreNorm(*score));
    }
    return normalCdf(normalQuantile(alpha) - shift);
}

}  // namespace pcatest
