#pragma once

// Special functions and quantile solvers for the distributions the tests
// rely on: chi-square, Fisher F, Gamma, normal, noncentral chi-square, and
// the Kolmogorov asymptotic tail. Incomplete gamma/beta follow the classic
// series/continued-fraction split (Lentz's method); quantiles are solved by
// bracketing plus safeguarded Newton.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>

#include "pcatest/errors.hpp"

namespace pcatest {

// Lanczos approximation (g = 7, 9 terms); avoids lgamma's signgam global so
// concurrent callers need no synchronization.
inline double logGamma(double x) {
    static const double coef[9] = {
        0.99999999999980993,  676.5203681218851,    -1259.1392167224028,
        771.32342877765313,   -176.61502916214059,  12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    if (!(x > 0.0)) throw validation_error("logGamma: argument must be positive");
    if (x < 0.5) {
        // reflection keeps the approximation in its accurate range
        return std::log(M_PI / std::sin(M_PI * x)) - logGamma(1.0 - x);
    }
    const double z = x - 1.0;
    double s = coef[0];
    for (int i = 1; i < 9; ++i) s += coef[i] / (z + i);
    const double t = z + 7.5;
    return 0.5 * std::log(2.0 * M_PI) + (z + 0.5) * std::log(t) - t + std::log(s);
}

namespace detail {

// Lower series for P(a, x); full relative accuracy for x < a + 1.
inline double gammaPSeries(double a, double x) {
    const double lnPre = a * std::log(x) - x - logGamma(a);
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return std::exp(lnPre) * sum;
}

// Continued fraction for Q(a, x) (modified Lentz); full relative accuracy
// for x >= a + 1.
inline double gammaQCf(double a, double x) {
    const double lnPre = a * std::log(x) - x - logGamma(a);
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(lnPre) * h;
}

}  // namespace detail

// Regularized lower incomplete gamma P(a, x).
inline double gammaP(double a, double x) {
    if (!(a > 0.0)) throw validation_error("gammaP: shape must be positive");
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) return detail::gammaPSeries(a, x);
    return 1.0 - detail::gammaQCf(a, x);
}

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed without
// cancellation in the far upper tail.
inline double gammaQ(double a, double x) {
    if (!(a > 0.0)) throw validation_error("gammaQ: shape must be positive");
    if (x <= 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gammaPSeries(a, x);
    return detail::gammaQCf(a, x);
}

namespace detail {

inline double betaCf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double betaInc(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw validation_error("betaInc: shapes must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lnPre =
        logGamma(a + b) - logGamma(a) - logGamma(b) + a * std::log(x) + b * std::log1p(-x);
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(lnPre) * detail::betaCf(a, b, x) / a;
    return 1.0 - std::exp(lnPre) * detail::betaCf(b, a, 1.0 - x) / b;
}

inline double chiSquareCdf(double x, double df) { return gammaP(0.5 * df, 0.5 * x); }

inline double gammaCdf(double x, double shape) { return gammaP(shape, x); }

inline double fisherFCdf(double x, double d1, double d2) {
    if (x <= 0.0) return 0.0;
    return betaInc(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2));
}

inline double normalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double normalPdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

namespace detail {

// Two-region rational approximation to the standard normal quantile,
// absolute error ~1e-9. Used only to seed Newton solves, never returned.
inline double invNormalSeed(double u) {
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double low = 0.02425;
    if (u < low) {
        const double q = std::sqrt(-2.0 * std::log(u));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (u > 1.0 - low) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - u));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = u - 0.5, r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Wilson-Hilferty cube-root seed for the chi-square quantile; falls back to
// inverting the leading series term P(a, y) ~ y^a / Gamma(a+1) deep in the
// lower tail where the cube of the normal seed would go nonpositive.
inline double chiSquareSeed(double u, double df) {
    const double s = 2.0 / (9.0 * df);
    const double t = 1.0 - s + invNormalSeed(u) * std::sqrt(s);
    if (t > 0.05) return df * t * t * t;
    const double a = 0.5 * df;
    return 2.0 * std::exp((std::log(u) + logGamma(a + 1.0)) / a);
}

// Bracketing + safeguarded Newton on a monotone increasing function.
// Converges when |fn(x) - u| <= 1e-12 * scale (or the bracket collapses to
// roundoff); `scale` should be the natural size of the target, e.g. the tail
// probability being inverted, so the stop is relative, not absolute. When the
// bracket spans many octaves of a positive axis the bisection fallback splits
// geometrically, which reaches far-tail quantiles in O(log log-range) steps.
// A finite `start` inside the bracket replaces the midpoint as first iterate.
inline double solveQuantile(const std::function<double(double)>& cdf,
                            const std::function<double(double)>& pdf, double u, double lo,
                            double hi, const char* who,
                            double start = std::numeric_limits<double>::quiet_NaN(),
                            double scale = 1.0) {
    double flo = cdf(lo) - u, fhi = cdf(hi) - u;
    for (int i = 0; i < 400 && flo > 0.0; ++i) {
        hi = lo;
        fhi = flo;
        lo = (lo > 0.0) ? lo * 0.5 : ((lo > -1.0) ? lo - 1.0 : lo * 2.0);
        if (!(lo > -std::numeric_limits<double>::max() / 4.0))
            throw numeric_error(std::string(who) + ": bracketing ran away (low side)");
        flo = cdf(lo) - u;
    }
    for (int i = 0; i < 400 && fhi < 0.0; ++i) {
        lo = hi;
        flo = fhi;
        hi = (hi < 0.0) ? hi * 0.5 : ((hi < 1.0) ? hi + 1.0 : hi * 2.0);
        if (!(hi < std::numeric_limits<double>::max() / 4.0))
            throw numeric_error(std::string(who) + ": bracketing ran away");
        fhi = cdf(hi) - u;
    }
    if (flo > 0.0 || fhi < 0.0)
        throw numeric_error(std::string(who) + ": failed to bracket the quantile");

    auto midpoint = [](double l, double h) {
        if (l > 0.0 && h > 4.0 * l) return std::sqrt(l) * std::sqrt(h);
        return 0.5 * (l + h);
    };
    const double tol = 1e-12 * scale;
    double x = (std::isfinite(start) && start >= lo && start <= hi) ? start : midpoint(lo, hi);
    for (int it = 0; it < 200; ++it) {
        const double f = cdf(x) - u;
        if (std::abs(f) <= tol) return x;
        if (f > 0.0)
            hi = x;
        else
            lo = x;
        const double slope = pdf(x);
        double next = (slope > 0.0) ? x - f / slope : lo - 1.0;
        if (!(next > lo && next < hi)) next = midpoint(lo, hi);
        if (hi - lo <= 1e-15 * (std::abs(lo) + std::abs(hi)) + 1e-300) return midpoint(lo, hi);
        x = next;
    }
    throw numeric_error(std::string(who) + ": quantile solver did not converge, residual " +
                        std::to_string(cdf(x) - u));
}

// Beta(a, b) quantile for targets u <= 1/2 (callers mirror the upper half).
// Series tail bounds bracket the quantile tightly even at extreme u.
inline double betaLowerQuantile(double a, double b, double u, const char* who) {
    const double lnB = logGamma(a) + logGamma(b) - logGamma(a + b);
    auto cdf = [a, b](double x) { return betaInc(a, b, x); };
    auto pdf = [a, b, lnB](double x) {
        if (x <= 0.0 || x >= 1.0) return 0.0;
        return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lnB);
    };
    // I_x(a,b) >= 1 - (1-x)^b / (b B(a,b)) for a >= 1, giving an upper bracket
    double hi = 1.0 - 1e-12;
    if (a >= 1.0) {
        const double t = 1.0 - std::exp((std::log1p(-u) + std::log(b) + lnB) / b);
        if (t > 0.0 && t < 1.0) hi = t;
    }
    // I_x(a,b) <= x^a (1-x)^(min(b,1)-1) / (a B(a,b)), giving a lower bracket;
    // for b < 1 the (1-x) factor is bounded using the upper bracket
    double lo = std::exp((std::log(u) + std::log(a) + lnB) / a);
    if (b < 1.0) lo *= std::exp(std::log1p(-hi) * (1.0 - b) / a);
    if (!(lo > 0.0 && lo < hi)) lo = 0.0;
    double start = (u < 0.05 && lo > 0.0) ? lo : a / (a + b);
    if (!(start >= lo && start <= hi)) start = 0.5 * (lo + hi);
    return solveQuantile(cdf, pdf, u, lo, hi, who, start, u);
}

inline void requireOpenUnit(double u, const char* who) {
    if (!(u > 0.0 && u < 1.0))
        throw validation_error(std::string(who) + ": probability must lie in (0,1)");
}

}  // namespace detail

inline double chiSquareQuantile(double u, double df) {
    detail::requireOpenUnit(u, "chiSquareQuantile");
    const double halfDf = 0.5 * df;
    auto pdf = [halfDf](double x) {
        if (x <= 0.0) return 0.0;
        return std::exp((halfDf - 1.0) * std::log(x) - 0.5 * x - halfDf * std::log(2.0) -
                        logGamma(halfDf));
    };
    const double seed = detail::chiSquareSeed(u, df);
    const double hi = std::max(df + 1.0, 2.0 * seed);
    if (u <= 0.5) {
        auto cdf = [halfDf](double x) { return gammaP(halfDf, 0.5 * x); };
        // P(a, x/2) <= (x/2)^a / Gamma(a+1), so this is always a valid lower
        // bracket, and a tight one in the lower tail
        const double lo = 2.0 * std::exp((std::log(u) + logGamma(halfDf + 1.0)) / halfDf);
        return detail::solveQuantile(cdf, pdf, u, lo, hi, "chiSquareQuantile", seed, u);
    }
    // upper half: invert the survival function directly so the residual keeps
    // full relative accuracy however close u is to one (1 - u is exact here)
    const double s = 1.0 - u;
    auto negSurvival = [halfDf](double x) { return -gammaQ(halfDf, 0.5 * x); };
    return detail::solveQuantile(negSurvival, pdf, -s, 0.0, hi, "chiSquareQuantile", seed, s);
}

inline double gammaQuantile(double u, double shape) {
    detail::requireOpenUnit(u, "gammaQuantile");
    auto pdf = [shape](double x) {
        if (x <= 0.0) return 0.0;
        return std::exp((shape - 1.0) * std::log(x) - x - logGamma(shape));
    };
    const double seed = 0.5 * detail::chiSquareSeed(u, 2.0 * shape);
    const double hi = std::max(shape + 1.0, 2.0 * seed);
    if (u <= 0.5) {
        auto cdf = [shape](double x) { return gammaP(shape, x); };
        // same series bound as the chi-square case, on the Gamma(shape, 1) scale
        const double lo = std::exp((std::log(u) + logGamma(shape + 1.0)) / shape);
        return detail::solveQuantile(cdf, pdf, u, lo, hi, "gammaQuantile", seed, u);
    }
    const double s = 1.0 - u;
    auto negSurvival = [shape](double x) { return -gammaQ(shape, x); };
    return detail::solveQuantile(negSurvival, pdf, -s, 0.0, hi, "gammaQuantile", seed, s);
}

inline double fisherFQuantile(double u, double d1, double d2) {
    detail::requireOpenUnit(u, "fisherFQuantile");
    // solve the matching beta quantile, then transform; better conditioned
    // than the unbounded F scale. The upper half mirrors to the lower tail of
    // the swapped-shape beta, so both tails enjoy tight series brackets and a
    // cancellation-free residual.
    const double a = 0.5 * d1, b = 0.5 * d2;
    if (u <= 0.5) {
        const double z = detail::betaLowerQuantile(a, b, u, "fisherFQuantile");
        return d2 * z / (d1 * (1.0 - z));
    }
    const double w = detail::betaLowerQuantile(b, a, 1.0 - u, "fisherFQuantile");
    return d2 * (1.0 - w) / (d1 * w);
}

inline double normalQuantile(double u) {
    detail::requireOpenUnit(u, "normalQuantile");
    if (u > 0.5) return -normalQuantile(1.0 - u);
    // for u <= 1/2 the erfc argument is nonnegative, so the CDF keeps full
    // relative accuracy arbitrarily deep into this tail
    const double seed = detail::invNormalSeed(u);
    return detail::solveQuantile([](double x) { return normalCdf(x); },
                                 [](double x) { return normalPdf(x); }, u, seed - 0.5,
                                 seed + 0.5, "normalQuantile", seed, u);
}

// Poisson-mixture series, summed outward from the modal index.
inline double noncentralChiSquareCdf(double x, double df, double delta) {
    if (!(df > 0.0)) throw validation_error("noncentralChiSquareCdf: df must be positive");
    if (delta < 0.0) throw validation_error("noncentralChiSquareCdf: noncentrality must be >= 0");
    if (x <= 0.0) return 0.0;
    if (delta == 0.0) return chiSquareCdf(x, df);

    const double half = 0.5 * delta;
    const long j0 = long(half);
    auto logW = [half](long j) { return -half + j * std::log(half) - logGamma(double(j) + 1.0); };

    double sum = std::exp(logW(j0)) * chiSquareCdf(x, df + 2.0 * j0);
    // upward
    for (long j = j0 + 1; j < j0 + 10000; ++j) {
        const double term = std::exp(logW(j)) * chiSquareCdf(x, df + 2.0 * j);
        sum += term;
        if (term < 1e-16 * sum && j > j0 + 2) break;
    }
    // downward
    for (long j = j0 - 1; j >= 0; --j) {
        const double term = std::exp(logW(j)) * chiSquareCdf(x, df + 2.0 * j);
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return std::min(sum, 1.0);
}

// Tagged reference distribution, so callers can pass "which law" as a value
// (test reports, config files) instead of binding a quantile function.
struct DistSpec {
    enum class Kind { chiSquare, fisherF, gammaShape } kind;
    double a = 0.0;  // df / numerator df / shape
    double b = 0.0;  // denominator df (fisherF only)
};

inline DistSpec chiSquareDist(double df) {
    if (!(df > 0.0)) throw validation_error("chiSquareDist: df must be positive");
    return {DistSpec::Kind::chiSquare, df, 0.0};
}

inline DistSpec fisherFDist(double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0))
        throw validation_error("fisherFDist: degrees of freedom must be positive");
    return {DistSpec::Kind::fisherF, d1, d2};
}

inline DistSpec gammaShapeDist(double shape) {
    if (!(shape > 0.0)) throw validation_error("gammaShapeDist: shape must be positive");
    return {DistSpec::Kind::gammaShape, shape, 0.0};
}

inline double distCdf(const DistSpec& dist, double x) {
    switch (dist.kind) {
        case DistSpec::Kind::chiSquare: return chiSquareCdf(x, dist.a);
        case DistSpec::Kind::fisherF: return fisherFCdf(x, dist.a, dist.b);
        case DistSpec::Kind::gammaShape: return gammaCdf(x, dist.a);
    }
    throw validation_error("distCdf: unknown distribution tag");
}

inline double distQuantile(const DistSpec& dist, double u) {
    switch (dist.kind) {
        case DistSpec::Kind::chiSquare: return chiSquareQuantile(u, dist.a);
        case DistSpec::Kind::fisherF: return fisherFQuantile(u, dist.a, dist.b);
        case DistSpec::Kind::gammaShape: return gammaQuantile(u, dist.a);
    }
    throw validation_error("distQuantile: unknown distribution tag");
}

// Kolmogorov asymptotic survival Q(x) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 x^2).
inline double kolmogorovSurvival(double x) {
    if (x <= 0.0) return 1.0;
    double sum = 0.0, sign = 1.0;
    for (int j = 1; j <= 200; ++j) {
        const double term = std::exp(-2.0 * double(j) * double(j) * x * x);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    const double q = 2.0 * sum;
    return std::min(1.0, std::max(0.0, q));
}

}  // namespace pcatest
