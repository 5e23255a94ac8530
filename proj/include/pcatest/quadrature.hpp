#pragma once

// Adaptive Gauss-Legendre integration on (0,1), tuned for score integrands:
// smooth inside the interval but possibly unbounded (logarithmically or like
// a small negative power) at the endpoints. The unit interval is pre-split
// into geometric panels accumulating toward both endpoints, then each panel
// is refined by bisection until the 15-point rule stabilizes.

#include <cmath>
#include <cstddef>
#include <vector>

#include "pcatest/errors.hpp"

namespace pcatest {

namespace detail {

// 15-point Gauss-Legendre nodes/weights on [-1,1] (positive half; symmetric).
constexpr double kGl15Node[8] = {
    0.0,
    0.20119409399743452,
    0.39415134707756337,
    0.57097217260853885,
    0.72441773136017005,
    0.84820658341042722,
    0.93727339240070590,
    0.98799251802048543,
};
constexpr double kGl15Weight[8] = {
    0.20257824192556127,
    0.19843148532711158,
    0.18616100001556221,
    0.16626920581699393,
    0.13957067792615431,
    0.10715922046717194,
    0.070366047488108125,
    0.030753241996117268,
};

template <typename F>
double gl15(const F& f, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = kGl15Weight[0] * f(mid);
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kGl15Node[i];
        sum += kGl15Weight[i] * (f(mid + dx) + f(mid - dx));
    }
    return sum * half;
}

template <typename F>
double adaptive(const F& f, double a, double b, double whole, double tol, int depth) {
    const double mid = 0.5 * (a + b);
    const double left = gl15(f, a, mid), right = gl15(f, mid, b);
    const double delta = left + right - whole;
    if (std::abs(delta) <= tol || (b - a) < 1e-15) return left + right;
    if (depth >= 30)
        throw numeric_error("integrate01: refinement stalled (integrand may diverge)");
    return adaptive(f, a, mid, left, 0.5 * tol, depth + 1) +
           adaptive(f, mid, b, right, 0.5 * tol, depth + 1);
}

}  // namespace detail

// Integrates f over (0,1) to a target relative error (default 1e-8).
template <typename F>
double integrate01(const F& f, double relTol = 1e-8) {
    // breakpoints 2^-m (m = 120..1) then 1-2^-m (m = 2..53). The lower
    // sliver [0, 2^-120] lets power singularities as strong as u^-0.8 lose
    // under 1e-7 of their mass. The upper ladder stops at 1-2^-53, the last
    // double below one of that form: score integrands grow at most like
    // powers of log(1/(1-u)) there, so the unreachable sliver carries under
    // 1e-12 of their mass; integrands with power singularities at u = 1 must
    // be transformed by the caller (no u-space rule can see past 1-2^-53)
    constexpr int kLowDepth = 120, kHighDepth = 53;
    std::vector<double> breaks;
    breaks.reserve(kLowDepth + kHighDepth);
    for (int m = kLowDepth; m >= 1; --m) breaks.push_back(std::ldexp(1.0, -m));
    for (int m = 2; m <= kHighDepth; ++m) breaks.push_back(1.0 - std::ldexp(1.0, -m));

    const std::size_t panels = breaks.size() - 1;
    double rough = 0.0;
    std::vector<double> estimates(panels);
    for (std::size_t i = 0; i < panels; ++i) {
        estimates[i] = detail::gl15(f, breaks[i], breaks[i + 1]);
        rough += std::abs(estimates[i]);
    }
    const double tol = relTol * (rough > 0.0 ? rough : 1.0) / double(panels);

    double total = 0.0;
    for (std::size_t i = 0; i < panels; ++i)
        total += detail::adaptive(f, breaks[i], breaks[i + 1], estimates[i], tol, 0);
    return total;
}

}  // namespace pcatest
