#pragma once

// Nuisance-parameter estimators: sample mean/covariance, Tyler's shape
// M-estimator, the Hettmansperger-Randles affine-equivariant median, the
// empirical scale (median of squared distances), an empirical kurtosis, the
// constrained eigenvector/eigenvalue estimators, and extraction of
// multivariate signs, distances and ranks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "pcatest/errors.hpp"
#include "pcatest/matrix.hpp"
#include "pcatest/operators.hpp"

namespace pcatest {

struct SignsRanks {
    std::vector<Vector> U;       // unit signs
    Vector d;                    // distances
    std::vector<std::size_t> R;  // ranks 1..n, ties broken by observation index
    bool ties = false;
};

struct ShapeEstimate {
    Vector theta;
    Matrix V;       // det 1
    Vector lambda;  // descending, product 1
    Matrix beta;    // orthonormal, det +1
    double sigma2 = 0.0;
};

inline Vector rowOf(const Matrix& x, std::size_t i) {
    Vector r(x.cols());
    for (std::size_t j = 0; j < x.cols(); ++j) r[j] = x(i, j);
    return r;
}

// Sample mean and covariance with divisor n.
inline std::pair<Vector, Matrix> meanCov(const Matrix& x) {
    const std::size_t n = x.rows(), k = x.cols();
    if (n < 2) throw validation_error("meanCov: need at least two observations");
    Vector mean(k, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) mean[j] += x(i, j);
    for (double& m : mean) m /= double(n);
    Matrix s(k, k);
    for (std::size_t i = 0; i < n; ++i) {
        Vector c = rowOf(x, i) - mean;
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b) s(a, b) += c[a] * c[b];
    }
    s *= 1.0 / double(n);
    return {mean, s};
}

namespace detail {

// One Tyler fixed-point map evaluation: A = (k/m) sum Z Z'/|Z|^2 at
// Z = V^{-1/2}(X_i - theta), summed over the m observations distinct from
// theta. A row exactly at theta has no direction and is skipped; this happens
// when the location estimate lands on an observation. Returns A and the
// residual ||A - I||_max.
inline std::pair<Matrix, double> tylerStep(const Matrix& x, const Vector& theta,
                                           const Matrix& vInvHalf) {
    const std::size_t n = x.rows(), k = x.cols();
    Matrix a(k, k);
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vector z = vInvHalf * (rowOf(x, i) - theta);
        const double n2 = dot(z, z);
        if (n2 == 0.0) continue;
        ++used;
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < k; ++c) a(r, c) += z[r] * z[c] / n2;
    }
    if (used <= k * (k - 1))
        throw validation_error("tylerShape: too few observations distinct from the location");
    a *= double(k) / double(used);
    Matrix res = a;
    res -= Matrix::identity(k);
    return {a, res.maxAbs()};
}

inline void detNormalize(Matrix& v) {
    const double det = determinant(v);
    if (!(det > 0.0)) throw numeric_error("tylerShape: iterate lost positive definiteness");
    v *= std::pow(det, -1.0 / double(v.rows()));
}

// Resultant of the unit signs about observation j in the V^{-1/2} metric.
// Rows within tol of observation j count as duplicates of it instead.
struct SignResultant {
    Vector r;                // sum of unit signs of the other observations
    double rNorm = 0.0;      // its norm
    double wSum = 0.0;       // sum of inverse distances of the others
    std::size_t mult = 1;    // observation j plus its duplicates
};

inline SignResultant signResultant(const Matrix& x, std::size_t j,
                                   const Matrix& vInvHalf, double tol) {
    const std::size_t n = x.rows(), k = x.cols();
    SignResultant out;
    out.r = Vector(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == j) continue;
        const Vector zr = vInvHalf * (rowOf(x, i) - rowOf(x, j));
        const double dz = norm2(zr);
        if (dz <= tol) {
            ++out.mult;
            continue;
        }
        out.wSum += 1.0 / dz;
        for (std::size_t c = 0; c < k; ++c) out.r[c] += zr[c] / dz;
    }
    out.rNorm = norm2(out.r);
    return out;
}

}  // namespace detail

// Tyler's shape estimator at a fixed location, normalized to determinant one.
// Iterates V <- V^{1/2} A V^{1/2} from the identity until the fixed-point
// residual ||A - I||_max drops below 1e-10 (at most 500 iterations).
inline Matrix tylerShape(const Matrix& x, const Vector& theta) {
    const std::size_t n = x.rows(), k = x.cols();
    if (theta.size() != k) throw validation_error("tylerShape: location dimension mismatch");
    if (n <= k * (k - 1)) throw validation_error("tylerShape: need n > k(k-1)");
    Matrix v = Matrix::identity(k);
    double residual = 0.0;
    for (int it = 0; it < 500; ++it) {
        const Matrix vInvHalf = symmetricInvSqrt(v);
        auto [a, res] = detail::tylerStep(x, theta, vInvHalf);
        residual = res;
        if (residual < 1e-10) return v;
        const Matrix vHalf = symmetricSqrt(v);
        v = vHalf * a * vHalf;
        detail::detNormalize(v);
    }
    throw numeric_error("tylerShape: no convergence after 500 iterations, residual " +
                        std::to_string(residual));
}

inline double medianOf(Vector v) {
    if (v.empty()) throw validation_error("median of empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    // even n: average of the two central order statistics
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Hettmansperger-Randles median: location theta such that the spatial signs
// of V^{-1/2}(X_i - theta) average to zero, with V the Tyler shape at theta.
// Alternates one Tyler update with one Weiszfeld location step
// theta <- theta + V^{1/2} avg(U) / avg(1/d), which is monotone for the
// spatial median objective at fixed shape. The spatial median can sit exactly
// on an observation, where plain Weiszfeld stalls; following Vardi and Zhang
// (2000), if the signs about the nearest observation have resultant norm at
// most its multiplicity, that observation solves the location equation (in
// the subgradient sense): the iterate jumps there, the shape equation is
// solved at that point, and the stay-or-leave decision is re-made at the
// converged shape. Otherwise a pulled-back step moves the iterate off it.
// For small samples the coupled equations can have no exact solution (the
// sign resultant at an observation can sit just above its multiplicity under
// the shape fitted without it, yet fall below under the shape fitted with
// it); the iteration then cycles, and the best iterate is returned provided
// its defect stays below 1/n, the gap a single sign can open.
inline Vector hrMedian(const Matrix& x) {
    const std::size_t n = x.rows(), k = x.cols();
    if (n <= k) throw validation_error("hrMedian: need n > k");
    Vector theta(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        Vector col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = x(i, j);
        theta[j] = medianOf(col);
    }
    Matrix v = Matrix::identity(k);

    double resV = 0.0, resU = 0.0;
    double bestDefect = std::numeric_limits<double>::infinity();
    Vector bestTheta = theta;
    for (int it = 0; it < 500; ++it) {
        // shape update at current theta
        Matrix vInvHalf = symmetricInvSqrt(v);
        auto [a, residual] = detail::tylerStep(x, theta, vInvHalf);
        resV = residual;
        const Matrix vHalf = symmetricSqrt(v);
        v = vHalf * a * vHalf;
        detail::detNormalize(v);

        // location update at the new shape
        vInvHalf = symmetricInvSqrt(v);
        const Matrix vNewHalf = symmetricSqrt(v);
        std::vector<Vector> z(n);
        Vector d(n);
        std::size_t jMin = 0;
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = vInvHalf * (rowOf(x, i) - theta);
            d[i] = norm2(z[i]);
            if (d[i] < d[jMin]) jMin = i;
        }
        const double dMed = medianOf(d);
        if (!(dMed > 0.0))
            throw validation_error("hrMedian: too many duplicate observations");
        const double tol0 = 1e-12 * dMed;

        // resultant of the signs about the nearest observation
        detail::SignResultant sr = detail::signResultant(x, jMin, vInvHalf, tol0);

        if (sr.rNorm <= double(sr.mult)) {
            // the nearest observation solves the sign equation given V: pin
            // the location there, solve the shape equation at it (the pinned
            // rows drop out), and decide at the converged shape whether it
            // still does
            theta = rowOf(x, jMin);
            for (int jt = 0; jt < 500 && resV >= 1e-10; ++jt) {
                vInvHalf = symmetricInvSqrt(v);
                auto [aa, rr] = detail::tylerStep(x, theta, vInvHalf);
                resV = rr;
                const Matrix vh = symmetricSqrt(v);
                v = vh * aa * vh;
                detail::detNormalize(v);
            }
            vInvHalf = symmetricInvSqrt(v);
            sr = detail::signResultant(x, jMin, vInvHalf, tol0);
            if (sr.rNorm <= double(sr.mult)) return theta;
            // not a solution at the converged shape: step decisively off it
            resU = (sr.rNorm - double(sr.mult)) / double(n);
            if (resU < bestDefect) {
                bestDefect = resU;
                bestTheta = theta;
            }
            theta = rowOf(x, jMin) +
                    ((1.0 - double(sr.mult) / sr.rNorm) / sr.wSum) *
                        (symmetricSqrt(v) * sr.r);
            continue;
        }

        if (d[jMin] > tol0) {
            Vector uBar(k, 0.0);
            double invSum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                invSum += 1.0 / d[i];
                for (std::size_t c = 0; c < k; ++c) uBar[c] += z[i][c] / d[i];
            }
            for (double& u : uBar) u /= double(n);
            resU = norm2(uBar);
            if (resU < 1e-9 && resV < 1e-9) return theta;
            if (std::max(resU, resV) < bestDefect) {
                bestDefect = std::max(resU, resV);
                bestTheta = theta;
            }
            if (d[jMin] > 1e-6 * dMed) {
                theta = theta + (double(n) / invSum) * (vNewHalf * uBar);
                continue;
            }
        } else {
            // sitting on an observation that is not the solution
            resU = (sr.rNorm - double(sr.mult)) / double(n);
            if (resU < 1e-9 && resV < 1e-9) return theta;
            if (std::max(resU, resV) < bestDefect) {
                bestDefect = std::max(resU, resV);
                bestTheta = theta;
            }
        }
        // too close to that observation for the plain step: pulled-back step
        // from it toward the Weiszfeld target of the remaining observations
        theta = rowOf(x, jMin) +
                ((1.0 - double(sr.mult) / sr.rNorm) / sr.wSum) *
                    (vNewHalf * sr.r);
    }
    if (bestDefect <= 1.0 / double(n)) return bestTheta;
    throw numeric_error("hrMedian: no convergence after 500 iterations, defect " +
                        std::to_string(bestDefect));
}

// Empirical scale: median of the squared distances d_i^2(theta, V).
inline double scaleMedian(const Matrix& x, const Vector& theta, const Matrix& v) {
    const std::size_t n = x.rows();
    const Matrix vInvHalf = symmetricInvSqrt(v);
    Vector d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vector z = vInvHalf * (rowOf(x, i) - theta);
        d2[i] = dot(z, z);
    }
    return medianOf(d2);
}

// Empirical kurtosis from distances at (mean, covariance):
// kappa = k m4 / ((k+2) m2^2) - 1 with mj the j-th moment of d.
inline double kurtosisHat(const Matrix& x) {
    const std::size_t n = x.rows(), k = x.cols();
    auto [mean, s] = meanCov(x);
    const Matrix sInv = inverseSpd(s);
    double m2 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vector c = rowOf(x, i) - mean;
        const double d2 = dot(c, sInv * c);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= double(n);
    m4 /= double(n);
    return double(k) * m4 / ((double(k) + 2.0) * m2 * m2) - 1.0;
}

// Gram-Schmidt frame constrained to have first column beta0: column j >= 2 is
// the unit projection of betaHat's j-th column onto the orthocomplement of
// all previous columns. Last column sign flipped if needed for det +1.
inline Matrix constrainedEigvecs(const Matrix& betaHat, const Vector& beta0) {
    const std::size_t k = betaHat.rows();
    if (betaHat.cols() != k || beta0.size() != k)
        throw validation_error("constrainedEigvecs: dimension mismatch");
    const double nrm = norm2(beta0);
    if (std::abs(nrm - 1.0) > 1e-6)
        throw validation_error("constrainedEigvecs: beta0 must have unit norm");
    Matrix out(k, k);
    out.setColumn(0, (1.0 / nrm) * beta0);
    for (std::size_t j = 1; j < k; ++j) {
        Vector w = betaHat.column(j);
        for (std::size_t h = 0; h < j; ++h) {
            const Vector prev = out.column(h);
            w = w - dot(prev, w) * prev;
        }
        const double wn = norm2(w);
        if (wn < 1e-10)
            throw numeric_error(
                "constrainedEigvecs: column " + std::to_string(j + 1) +
                " degenerate (lies in the span of the previous directions)");
        out.setColumn(j, (1.0 / wn) * w);
    }
    if (determinant(out) < 0.0) {
        Vector last = out.column(k - 1);
        out.setColumn(k - 1, -1.0 * last);
    }
    return out;
}

// Projects eigenvalues onto the null constraint c_{p,q}' dvec = 0, then
// renormalizes to determinant one. Order is preserved (entries stay paired
// with their eigenvectors).
inline Vector constrainedEigvals(const Vector& lambdaHat, double p, std::size_t q) {
    const std::size_t k = lambdaHat.size();
    const Vector c = contrastC(k, p, q);
    const double shift = dot(c, lambdaHat) / dot(c, c);
    Vector out(k);
    double logDet = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        out[j] = lambdaHat[j] - shift * c[j];
        if (!(out[j] > 0.0))
            throw numeric_error(
                "constrainedEigvals: infeasible null, projection drives eigenvalue " +
                std::to_string(j + 1) + " nonpositive");
        logDet += std::log(out[j]);
    }
    const double scale = std::exp(-logDet / double(k));
    for (double& l : out) l *= scale;
    return out;
}

// True when that projection keeps every eigenvalue positive. Extreme samples
// (small n, heavy tails, or far-off nulls) can fail this, in which case the
// constrained estimate does not exist.
inline bool constrainedEigvalsFeasible(const Vector& lambdaHat, double p, std::size_t q) {
    const std::size_t k = lambdaHat.size();
    const Vector c = contrastC(k, p, q);
    const double shift = dot(c, lambdaHat) / dot(c, c);
    for (std::size_t j = 0; j < k; ++j)
        if (!(lambdaHat[j] - shift * c[j] > 0.0)) return false;
    return true;
}

// Signs, distances and ranks at (theta, V). Rank ties (exactly equal
// distances) are broken by observation index and flagged. An observation
// exactly at theta (possible when the location estimate lands on it) gets
// sign zero and the smallest distance, so its terms drop from sign and rank
// statistics; this mirrors the univariate zero-handling of signed ranks.
inline SignsRanks signsRanks(const Matrix& x, const Vector& theta, const Matrix& v) {
    const std::size_t n = x.rows();
    const Matrix vInvHalf = symmetricInvSqrt(v);
    SignsRanks sr;
    sr.U.resize(n);
    sr.d.resize(n);
    sr.R.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vector z = vInvHalf * (rowOf(x, i) - theta);
        const double nz = norm2(z);
        sr.d[i] = nz;
        if (nz > 0.0)
            for (double& zz : z) zz /= nz;
        sr.U[i] = std::move(z);
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return sr.d[a] < sr.d[b]; });
    for (std::size_t pos = 0; pos < n; ++pos) sr.R[idx[pos]] = pos + 1;
    for (std::size_t pos = 1; pos < n; ++pos)
        if (sr.d[idx[pos]] == sr.d[idx[pos - 1]]) sr.ties = true;
    return sr;
}

// Full nuisance snapshot used by the rank tests: HR median, Tyler shape, its
// spectral pieces, and the median-based scale.
inline ShapeEstimate shapeAtHrTyler(const Matrix& x) {
    ShapeEstimate e;
    e.theta = hrMedian(x);
    e.V = tylerShape(x, e.theta);
    const EigenSym eig = symmetricEigen(e.V);
    e.lambda = eig.values;
    e.beta = eig.vectors;
    e.sigma2 = scaleMedian(x, e.theta, e.V);
    return e;
}

}  // namespace pcatest
