#pragma once

// Structural matrices used by the eigenvector/eigenvalue test statistics:
// vectorization maps, the commutation and diagonal-selector matrices, the
// eigenvalue-chart Jacobian, the tangent-space operators for frames, and the
// shape information matrix with its closed-form inverse. Everything is built
// densely; dimensions stay tiny.

#include <cmath>
#include <cstddef>

#include "pcatest/matrix.hpp"

namespace pcatest {

enum class VectorizeMode { full, upperDiag, upperOffDiag, diagonal, diagonalTail };

// full: column-stacked vec(A). upperDiag/upperOffDiag walk the upper triangle
// row by row. diagonal: dvec(A). diagonalTail: dvec(A) without its first entry.
inline Vector vectorize(const Matrix& a, VectorizeMode mode) {
    if (a.rows() != a.cols()) throw validation_error("vectorize: matrix not square");
    const std::size_t k = a.rows();
    Vector v;
    switch (mode) {
        case VectorizeMode::full:
            v.resize(k * k);
            for (std::size_t j = 0; j < k; ++j)
                for (std::size_t i = 0; i < k; ++i) v[j * k + i] = a(i, j);
            break;
        case VectorizeMode::upperDiag:
            v.reserve(k * (k + 1) / 2);
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = i; j < k; ++j) v.push_back(a(i, j));
            break;
        case VectorizeMode::upperOffDiag:
            v.reserve(k * (k - 1) / 2);
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = i + 1; j < k; ++j) v.push_back(a(i, j));
            break;
        case VectorizeMode::diagonal:
            v.resize(k);
            for (std::size_t i = 0; i < k; ++i) v[i] = a(i, i);
            break;
        case VectorizeMode::diagonalTail:
            v.resize(k - 1);
            for (std::size_t i = 1; i < k; ++i) v[i - 1] = a(i, i);
            break;
    }
    return v;
}

inline Matrix unvectorize(const Vector& v, std::size_t k) {
    if (v.size() != k * k) throw validation_error("unvectorize: length is not k^2");
    Matrix a(k, k);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < k; ++i) a(i, j) = v[j * k + i];
    return a;
}

// K_k vec(A) = vec(A') for every k x k A.
inline Matrix commutation(std::size_t k) {
    if (k < 2) throw validation_error("commutation: k must be >= 2");
    Matrix m(k * k, k * k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) m(i * k + j, j * k + i) = 1.0;
    return m;
}

// H_k vec(A) = dvec(A); H_k H_k' = I_k.
inline Matrix diagSelector(std::size_t k) {
    if (k < 2) throw validation_error("diagSelector: k must be >= 2");
    Matrix m(k, k * k);
    for (std::size_t i = 0; i < k; ++i) m(i, i * k + i) = 1.0;
    return m;
}

// (k-1) x k Jacobian of the chart expressing lambda_1 = prod_{j>=2} 1/lambda_j:
// first column -lambda_1 * (1/lambda_2, ..., 1/lambda_k), then I_{k-1}.
// Satisfies M' dvec_tail(l) = dvec(l) whenever tr(Lambda^{-1} l) = 0.
inline Matrix eigvalJacobian(const Vector& lambda) {
    const std::size_t k = lambda.size();
    if (k < 2) throw validation_error("eigvalJacobian: need k >= 2");
    for (double l : lambda)
        if (!(l > 0.0)) throw validation_error("eigvalJacobian: eigenvalues must be positive");
    Matrix m(k - 1, k);
    for (std::size_t j = 0; j < k - 1; ++j) {
        m(j, 0) = -lambda[0] / lambda[j + 1];
        m(j, j + 1) = 1.0;
    }
    return m;
}

// N_k = (0 | I_{k-1}); picks the tail of a dvec. M_k N_k' = I_{k-1}.
inline Matrix basisTail(std::size_t k) {
    Matrix m(k - 1, k);
    for (std::size_t j = 0; j < k - 1; ++j) m(j, j + 1) = 1.0;
    return m;
}

struct EigvecOperators {
    Matrix G;   // k^2 x k(k-1)/2, columns e_j (x) beta_h - e_h (x) beta_j
    Matrix L;   // k(k-1)/2 x k^2, rows (lambda_h - lambda_j)(beta_h (x) beta_j)'
    Matrix nu;  // k x k, nu(j,h) = lambda_j lambda_h/(lambda_j - lambda_h)^2 off-diagonal
};

inline Vector kronVec(const Vector& a, const Vector& b) {
    Vector r(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i * b.size() + j] = a[i] * b[j];
    return r;
}

// Pair blocks ordered (1,2),(1,3),...,(1,k),(2,3),...,(k-1,k).
inline EigvecOperators eigvecOperators(const Matrix& beta, const Vector& lambda) {
    const std::size_t k = lambda.size();
    if (beta.rows() != k || beta.cols() != k)
        throw validation_error("eigvecOperators: frame and spectrum dimensions differ");
    double lmax = 0.0;
    for (double l : lambda) lmax = std::max(lmax, std::abs(l));
    for (std::size_t j = 0; j + 1 < k; ++j)
        if (!(lambda[j] - lambda[j + 1] > 1e-12 * lmax))
            throw numeric_error("eigvecOperators: repeated or unordered eigenvalues (degenerate spectrum)");

    EigvecOperators ops;
    ops.G = Matrix(k * k, k * (k - 1) / 2);
    ops.L = Matrix(k * (k - 1) / 2, k * k);
    ops.nu = Matrix(k, k);
    std::size_t col = 0;
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t h = j + 1; h < k; ++h) {
            Vector ej(k, 0.0), eh(k, 0.0);
            ej[j] = 1.0;
            eh[h] = 1.0;
            const Vector bj = beta.column(j), bh = beta.column(h);
            const Vector g = kronVec(ej, bh) - kronVec(eh, bj);
            const Vector l = kronVec(bh, bj);
            for (std::size_t r = 0; r < k * k; ++r) {
                ops.G(r, col) = g[r];
                ops.L(col, r) = (lambda[h] - lambda[j]) * l[r];
            }
            ++col;
        }
    }
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t h = 0; h < k; ++h)
            if (j != h) {
                const double gap = lambda[j] - lambda[h];
                ops.nu(j, h) = lambda[j] * lambda[h] / (gap * gap);
            }
    return ops;
}

// k^2 x k(k-1) chart sending the stacked free columns (b_2,...,b_k) to vec(b)
// with b_1 = 0 and frame' b + b' frame skew-symmetric. Input block j
// (0-based) carries column j+2 of b; the projector couples blocks pairwise.
inline Matrix tangentChart(const Matrix& frame) {
    const std::size_t k = frame.rows();
    if (frame.cols() != k) throw validation_error("tangentChart: frame not square");
    Matrix gram = frame.transpose() * frame;
    gram -= Matrix::identity(k);
    if (gram.maxAbs() > 1e-10)
        throw validation_error("tangentChart: frame columns not orthonormal");

    const Vector beta0 = frame.column(0);
    Matrix proj = Matrix::identity(k) - outer(beta0, beta0);

    Matrix p(k * k, k * (k - 1));
    for (std::size_t i = 0; i + 1 < k; ++i) {
        for (std::size_t j = 0; j + 1 < k; ++j) {
            // subblock (i,j): delta_ij (I - beta0 beta0') - beta_{j+1} beta_{i+1}'
            Matrix blk = outer(frame.column(j + 1), frame.column(i + 1)) * (-1.0);
            if (i == j) blk += proj;
            for (std::size_t r = 0; r < k; ++r)
                for (std::size_t c = 0; c < k; ++c)
                    p(k + i * k + r, j * k + c) = blk(r, c);
        }
    }
    return p;
}

namespace detail {

inline Matrix kronDiag(const Vector& d) {
    // diag(d) (x) diag(d) without forming the k x k matrices
    const std::size_t k = d.size();
    Matrix m(k * k, k * k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) m(i * k + j, i * k + j) = d[i] * d[j];
    return m;
}

inline void requirePositive(const Vector& lambda, const char* who) {
    for (double l : lambda)
        if (!(l > 0.0)) throw validation_error(std::string(who) + ": eigenvalues must be positive");
}

}  // namespace detail

// Information matrix for the free eigenvalues:
// D = (1/4) M_k H_k (I + K_k) (Lambda^{-1} (x) Lambda^{-1}) H_k' M_k'.
inline Matrix shapeInfoD(const Vector& lambda) {
    detail::requirePositive(lambda, "shapeInfoD");
    const std::size_t k = lambda.size();
    Vector linv(k);
    for (std::size_t i = 0; i < k; ++i) linv[i] = 1.0 / lambda[i];
    const Matrix m = eigvalJacobian(lambda);
    const Matrix h = diagSelector(k);
    Matrix sym = Matrix::identity(k * k) + commutation(k);
    Matrix core = h * (sym * detail::kronDiag(linv)) * h.transpose();
    return 0.25 * (m * core * m.transpose());
}

// Closed-form inverse:
// D^{-1} = N_k H_k P (I + K_k) (Lambda (x) Lambda) P' H_k' N_k'
// with P = I - (1/k) (Lambda (x) Lambda) vec(Lambda^{-1}) vec(Lambda^{-1})'.
inline Matrix shapeInfoDInverse(const Vector& lambda) {
    detail::requirePositive(lambda, "shapeInfoDInverse");
    const std::size_t k = lambda.size();
    Vector linv(k);
    for (std::size_t i = 0; i < k; ++i) linv[i] = 1.0 / lambda[i];
    const Vector vinv = vectorize(Matrix::diag(linv), VectorizeMode::full);
    const Matrix lkron = detail::kronDiag(lambda);
    Matrix p = Matrix::identity(k * k) - (1.0 / double(k)) * (lkron * outer(vinv, vinv));
    Matrix sym = Matrix::identity(k * k) + commutation(k);
    const Matrix nh = basisTail(k) * diagSelector(k);
    return nh * (p * (sym * lkron) * p.transpose()) * nh.transpose();
}

// Contrast vector of the eigenvalue-proportion hypothesis: q entries -p, then 1-p.
inline Vector contrastC(std::size_t k, double p, std::size_t q) {
    if (!(p > 0.0 && p < 1.0)) throw validation_error("contrastC: p must lie in (0,1)");
    if (q < 1 || q >= k) throw validation_error("contrastC: q must lie in 1..k-1");
    Vector c(k, 1.0 - p);
    for (std::size_t j = 0; j < q; ++j) c[j] = -p;
    return c;
}

// Standardizing constant a_{p,q}(Lambda) = 2(p^2 sum_{j<=q} lambda_j^2 + (1-p)^2 sum_{j>q} lambda_j^2).
inline double normalizerA(const Vector& lambda, double p, std::size_t q) {
    detail::requirePositive(lambda, "normalizerA");
    if (!(p > 0.0 && p < 1.0)) throw validation_error("normalizerA: p must lie in (0,1)");
    if (q < 1 || q >= lambda.size()) throw validation_error("normalizerA: q must lie in 1..k-1");
    double head = 0.0, tail = 0.0;
    for (std::size_t j = 0; j < lambda.size(); ++j)
        (j < q ? head : tail) += lambda[j] * lambda[j];
    return 2.0 * (p * p * head + (1.0 - p) * (1.0 - p) * tail);
}

// Gradient of h(lambda_2..lambda_k) = sum_{j>q} lambda_j - p (prod_{j>=2} 1/lambda_j + sum_{j>=2} lambda_j)
// evaluated at a det-one spectrum (lambda_1 = prod_{j>=2} 1/lambda_j).
inline Vector gradShapeConstraint(const Vector& lambda, double p, std::size_t q) {
    detail::requirePositive(lambda, "gradShapeConstraint");
    const std::size_t k = lambda.size();
    if (!(p > 0.0 && p < 1.0)) throw validation_error("gradShapeConstraint: p must lie in (0,1)");
    if (q < 1 || q >= k) throw validation_error("gradShapeConstraint: q must lie in 1..k-1");
    Vector g(k - 1);
    for (std::size_t j = 1; j < k; ++j) {
        const double base = p * (lambda[0] / lambda[j] - 1.0);
        g[j - 1] = (j < q ? base : 1.0 + base);
    }
    return g;
}

}  // namespace pcatest
