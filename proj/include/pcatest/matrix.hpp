#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "pcatest/errors.hpp"

namespace pcatest {

using Vector = std::vector<double>;

// Dense row-major matrix. Everything here targets small k (k <= ~50);
// no attempt is made at blocking or sparsity.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix diag(const Vector& d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    Matrix& operator+=(const Matrix& o) {
        requireSameShape(o);
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        requireSameShape(o);
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    Matrix& operator*=(double c) {
        for (double& v : a_) v *= c;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double c) { return a *= c; }
    friend Matrix operator*(double c, Matrix a) { return a *= c; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw validation_error("matrix product: inner dimensions differ");
        Matrix r(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t l = 0; l < a.cols_; ++l) {
                const double ail = a(i, l);
                if (ail == 0.0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) r(i, j) += ail * b(l, j);
            }
        return r;
    }

    friend Vector operator*(const Matrix& a, const Vector& x) {
        if (a.cols_ != x.size()) throw validation_error("matrix-vector product: dimensions differ");
        Vector y(a.rows_, 0.0);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t j = 0; j < a.cols_; ++j) y[i] += a(i, j) * x[j];
        return y;
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Vector column(std::size_t j) const {
        Vector c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    void setColumn(std::size_t j, const Vector& c) {
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = c[i];
    }

    double maxAbs() const {
        double m = 0.0;
        for (double v : a_) m = std::max(m, std::abs(v));
        return m;
    }

    double trace() const {
        double t = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

private:
    void requireSameShape(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw validation_error("matrix shapes differ");
    }

    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

inline double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

inline Vector operator*(double c, Vector v) {
    for (double& x : v) x *= c;
    return v;
}

inline Vector operator+(Vector a, const Vector& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline Vector operator-(Vector a, const Vector& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

inline Matrix outer(const Vector& a, const Vector& b) {
    Matrix m(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
    return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            for (std::size_t p = 0; p < b.rows(); ++p)
                for (std::size_t q = 0; q < b.cols(); ++q)
                    r(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
        }
    return r;
}

// Determinant by LU with partial pivoting. Only used on small matrices
// (orthogonality/det checks), so no scaling refinements.
inline double determinant(Matrix a) {
    if (a.rows() != a.cols()) throw validation_error("determinant: matrix not square");
    const std::size_t n = a.rows();
    double det = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
        if (a(piv, c) == 0.0) return 0.0;
        if (piv != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(piv, j), a(c, j));
            det = -det;
        }
        det *= a(c, c);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a(r, c) / a(c, c);
            for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(c, j);
        }
    }
    return det;
}

struct EigenSym {
    Vector values;   // descending
    Matrix vectors;  // orthonormal columns, det +1
};

// Cyclic Jacobi for symmetric matrices. Sweeps the strict upper triangle in
// a fixed row-major order, so the result is reproducible on a given platform.
inline EigenSym symmetricEigen(const Matrix& s) {
    if (s.rows() != s.cols()) throw validation_error("symmetricEigen: matrix not square");
    const std::size_t n = s.rows();
    {
        double asym = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                asym = std::max(asym, std::abs(s(i, j) - s(j, i)));
                scale = std::max(scale, std::abs(s(i, j)));
            }
        if (asym > 1e-12 * std::max(scale, 1.0))
            throw validation_error("symmetricEigen: matrix not symmetric");
    }

    Matrix a = s;
    Matrix v = Matrix::identity(n);
    const int maxSweeps = 100;
    for (int sweep = 0; sweep < maxSweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        double diagScale = 0.0;
        for (std::size_t i = 0; i < n; ++i) diagScale = std::max(diagScale, std::abs(a(i, i)));
        if (std::sqrt(off) <= 1e-15 * std::max(diagScale, 1e-300) || off == 0.0) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                // stable rotation angle: t = sgn(theta)/(|theta| + sqrt(theta^2+1))
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 1.0 / (2.0 * theta);
                } else {
                    t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    if (theta < 0.0) t = -t;
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                const double tau = sn / (1.0 + c);

                const double app = a(p, p), aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = a(r, p), arq = a(r, q);
                    a(r, p) = arp - sn * (arq + tau * arp);
                    a(p, r) = a(r, p);
                    a(r, q) = arq + sn * (arp - tau * arq);
                    a(q, r) = a(r, q);
                }
                for (std::size_t r = 0; r < n; ++r) {
                    const double vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = vrp - sn * (vrq + tau * vrp);
                    v(r, q) = vrq + sn * (vrp - tau * vrq);
                }
            }
        }
    }

    // sort descending, stable in the original index for reproducible ties
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenSym out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(idx[j], idx[j]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, idx[j]);
    }

    // sign convention: largest-|entry| coordinate positive, then det +1 by
    // flipping the last column if necessary
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t imax = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(out.vectors(i, j)) > std::abs(out.vectors(imax, j))) imax = i;
        if (out.vectors(imax, j) < 0.0)
            for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = -out.vectors(i, j);
    }
    if (determinant(out.vectors) < 0.0)
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, n - 1) = -out.vectors(i, n - 1);

    return out;
}

// Applies g to the spectrum: beta diag(g(lambda)) beta'.
template <typename F>
Matrix spectralMap(const Matrix& s, F&& g, const char* what) {
    EigenSym e = symmetricEigen(s);
    Vector gl(e.values.size());
    for (std::size_t i = 0; i < gl.size(); ++i) {
        if (!(e.values[i] > 0.0))
            throw validation_error(std::string(what) + ": matrix not positive definite");
        gl[i] = g(e.values[i]);
    }
    return e.vectors * Matrix::diag(gl) * e.vectors.transpose();
}

inline Matrix symmetricSqrt(const Matrix& s) {
    return spectralMap(s, [](double l) { return std::sqrt(l); }, "symmetricSqrt");
}

inline Matrix symmetricInvSqrt(const Matrix& s) {
    return spectralMap(s, [](double l) { return 1.0 / std::sqrt(l); }, "symmetricInvSqrt");
}

inline Matrix inverseSpd(const Matrix& s) {
    return spectralMap(s, [](double l) { return 1.0 / l; }, "inverseSpd");
}

}  // namespace pcatest
