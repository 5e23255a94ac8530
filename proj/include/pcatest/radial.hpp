#pragma once

// Standardized elliptical radial families. Each family is scaled so the
// modulus d of the spherical representative has median one, which pins the
// scale/shape decomposition down without any moment assumption. Supported:
// gaussian, Student with real nu > 0, and power-exponential with eta > 0.

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <string>

#include "pcatest/errors.hpp"
#include "pcatest/matrix.hpp"
#include "pcatest/quadrature.hpp"
#include "pcatest/rng.hpp"
#include "pcatest/special.hpp"

namespace pcatest {

enum class RadialKind { gaussian, student, powerExp };

struct RadialFamily {
    RadialKind kind = RadialKind::gaussian;
    std::size_t k = 0;
    double nu = 0.0;   // student degrees of freedom
    double eta = 0.0;  // power-exponential exponent
    double c = 0.0;    // median-one standardization constant

    // Canonical spec string; parameters use shortest round-trip formatting so
    // parseFamily("t:5").spec() == "t:5".
    std::string spec() const {
        const auto num = [](double v) {
            std::array<char, 32> buf;
            const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
            return std::string(buf.data(), res.ptr);
        };
        switch (kind) {
            case RadialKind::gaussian: return "gaussian";
            case RadialKind::student: return "t:" + num(nu);
            case RadialKind::powerExp: return "e:" + num(eta);
        }
        return "";
    }
};

// Median-one constant: gaussian a_k = chi^2_k median; student a_{k,nu} =
// k * (F_{k,nu} median); power-exponential b_{k,eta} from the Gamma(k/(2 eta))
// median, since b * d^{2 eta} is Gamma(k/(2 eta), 1) distributed.
inline double standardizeConstant(RadialKind kind, double param, std::size_t k) {
    if (k < 2) throw validation_error("standardizeConstant: k must be >= 2");
    switch (kind) {
        case RadialKind::gaussian:
            return chiSquareQuantile(0.5, double(k));
        case RadialKind::student:
            if (!(param > 0.0)) throw validation_error("student family: nu must be positive");
            return double(k) * fisherFQuantile(0.5, double(k), param);
        case RadialKind::powerExp:
            if (!(param > 0.0)) throw validation_error("powerExp family: eta must be positive");
            return gammaQuantile(0.5, double(k) / (2.0 * param));
    }
    throw validation_error("standardizeConstant: unknown family kind");
}

inline RadialFamily gaussianFamily(std::size_t k) {
    RadialFamily f;
    f.kind = RadialKind::gaussian;
    f.k = k;
    f.c = standardizeConstant(f.kind, 0.0, k);
    return f;
}

inline RadialFamily studentFamily(std::size_t k, double nu) {
    RadialFamily f;
    f.kind = RadialKind::student;
    f.k = k;
    f.nu = nu;
    f.c = standardizeConstant(f.kind, nu, k);
    return f;
}

inline RadialFamily powerExpFamily(std::size_t k, double eta) {
    RadialFamily f;
    f.kind = RadialKind::powerExp;
    f.k = k;
    f.eta = eta;
    f.c = standardizeConstant(f.kind, eta, k);
    return f;
}

// Family grammar: "gaussian" | "t:<nu>" | "e:<eta>".
inline RadialFamily parseFamily(const std::string& spec, std::size_t k) {
    if (spec == "gaussian" || spec == "n" || spec == "N") return gaussianFamily(k);
    auto parseParam = [&](const std::string& s) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw validation_error("");
            return v;
        } catch (...) {
            throw validation_error("family spec: cannot parse parameter in '" + spec + "'");
        }
    };
    if (spec.rfind("t:", 0) == 0) return studentFamily(k, parseParam(spec.substr(2)));
    if (spec.rfind("e:", 0) == 0) return powerExpFamily(k, parseParam(spec.substr(2)));
    throw validation_error("family spec: expected 'gaussian', 't:<nu>' or 'e:<eta>', got '" +
                           spec + "'");
}

// CDF of the standardized modulus d.
inline double radialCdf(const RadialFamily& f, double r) {
    if (r <= 0.0) return 0.0;
    switch (f.kind) {
        case RadialKind::gaussian:
            return chiSquareCdf(f.c * r * r, double(f.k));
        case RadialKind::student:
            return fisherFCdf(f.c * r * r / double(f.k), double(f.k), f.nu);
        case RadialKind::powerExp:
            return gammaCdf(f.c * std::pow(r, 2.0 * f.eta), double(f.k) / (2.0 * f.eta));
    }
    return 0.0;
}

inline double radialQuantile(const RadialFamily& f, double u) {
    if (!(u > 0.0 && u < 1.0))
        throw validation_error("radialQuantile: probability must lie in (0,1)");
    switch (f.kind) {
        case RadialKind::gaussian:
            return std::sqrt(chiSquareQuantile(u, double(f.k)) / f.c);
        case RadialKind::student:
            return std::sqrt(double(f.k) * fisherFQuantile(u, double(f.k), f.nu) / f.c);
        case RadialKind::powerExp:
            return std::pow(gammaQuantile(u, double(f.k) / (2.0 * f.eta)) / f.c,
                            0.5 / f.eta);
    }
    throw validation_error("radialQuantile: unknown family kind");
}

// Optimal location/radial score phi = -f1'/f1.
inline double optimalScorePhi(const RadialFamily& f, double r) {
    if (!(r > 0.0)) throw validation_error("optimalScorePhi: r must be positive");
    switch (f.kind) {
        case RadialKind::gaussian:
            return f.c * r;
        case RadialKind::student:
            return (double(f.k) + f.nu) * f.c * r / (f.nu + f.c * r * r);
        case RadialKind::powerExp:
            return 2.0 * f.eta * f.c * std::pow(r, 2.0 * f.eta - 1.0);
    }
    throw validation_error("optimalScorePhi: unknown family kind");
}

struct DensitySummary {
    double Dk;     // E[d^2] (sigma = 1)
    double Ek;     // E[d^4]
    double kappa;  // kurtosis parameter (k/(k+2)) Ek/Dk^2 - 1
    double Jk;     // radial Fisher information for shape/scale
    double Ik;     // radial Fisher information for location
};

namespace detail {

inline std::map<std::string, DensitySummary>& summaryCache() {
    static std::map<std::string, DensitySummary> cache;
    return cache;
}

inline std::mutex& summaryMutex() {
    static std::mutex m;
    return m;
}

inline DensitySummary computeSummary(const RadialFamily& f) {
    DensitySummary s{};
    const double k = double(f.k);
    if (f.kind == RadialKind::gaussian) {
        s.Dk = k / f.c;
        s.Ek = k * (k + 2.0) / (f.c * f.c);
        s.kappa = 0.0;
        s.Jk = k * (k + 2.0);
        s.Ik = f.c * k;  // E[(a_k d)^2] = a_k^2 * (k/a_k)
        return s;
    }
    if (f.kind == RadialKind::student) {
        if (!(f.nu > 4.0))
            throw validation_error(
                "densitySummary: infinite moment: Student kurtosis needs finite fourth "
                "moments (nu > 4), got nu = " +
                std::to_string(f.nu));
        // moment integrands have algebraic (1-u)^(-2j/nu) tails that defeat
        // quadrature on (0,1); the moments are available exactly
        const double nu = f.nu;
        s.Dk = (k / f.c) * nu / (nu - 2.0);
        s.Ek = (k / f.c) * (k / f.c) * nu * nu * (k + 2.0) / (k * (nu - 2.0) * (nu - 4.0));
        s.Jk = k * (k + 2.0) * (k + nu) / (k + nu + 2.0);
        s.kappa = (k / (k + 2.0)) * s.Ek / (s.Dk * s.Dk) - 1.0;
        // phi(d)^2 = (k+nu)^2 c B(1-B)/nu with B = cd^2/(nu+cd^2) ~ Beta(k/2, nu/2),
        // and E[B(1-B)] = ab/((a+b)(a+b+1)) gives the closed form below
        s.Ik = f.c * k * (k + nu) / (k + nu + 2.0);
        return s;
    }
    s.Dk = integrate01([&](double u) {
        const double r = radialQuantile(f, u);
        return r * r;
    });
    s.Ek = integrate01([&](double u) {
        const double r = radialQuantile(f, u);
        return r * r * r * r;
    });
    s.Jk = integrate01([&](double u) {
        const double r = radialQuantile(f, u);
        const double pr = optimalScorePhi(f, r) * r;
        return pr * pr;
    });
    s.kappa = (k / (k + 2.0)) * s.Ek / (s.Dk * s.Dk) - 1.0;
    s.Ik = integrate01([&](double u) {
        const double p = optimalScorePhi(f, radialQuantile(f, u));
        return p * p;
    });
    return s;
}

}  // namespace detail

// Moment and information summary. Gaussian and Student entries are
// closed-form (Student shape information k(k+2)(k+nu)/(k+nu+2)); the rest
// comes from quadrature over u = F(r). Requires finite fourth moments,
// hence Student nu > 4. Cached per (family, k): efficiency tables hit the
// same few summaries hundreds of times.
inline DensitySummary densitySummary(const RadialFamily& f) {
    const std::string key = f.spec() + "|" + std::to_string(f.k);
    {
        std::lock_guard<std::mutex> lock(detail::summaryMutex());
        auto it = detail::summaryCache().find(key);
        if (it != detail::summaryCache().end()) return it->second;
    }
    const DensitySummary s = detail::computeSummary(f);
    std::lock_guard<std::mutex> lock(detail::summaryMutex());
    detail::summaryCache().emplace(key, s);
    return s;
}

// Draws n rows X_i = theta + sigma * d_i * V^{1/2} U_i with U_i uniform on
// the sphere (normalized Gaussian vector) and d_i = radialQuantile(uniform).
// Per observation the draw order is fixed: k normals, then one uniform.
inline Matrix sampleElliptical(std::size_t n, const Vector& theta, double sigma2,
                               const Matrix& v, const RadialFamily& f, Rng& rng) {
    const std::size_t k = f.k;
    if (theta.size() != k || v.rows() != k || v.cols() != k)
        throw validation_error("sampleElliptical: dimension mismatch");
    if (!(sigma2 > 0.0)) throw validation_error("sampleElliptical: sigma2 must be positive");
    if (std::abs(determinant(v) - 1.0) > 1e-8)
        throw validation_error("sampleElliptical: shape matrix must have determinant one");
    const Matrix vHalf = symmetricSqrt(v);
    const double sigma = std::sqrt(sigma2);

    Matrix x(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        const Vector u = rng.sphere(k);
        const double d = radialQuantile(f, rng.uniform());
        const Vector row = vHalf * u;
        for (std::size_t j = 0; j < k; ++j) x(i, j) = theta[j] + sigma * d * row[j];
    }
    return x;
}

}  // namespace pcatest
