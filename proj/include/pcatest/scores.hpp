#pragma once

// Score functions on (0,1): the power family K_a(u) = k(a+1)u^a (sign,
// Wilcoxon, Spearman for a = 0,1,2) and density scores K_f(u) derived from a
// radial family. Also their information norms, cross-informations against a
// radial density, and the asymptotic-relative-efficiency ratio.

#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <string>

#include "pcatest/errors.hpp"
#include "pcatest/quadrature.hpp"
#include "pcatest/radial.hpp"

namespace pcatest {

struct ScoreSpec {
    enum class Kind { power, density };
    Kind kind = Kind::power;
    std::size_t k = 0;
    double a = 0.0;        // power exponent
    RadialFamily family;   // density-score source
    std::string label;     // grammar form, e.g. "vdw", "power:1.5"
};

inline ScoreSpec powerScore(std::size_t k, double a) {
    if (a < 0.0) throw validation_error("powerScore: exponent must be >= 0");
    ScoreSpec s;
    s.kind = ScoreSpec::Kind::power;
    s.k = k;
    s.a = a;
    if (a == 0.0)
        s.label = "sign";
    else if (a == 1.0)
        s.label = "wilcoxon";
    else if (a == 2.0)
        s.label = "spearman";
    else
        s.label = "power:" + std::to_string(a);
    return s;
}

inline ScoreSpec signScore(std::size_t k) { return powerScore(k, 0.0); }
inline ScoreSpec wilcoxonScore(std::size_t k) { return powerScore(k, 1.0); }
inline ScoreSpec spearmanScore(std::size_t k) { return powerScore(k, 2.0); }

inline ScoreSpec densityScore(const RadialFamily& f) {
    ScoreSpec s;
    s.kind = ScoreSpec::Kind::density;
    s.k = f.k;
    s.family = f;
    if (f.kind == RadialKind::gaussian)
        s.label = "vdw";
    else if (f.kind == RadialKind::student)
        s.label = "tscore:" + std::to_string(f.nu);
    else
        s.label = "escore:" + std::to_string(f.eta);
    return s;
}

inline ScoreSpec vdwScore(std::size_t k) { return densityScore(gaussianFamily(k)); }
inline ScoreSpec tScore(std::size_t k, double nu) { return densityScore(studentFamily(k, nu)); }

// Score grammar: "vdw" | "sign" | "wilcoxon" | "spearman" | "power:<a>" | "tscore:<nu>".
inline ScoreSpec parseScore(const std::string& spec, std::size_t k) {
    if (spec == "vdw") return vdwScore(k);
    if (spec == "sign") return signScore(k);
    if (spec == "wilcoxon") return wilcoxonScore(k);
    if (spec == "spearman") return spearmanScore(k);
    auto parseParam = [&](const std::string& s) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw validation_error("");
            return v;
        } catch (...) {
            throw validation_error("score spec: cannot parse parameter in '" + spec + "'");
        }
    };
    if (spec.rfind("power:", 0) == 0) return powerScore(k, parseParam(spec.substr(6)));
    if (spec.rfind("tscore:", 0) == 0) return tScore(k, parseParam(spec.substr(7)));
    if (spec.rfind("escore:", 0) == 0)
        return densityScore(powerExpFamily(k, parseParam(spec.substr(7))));
    throw validation_error(
        "score spec: expected 'vdw', 'sign', 'wilcoxon', 'spearman', 'power:<a>' or "
        "'tscore:<nu>', got '" + spec + "'");
}

inline double evalScore(const ScoreSpec& s, double u) {
    if (!(u > 0.0 && u < 1.0)) throw validation_error("evalScore: u must lie in (0,1)");
    const double k = double(s.k);
    if (s.kind == ScoreSpec::Kind::power)
        return k * (s.a + 1.0) * std::pow(u, s.a);
    switch (s.family.kind) {
        case RadialKind::gaussian:
            return chiSquareQuantile(u, k);
        case RadialKind::student: {
            const double g = fisherFQuantile(u, k, s.family.nu);
            return k * (k + s.family.nu) * g / (s.family.nu + k * g);
        }
        case RadialKind::powerExp:
            // phi(r) r = 2 eta b r^(2 eta), and b d^(2 eta) is Gamma(k/(2 eta), 1)
            return 2.0 * s.family.eta *
                   gammaQuantile(u, k / (2.0 * s.family.eta));
    }
    throw validation_error("evalScore: unknown score kind");
}

// J_k(K) = int K(u)^2 du; closed forms where the families admit them.
inline double scoreNorm(const ScoreSpec& s) {
    const double k = double(s.k);
    if (s.kind == ScoreSpec::Kind::power) {
        const double a = s.a;
        return k * k * (a + 1.0) * (a + 1.0) / (2.0 * a + 1.0);
    }
    if (s.family.kind == RadialKind::gaussian) return k * (k + 2.0);
    if (s.family.kind == RadialKind::student)
        return k * (k + 2.0) * (k + s.family.nu) / (k + s.family.nu + 2.0);
    return integrate01([&](double u) {
        const double v = evalScore(s, u);
        return v * v;
    });
}

namespace detail {

inline std::map<std::string, double>& crossInfoCache() {
    static std::map<std::string, double> cache;
    return cache;
}

inline std::mutex& crossInfoMutex() {
    static std::mutex m;
    return m;
}

}  // namespace detail

// J_k(K, g1) = int K(u) K_{g1}(u) du. Cached per (score, family, k).
inline double crossInfo(const ScoreSpec& s, const RadialFamily& g1) {
    if (s.k != g1.k) throw validation_error("crossInfo: score and family dimensions differ");
    const std::string key = s.label + "|" + g1.spec() + "|" + std::to_string(s.k);
    {
        std::lock_guard<std::mutex> lock(detail::crossInfoMutex());
        auto it = detail::crossInfoCache().find(key);
        if (it != detail::crossInfoCache().end()) return it->second;
    }
    const ScoreSpec gScore = densityScore(g1);
    const double value =
        integrate01([&](double u) { return evalScore(s, u) * evalScore(gScore, u); });
    std::lock_guard<std::mutex> lock(detail::crossInfoMutex());
    detail::crossInfoCache().emplace(key, value);
    return value;
}

// Asymptotic relative efficiency of the K-score rank test with respect to the
// pseudo-Gaussian one under radial density g1 (same ratio for eigenvector and
// eigenvalue problems): (1 + kappa_k(g1)) J_k(K,g1)^2 / (k(k+2) J_k(K)).
inline double areRatio(const ScoreSpec& s, const RadialFamily& g1) {
    const double kappa = densitySummary(g1).kappa;  // throws if fourth moments fail
    const double j = crossInfo(s, g1);
    const double k = double(s.k);
    return (1.0 + kappa) * j * j / (k * (k + 2.0) * scoreNorm(s));
}

}  // namespace pcatest
