#pragma once

// Monte Carlo machinery: rejection-frequency experiments over a grid of
// local alternatives, simulated critical values for the signed-rank
// statistics, and Kolmogorov-Smirnov checks of null distributions.
// Replicates are assigned counter-based RNG streams keyed by a scenario
// hash, so results are independent of the thread count and schedule, and
// the same primitive draws are reused across the alternative grid (common
// random numbers).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pcatest/errors.hpp"
#include "pcatest/matrix.hpp"
#include "pcatest/radial.hpp"
#include "pcatest/rng.hpp"
#include "pcatest/scores.hpp"
#include "pcatest/special.hpp"
#include "pcatest/statistics.hpp"

namespace pcatest {

enum class Problem { eigvec, eigval };

struct Scenario {
    Problem problem = Problem::eigvec;
    std::size_t k = 3;
    std::size_t n = 100;
    std::size_t reps = 2500;
    std::vector<RadialFamily> families;
    std::vector<double> xiGrid{0.0, 1.0, 2.0, 3.0};
    Vector lambda{10.0, 4.0, 1.0};  // base spectrum, raw scale
    std::vector<std::string> methods;
    std::uint64_t seed = 20250815;
    std::size_t q = 1;
    double alpha = 0.05;
    double rotStep = 3.14159265358979323846 / 12.0;  // radians per grid unit
    double shiftStep = 3.0;                          // leading-eigenvalue increment per grid unit
    bool simulatedCv = false;                        // rank eigval tests: also decide at simulated cv
    std::size_t cvReps = 100000;
    std::size_t threads = 0;  // 0 = hardware concurrency
};

struct RejectionRow {
    std::string method;
    std::string family;
    double xi = 0.0;
    double freq = 0.0;
    std::size_t reps = 0;
    std::size_t n = 0;
    double alpha = 0.05;
    std::string cvMode = "asymptotic";
};

struct RejectionTable {
    std::vector<RejectionRow> rows;
};

namespace detail {

inline std::size_t resolveThreads(std::size_t requested) {
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? hc : 1;
}

// Runs chunks [lo, hi) of [0, reps) on a pool, forwarding the chunk index so
// callers can keep per-thread state. The first worker exception is rethrown
// on the calling thread after everyone joins.
template <typename Body>
void parallelChunks(std::size_t reps, std::size_t nThreads, const Body& body) {
    std::exception_ptr err = nullptr;
    std::mutex errMu;
    auto guarded = [&](std::size_t t, std::size_t lo, std::size_t hi) {
        try {
            body(t, lo, hi);
        } catch (...) {
            const std::lock_guard<std::mutex> g(errMu);
            if (!err) err = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    const std::size_t chunk = (reps + nThreads - 1) / nThreads;
    for (std::size_t t = 0; t < nThreads; ++t) {
        const std::size_t lo = t * chunk, hi = std::min(reps, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(guarded, t, lo, hi);
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

inline std::uint64_t scenarioHash(const Scenario& sc) {
    std::ostringstream os;
    os << (sc.problem == Problem::eigvec ? "eigvec" : "eigval") << '|' << sc.k << '|' << sc.n
       << '|' << sc.reps << '|' << sc.q << '|' << sc.alpha << '|' << sc.rotStep << '|'
       << sc.shiftStep << '|' << sc.seed;
    for (double v : sc.lambda) os << '|' << v;
    for (double v : sc.xiGrid) os << '|' << v;
    const std::string s = os.str();
    return fnv1a(s.data(), s.size());
}

inline double derivedP(const Vector& lambda, std::size_t q) {
    double head = 0.0, total = 0.0;
    for (std::size_t j = 0; j < lambda.size(); ++j) {
        total += lambda[j];
        if (j >= q) head += lambda[j];
    }
    return head / total;
}

// n spherical unit vectors plus the matching radial quantile draws, one
// replicate's worth of primitive randomness.
inline void drawEpsilon(Rng& rng, const RadialFamily& f, std::size_t n, std::size_t k,
                        std::vector<Vector>& eps) {
    eps.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vector u = rng.sphere(k);
        const double d = radialQuantile(f, rng.uniform());
        for (double& v : u) v *= d;
        eps[i] = std::move(u);
    }
}

inline Matrix applyTransform(const std::vector<Vector>& eps, const Matrix& t) {
    const std::size_t n = eps.size(), k = t.rows();
    Matrix x(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        const Vector row = t * eps[i];
        for (std::size_t j = 0; j < k; ++j) x(i, j) = row[j];
    }
    return x;
}

inline Matrix eigvecTransform(const Vector& lambda, double angle) {
    const std::size_t k = lambda.size();
    Matrix b = Matrix::identity(k);
    b(0, 0) = std::cos(angle);
    b(0, 1) = -std::sin(angle);
    b(1, 0) = std::sin(angle);
    b(1, 1) = std::cos(angle);
    Matrix t(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) t(i, j) = b(i, j) * std::sqrt(lambda[j]);
    return t;
}

inline Matrix eigvalTransform(const Vector& lambda, double shift) {
    const std::size_t k = lambda.size();
    Matrix t(k, k);
    for (std::size_t j = 0; j < k; ++j) t(j, j) = std::sqrt(lambda[j] + (j == 0 ? shift : 0.0));
    return t;
}

struct MethodPlan {
    std::string method;      // as listed in the scenario
    ScoreSpec score;         // valid when rank
    bool rank = false;
    double simulatedCv = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace detail

// Empirical quantile conventions for simulated critical values: the
// ceil(alpha*m)-th order statistic (lower tail) and the ceil((1-alpha)*m)-th
// (upper tail), 1-based, on the ascending sort.
inline double empiricalQuantileLower(const std::vector<double>& sorted, double alpha) {
    const double m = double(sorted.size());
    const std::size_t idx = std::size_t(std::ceil(alpha * m - 1e-9));
    if (idx < 1 || idx > sorted.size())
        throw validation_error("empirical quantile: alpha*reps must be at least 1");
    return sorted[idx - 1];
}

inline double empiricalQuantileUpper(const std::vector<double>& sorted, double alpha) {
    const double m = double(sorted.size());
    const std::size_t idx = std::size_t(std::ceil((1.0 - alpha) * m - 1e-9));
    if (idx < 1 || idx > sorted.size())
        throw validation_error("empirical quantile: (1-alpha)*reps out of range");
    return sorted[idx - 1];
}

// Simulated critical value for the signed-rank statistics under the null.
// Both statistics are distribution-free under the null: only uniform sphere
// directions and the ranks of iid uniforms enter. The eigenvector statistic
// is also invariant to the underlying spectrum, so it is simulated in the
// canonical frame. The eigenvalue statistic depends on the null design
// (lambda, p, q), which defaults to the det-normalized spectrum (10,4,1)
// with q = 1 and the matching p.
inline double simulateCriticalValue(const ScoreSpec& score, Problem problem, std::size_t k,
                                    std::size_t n, std::size_t reps, double alpha = 0.05,
                                    std::uint64_t seed = 20250815,
                                    const Vector* lambdaOpt = nullptr, double pOpt = -1.0,
                                    std::size_t q = 1, std::size_t threads = 0) {
    if (k < 2) throw validation_error("simulateCriticalValue: need k >= 2");
    if (n < 2) throw validation_error("simulateCriticalValue: need n >= 2");
    if (reps < 1000) throw validation_error("simulateCriticalValue: need at least 1000 replications");
    if (score.k != k) throw validation_error("simulateCriticalValue: score dimension mismatch");

    Vector lambda;
    double p = pOpt;
    if (problem == Problem::eigval) {
        if (lambdaOpt != nullptr) {
            lambda = *lambdaOpt;
        } else {
            lambda = Vector{10.0, 4.0, 1.0};
            if (k != 3)
                throw validation_error(
                    "simulateCriticalValue: default spectrum is 3-dimensional, supply lambda");
        }
        double logDet = 0.0;
        for (double v : lambda) {
            if (!(v > 0.0)) throw validation_error("simulateCriticalValue: lambda must be > 0");
            logDet += std::log(v);
        }
        const double scale = std::exp(logDet / double(k));
        for (double& v : lambda) v /= scale;
        if (q >= k) throw validation_error("simulateCriticalValue: q must be < k");
        if (p < 0.0) p = detail::derivedP(lambda, q);
        if (!(p > 0.0 && p < 1.0))
            throw validation_error("simulateCriticalValue: p must lie in (0,1)");
    }

    const Vector table = scoreTable(score, n);
    const double jk = scoreNorm(score);
    Vector beta0(k, 0.0);
    beta0[0] = 1.0;
    const Matrix identity = Matrix::identity(k);

    std::vector<double> stats(reps);
    const std::uint64_t baseHash =
        fnv1a("critval", 7) ^ fnv1a(score.label.data(), score.label.size()) ^
        (std::uint64_t(k) << 32) ^ n;
    const std::size_t nThreads = std::min<std::size_t>(detail::resolveThreads(threads), reps);

    detail::parallelChunks(reps, nThreads, [&](std::size_t, std::size_t lo, std::size_t hi) {
        std::vector<Vector> u(n);
        std::vector<double> unif(n);
        std::vector<std::size_t> order(n), ranks(n);
        for (std::size_t rep = lo; rep < hi; ++rep) {
            Rng rng(seed, mixStream(baseHash, rep));
            for (std::size_t i = 0; i < n; ++i) {
                u[i] = rng.sphere(k);
                unif[i] = rng.uniform();
            }
            std::iota(order.begin(), order.end(), std::size_t(0));
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return unif[a] < unif[b]; });
            for (std::size_t i = 0; i < n; ++i) ranks[order[i]] = i + 1;
            const Matrix sk = signedRankCov(u, ranks, table);
            stats[rep] = (problem == Problem::eigvec)
                             ? qRankStatFromCov(sk, n, jk, beta0)
                             : tRankStatFromCov(sk, n, jk, lambda, identity, p, q);
        }
    });

    std::sort(stats.begin(), stats.end());
    return (problem == Problem::eigvec) ? empiricalQuantileUpper(stats, alpha)
                                        : empiricalQuantileLower(stats, alpha);
}

// Rejection-frequency experiment over families x alternatives. Within each
// (family, replicate) the same primitive draws feed every grid point.
inline RejectionTable runScenario(const Scenario& sc) {
    if (sc.k < 2) throw validation_error("runScenario: need k >= 2");
    if (sc.lambda.size() != sc.k) throw validation_error("runScenario: lambda dimension mismatch");
    if (sc.families.empty()) throw validation_error("runScenario: no families");
    if (sc.methods.empty()) throw validation_error("runScenario: no methods");
    if (sc.xiGrid.empty()) throw validation_error("runScenario: empty grid");
    if (sc.q >= sc.k) throw validation_error("runScenario: q must be < k");
    for (std::size_t j = 1; j < sc.k; ++j)
        if (!(sc.lambda[j - 1] > sc.lambda[j]))
            throw validation_error("runScenario: lambda must be strictly decreasing");

    const std::uint64_t hash = detail::scenarioHash(sc);
    const double p = detail::derivedP(sc.lambda, sc.q);

    std::vector<detail::MethodPlan> plans;
    for (const std::string& m : sc.methods) {
        detail::MethodPlan pl;
        pl.method = m;
        if (m.rfind("rank:", 0) == 0) {
            pl.rank = true;
            pl.score = parseScore(m.substr(5), sc.k);
        } else if (sc.problem == Problem::eigvec) {
            if (m != "anderson" && m != "gauss" && m != "pseudo" && m != "tyler")
                throw validation_error("runScenario: unknown eigenvector method '" + m + "'");
        } else {
            if (m != "anderson" && m != "davis")
                throw validation_error("runScenario: unknown eigenvalue method '" + m + "'");
        }
        plans.push_back(std::move(pl));
    }

    // Simulated critical values are computed once per score at the null design.
    if (sc.simulatedCv) {
        for (auto& pl : plans) {
            if (!pl.rank) continue;
            pl.simulatedCv = simulateCriticalValue(pl.score, sc.problem, sc.k, sc.n, sc.cvReps,
                                                   sc.alpha, sc.seed, &sc.lambda, -1.0, sc.q,
                                                   sc.threads);
        }
    }

    // Row layout: method (simulated-cv variant right after its asymptotic
    // row) x family x grid point.
    struct Slot {
        std::size_t plan;
        bool simulated;
    };
    std::vector<Slot> slots;
    for (std::size_t i = 0; i < plans.size(); ++i) {
        slots.push_back({i, false});
        if (sc.simulatedCv && plans[i].rank) slots.push_back({i, true});
    }

    const std::size_t nXi = sc.xiGrid.size();
    const std::size_t cells = slots.size() * sc.families.size() * nXi;
    std::vector<std::uint64_t> counts(cells, 0);
    auto cellIndex = [&](std::size_t slot, std::size_t fam, std::size_t xi) {
        return (slot * sc.families.size() + fam) * nXi + xi;
    };

    Vector beta0(sc.k, 0.0);
    beta0[0] = 1.0;
    const EigvecHypothesis hVec{beta0};
    const EigvalHypothesis hVal{p, sc.q};

    std::vector<Matrix> transforms(nXi);
    for (std::size_t xi = 0; xi < nXi; ++xi)
        transforms[xi] = (sc.problem == Problem::eigvec)
                             ? detail::eigvecTransform(sc.lambda, sc.xiGrid[xi] * sc.rotStep)
                             : detail::eigvalTransform(sc.lambda, sc.xiGrid[xi] * sc.shiftStep);

    const std::size_t nThreads = std::min<std::size_t>(detail::resolveThreads(sc.threads), sc.reps);

    for (std::size_t fam = 0; fam < sc.families.size(); ++fam) {
        const RadialFamily& family = sc.families[fam];
        const std::string famSpec = family.spec();
        const std::uint64_t famHash = hash ^ fnv1a(famSpec.data(), famSpec.size());

        auto worker = [&](std::size_t lo, std::size_t hi, std::vector<std::uint64_t>& local) {
            std::vector<Vector> eps;
            for (std::size_t rep = lo; rep < hi; ++rep) {
                Rng rng(sc.seed, mixStream(famHash, rep));
                detail::drawEpsilon(rng, family, sc.n, sc.k, eps);
                for (std::size_t xi = 0; xi < nXi; ++xi) {
                    const Matrix x = detail::applyTransform(eps, transforms[xi]);
                    for (std::size_t si = 0; si < slots.size(); ++si) {
                        const detail::MethodPlan& pl = plans[slots[si].plan];
                        bool reject = false;
                        if (sc.problem == Problem::eigvec) {
                            if (pl.rank) {
                                const TestReport r = qRank(x, hVec, pl.score, sc.alpha);
                                reject = slots[si].simulated ? r.statistic > pl.simulatedCv
                                                             : r.reject;
                            } else if (pl.method == "anderson") {
                                reject = qAnderson(x, hVec, sc.alpha).reject;
                            } else if (pl.method == "gauss") {
                                reject = qGaussian(x, hVec, sc.alpha).reject;
                            } else if (pl.method == "pseudo") {
                                reject = qPseudoGaussian(x, hVec, sc.alpha,
                                                         PseudoVariant::gaussian)
                                             .reject;
                            } else {
                                reject = qPseudoGaussian(x, hVec, sc.alpha, PseudoVariant::tyler)
                                             .reject;
                            }
                        } else {
                            if (pl.rank) {
                                const TestReport r = tRank(x, hVal, pl.score, sc.alpha);
                                reject = slots[si].simulated ? r.statistic < pl.simulatedCv
                                                             : r.reject;
                            } else if (pl.method == "anderson") {
                                reject = tAnderson(x, hVal, sc.alpha).reject;
                            } else {
                                reject = tDavis(x, hVal, sc.alpha).reject;
                            }
                        }
                        if (reject) ++local[cellIndex(si, fam, xi)];
                    }
                }
            }
        };

        std::vector<std::vector<std::uint64_t>> locals(nThreads,
                                                       std::vector<std::uint64_t>(cells, 0));
        detail::parallelChunks(sc.reps, nThreads,
                               [&](std::size_t t, std::size_t lo, std::size_t hi) {
                                   worker(lo, hi, locals[t]);
                               });
        for (const auto& local : locals)
            for (std::size_t c = 0; c < cells; ++c) counts[c] += local[c];
    }

    RejectionTable table;
    for (std::size_t si = 0; si < slots.size(); ++si) {
        for (std::size_t fam = 0; fam < sc.families.size(); ++fam) {
            for (std::size_t xi = 0; xi < nXi; ++xi) {
                RejectionRow row;
                row.method = plans[slots[si].plan].method;
                row.family = sc.families[fam].spec();
                row.xi = sc.xiGrid[xi];
                row.freq = double(counts[cellIndex(si, fam, xi)]) / double(sc.reps);
                row.reps = sc.reps;
                row.n = sc.n;
                row.alpha = sc.alpha;
                row.cvMode = slots[si].simulated ? "simulated" : "asymptotic";
                table.rows.push_back(std::move(row));
            }
        }
    }
    return table;
}

inline RejectionTable runScenario(Scenario sc, const std::vector<std::string>& methods) {
    sc.methods = methods;
    return runScenario(sc);
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov checks

struct KsResult {
    double statistic = 0.0;
    double pValue = 1.0;
    std::size_t draws = 0;
};

// One-sample KS against a reference cdf; p-value via the asymptotic survival
// function with the Stephens finite-sample correction.
inline KsResult ksAgainstCdf(std::vector<double> sample,
                             const std::function<double(double)>& cdf) {
    const std::size_t n = sample.size();
    if (n < 2) throw validation_error("ksAgainstCdf: need at least 2 draws");
    std::sort(sample.begin(), sample.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::max(double(i + 1) / double(n) - f, f - double(i) / double(n)));
    }
    const double rn = std::sqrt(double(n));
    KsResult r;
    r.statistic = d;
    r.pValue = kolmogorovSurvival((rn + 0.12 + 0.11 / rn) * d);
    r.draws = n;
    return r;
}

inline KsResult ksTwoSample(std::vector<double> a, std::vector<double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw validation_error("ksTwoSample: need at least 2 draws per sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(double(i) / double(a.size()) - double(j) / double(b.size())));
    }
    const double ne = double(a.size()) * double(b.size()) / double(a.size() + b.size());
    const double rn = std::sqrt(ne);
    KsResult r;
    r.statistic = d;
    r.pValue = kolmogorovSurvival((rn + 0.12 + 0.11 / rn) * d);
    r.draws = a.size() + b.size();
    return r;
}

// Draws `reps` statistics from a generator and tests them against a null cdf.
inline KsResult nullDistributionCheck(const std::function<double(std::size_t)>& draw,
                                      std::size_t reps,
                                      const std::function<double(double)>& cdf) {
    if (reps < 500)
        throw validation_error("nullDistributionCheck: need at least 500 draws");
    std::vector<double> sample(reps);
    for (std::size_t i = 0; i < reps; ++i) sample[i] = draw(i);
    return ksAgainstCdf(std::move(sample), cdf);
}

}  // namespace pcatest
