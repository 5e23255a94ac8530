// Command-line front end: eigenvector/eigenvalue hypothesis tests on CSV
// data, efficiency tables, Monte Carlo scenario runs, and simulated critical
// values. Reports are JSON on stdout (rejection tables default to CSV);
// diagnostics and warnings go to stderr. Exit codes: 0 success, 2 invalid
// input, 3 numeric failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pcatest/pcatest.hpp"

namespace {

using namespace pcatest;

Vector parseNumberList(const std::string& s, const char* what) {
    Vector out;
    for (const std::string& tok : detail::splitList(s)) {
        double v;
        if (!detail::parseDouble(tok, v))
            throw validation_error(std::string(what) + ": bad number '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw validation_error(std::string(what) + ": empty list");
    return out;
}

void emit(const std::string& text, const std::string& outPath) {
    if (outPath.empty()) {
        std::cout << text;
        if (text.empty() || text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream f(outPath, std::ios::binary);
    if (!f) throw validation_error("cannot open output file '" + outPath + "'");
    f << text;
    if (text.empty() || text.back() != '\n') f << '\n';
}

void emitReport(const TestReport& r, const std::string& outPath) {
    for (const std::string& w : r.warnings) std::cerr << "warning: " << w << "\n";
    emit(reportToJson(r).dump(), outPath);
}

struct EigvecArgs {
    std::string data, beta0, method = "anderson", score, out;
    double alpha = 0.05;
};

struct EigvalArgs {
    std::string data, method = "anderson", score, cv = "asymptotic", out;
    double p = 0.0, alpha = 0.05;
    std::size_t q = 1, cvReps = 100000, threads = 0;
    std::uint64_t seed = 20250815;
};

struct AreArgs {
    std::string score, family, out;
    std::size_t k = 0;
};

struct SimArgs {
    std::string config, format = "csv", out;
    std::size_t threads = 0;
    bool threadsSet = false;
};

struct CritArgs {
    std::string score, problem, lambda, out;
    std::size_t k = 0, n = 0, reps = 0, q = 1, threads = 0;
    double alpha = 0.05, p = -1.0;
    std::uint64_t seed = 20250815;
};

void runTestEigvec(const EigvecArgs& a) {
    const Dataset d = ingestCsv(a.data);
    Vector b = parseNumberList(a.beta0, "--beta0");
    if (b.size() != d.k)
        throw validation_error("--beta0 has " + std::to_string(b.size()) +
                               " entries but the data has " + std::to_string(d.k) + " columns");
    const double dev = std::abs(norm2(b) - 1.0);
    if (dev > 0.0 && dev <= 1e-6)
        std::cerr << "note: beta0 normalized (norm deviated from 1 by " << dev << ")\n";
    const EigvecHypothesis h{b};
    if (a.method != "rank" && !a.score.empty())
        throw validation_error("--score only applies to --method rank");

    TestReport r;
    if (a.method == "anderson") {
        r = qAnderson(d.x, h, a.alpha);
    } else if (a.method == "gauss") {
        r = qGaussian(d.x, h, a.alpha);
    } else if (a.method == "pseudo") {
        r = qPseudoGaussian(d.x, h, a.alpha, PseudoVariant::gaussian);
    } else if (a.method == "tyler") {
        r = qPseudoGaussian(d.x, h, a.alpha, PseudoVariant::tyler);
    } else if (a.method == "rank") {
        if (a.score.empty()) throw validation_error("--method rank requires --score");
        r = qRank(d.x, h, parseScore(a.score, d.k), a.alpha);
    } else {
        throw validation_error("unknown method '" + a.method +
                               "' (expected anderson|gauss|pseudo|tyler|rank)");
    }
    emitReport(r, a.out);
}

void runTestEigval(const EigvalArgs& a) {
    const Dataset d = ingestCsv(a.data);
    if (!(a.p > 0.0 && a.p < 1.0)) throw validation_error("--p must lie in (0,1)");
    const EigvalHypothesis h{a.p, a.q};
    if (a.cv != "asymptotic" && a.cv != "simulated")
        throw validation_error("--cv must be asymptotic or simulated");
    if (a.method != "rank" && !a.score.empty())
        throw validation_error("--score only applies to --method rank");

    TestReport r;
    if (a.method == "anderson") {
        if (a.cv == "simulated")
            throw validation_error("--cv simulated only applies to --method rank");
        r = tAnderson(d.x, h, a.alpha);
    } else if (a.method == "davis") {
        if (a.cv == "simulated")
            throw validation_error("--cv simulated only applies to --method rank");
        r = tDavis(d.x, h, a.alpha);
    } else if (a.method == "rank") {
        if (a.score.empty()) throw validation_error("--method rank requires --score");
        const ScoreSpec score = parseScore(a.score, d.k);
        if (a.cv == "simulated") {
            // plug-in null design: the constrained spectrum estimated from the data
            const ShapeEstimate est = shapeAtHrTyler(d.x);
            const Vector lambdaTilde = constrainedEigvals(est.lambda, h.p, h.q);
            const double cv = simulateCriticalValue(score, Problem::eigval, d.k, d.n, a.cvReps,
                                                    a.alpha, a.seed, &lambdaTilde, h.p, h.q,
                                                    a.threads);
            r = tRank(d.x, h, score, a.alpha, CvMode::simulated, cv);
        } else {
            r = tRank(d.x, h, score, a.alpha);
        }
    } else {
        throw validation_error("unknown method '" + a.method +
                               "' (expected anderson|davis|rank)");
    }
    emitReport(r, a.out);
}

void runAre(const AreArgs& a) {
    if (a.k < 2) throw validation_error("--k must be >= 2");
    const ScoreSpec score = parseScore(a.score, a.k);
    const RadialFamily family = parseFamily(a.family, a.k);
    JsonValue out = JsonValue::makeObject();
    out.set("are", JsonValue::make(areRatio(score, family)));
    emit(out.dump(), a.out);
}

void runSimulate(const SimArgs& a) {
    Scenario sc = scenarioFromConfig(parseConfigFile(a.config));
    if (a.threadsSet) sc.threads = a.threads;
    const RejectionTable table = runScenario(sc);
    if (a.format == "csv")
        emit(tableToCsv(table), a.out);
    else if (a.format == "json")
        emit(tableToJson(table).dump(), a.out);
    else
        throw validation_error("--format must be csv or json");
}

void runCritval(const CritArgs& a) {
    Problem problem;
    if (a.problem == "eigvec")
        problem = Problem::eigvec;
    else if (a.problem == "eigval")
        problem = Problem::eigval;
    else
        throw validation_error("--problem must be eigvec or eigval");
    const ScoreSpec score = parseScore(a.score, a.k);

    Vector lambda;
    const Vector* lambdaPtr = nullptr;
    if (!a.lambda.empty()) {
        lambda = parseNumberList(a.lambda, "--lambda");
        if (lambda.size() != a.k)
            throw validation_error("--lambda must list k eigenvalues");
        lambdaPtr = &lambda;
    }
    const double cv = simulateCriticalValue(score, problem, a.k, a.n, a.reps, a.alpha, a.seed,
                                            lambdaPtr, a.p, a.q, a.threads);

    JsonValue out = JsonValue::makeObject();
    out.set("critical_value", JsonValue::make(cv));
    out.set("score", JsonValue::make(score.label));
    out.set("problem", JsonValue::make(a.problem));
    out.set("k", JsonValue::make(a.k));
    out.set("n", JsonValue::make(a.n));
    out.set("reps", JsonValue::make(a.reps));
    out.set("alpha", JsonValue::make(a.alpha));
    out.set("tail", JsonValue::make(std::string(problem == Problem::eigvec ? "upper" : "lower")));
    emit(out.dump(), a.out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hypothesis tests for principal-component eigenvectors and eigenvalues"};
    app.require_subcommand(1);

    EigvecArgs ev;
    CLI::App* cVec = app.add_subcommand("test-eigvec",
                                        "Test that the leading eigenvector equals beta0");
    cVec->add_option("--data", ev.data, "CSV file of observations")->required();
    cVec->add_option("--beta0", ev.beta0, "hypothesized unit vector v1,v2,...")->required();
    cVec->add_option("--method", ev.method, "anderson|gauss|pseudo|tyler|rank");
    cVec->add_option("--score", ev.score, "score spec for --method rank");
    cVec->add_option("--alpha", ev.alpha, "test level (default 0.05)");
    cVec->add_option("--out", ev.out, "write the JSON report here instead of stdout");

    EigvalArgs el;
    CLI::App* cVal = app.add_subcommand(
        "test-eigval", "Test that the trailing eigenvalues carry proportion p of the variance");
    cVal->add_option("--data", el.data, "CSV file of observations")->required();
    cVal->add_option("--p", el.p, "hypothesized trailing-variance proportion")->required();
    cVal->add_option("--q", el.q, "number of leading eigenvalues excluded")->required();
    cVal->add_option("--method", el.method, "anderson|davis|rank");
    cVal->add_option("--score", el.score, "score spec for --method rank");
    cVal->add_option("--alpha", el.alpha, "test level (default 0.05)");
    cVal->add_option("--cv", el.cv, "critical value mode: asymptotic|simulated");
    cVal->add_option("--cv-reps", el.cvReps, "replications for --cv simulated");
    cVal->add_option("--seed", el.seed, "seed for --cv simulated");
    cVal->add_option("--threads", el.threads, "worker threads for --cv simulated");
    cVal->add_option("--out", el.out, "write the JSON report here instead of stdout");

    AreArgs ar;
    CLI::App* cAre = app.add_subcommand(
        "are", "Asymptotic relative efficiency of a rank test vs the pseudo-Gaussian one");
    cAre->add_option("--score", ar.score, "score spec")->required();
    cAre->add_option("--family", ar.family, "radial family spec")->required();
    cAre->add_option("--k", ar.k, "dimension")->required();
    cAre->add_option("--out", ar.out, "write the JSON report here instead of stdout");

    SimArgs sim;
    CLI::App* cSim = app.add_subcommand("simulate", "Run a rejection-frequency scenario");
    cSim->add_option("--config", sim.config, "flat key = value scenario file")->required();
    CLI::Option* thOpt = cSim->add_option("--threads", sim.threads, "worker thread cap");
    cSim->add_option("--format", sim.format, "csv (default) or json");
    cSim->add_option("--out", sim.out, "write the table here instead of stdout");

    CritArgs cr;
    CLI::App* cCrit = app.add_subcommand("critval",
                                         "Simulate a distribution-free critical value");
    cCrit->add_option("--score", cr.score, "score spec")->required();
    cCrit->add_option("--problem", cr.problem, "eigvec|eigval")->required();
    cCrit->add_option("--k", cr.k, "dimension")->required();
    cCrit->add_option("--n", cr.n, "sample size")->required();
    cCrit->add_option("--reps", cr.reps, "replications (>= 1000)")->required();
    cCrit->add_option("--alpha", cr.alpha, "test level (default 0.05)");
    cCrit->add_option("--seed", cr.seed, "RNG seed");
    cCrit->add_option("--p", cr.p, "eigval only: trailing-variance proportion");
    cCrit->add_option("--q", cr.q, "eigval only: leading eigenvalues excluded (default 1)");
    cCrit->add_option("--lambda", cr.lambda, "eigval only: null spectrum l1,l2,...");
    cCrit->add_option("--threads", cr.threads, "worker thread cap");
    cCrit->add_option("--out", cr.out, "write the JSON report here instead of stdout");

    try {
        app.parse(argc, argv);
        sim.threadsSet = thOpt->count() > 0;
        if (cVec->parsed()) runTestEigvec(ev);
        if (cVal->parsed()) runTestEigval(el);
        if (cAre->parsed()) runAre(ar);
        if (cSim->parsed()) runSimulate(sim);
        if (cCrit->parsed()) runCritval(cr);
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const pcatest::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const pcatest::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    }
}
