#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "apkit/alternating.hpp"
#include "apkit/diagnostics.hpp"
#include "apkit/problem.hpp"
#include "apkit/random.hpp"

namespace apkit {

/// Replaces spec.seed (and the solver seed) with $APKIT_SEED when it is set.
inline void apply_seed_override(ProblemSpec& spec) {
    const char* env = std::getenv("APKIT_SEED");
    if (env == nullptr || *env == '\0') return;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw parse_error(0, "APKIT_SEED", "expected a non-negative integer");
    spec.seed = v;
    spec.solver.seed = v;
}

struct RunResult {
    Trace trace;
    std::optional<RateFit> rate;
    std::optional<std::string> rate_error;
    std::optional<LinearBoundReport> linear_bound;
    std::optional<TransversalityReport> transversality;
    std::optional<std::string> transversality_error;
};

inline TransversalityOptions transversality_options(const ProblemSpec& spec) {
    return {spec.diagnostics.radius, spec.diagnostics.pairs, spec.diagnostics.samples, derive_seed(spec.seed, 1)};
}

/// Runs the solver and whichever diagnostics the problem requests.
inline RunResult run(const ProblemSpec& spec) {
    SolverConfig cfg = spec.solver;
    cfg.seed = spec.seed;
    RunResult out{alternate(spec.X, spec.Y, spec.start, cfg), {}, {}, {}, {}, {}};
    const DiagnosticsRequest& d = spec.diagnostics;

    if (d.rate) {
        try {
            out.rate = d.window ? fit_rate(out.trace, *d.window) : fit_rate(out.trace);
        } catch (const numerical_error& e) {
            out.rate_error = e.what();
        }
    }
    if (d.linear_bound_c) out.linear_bound = check_linear_bound(out.trace, spec.X, *d.linear_bound_c);
    if (d.transversality) {
        if (d.at) {
            out.transversality = transversality_report(spec.X, spec.Y, *d.at, transversality_options(spec));
        } else if (out.trace.termination == Termination::converged) {
            out.transversality = transversality_report(spec.X, spec.Y, out.trace.final_x, transversality_options(spec));
        } else {
            out.transversality_error = "no limit point: run did not converge and no 'at' point was given";
        }
    }
    return out;
}

struct TrialResult {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    Vector shift;
    Termination termination = Termination::max_iter;
    std::size_t iterations = 0;
    double final_gap = 0.0;
    bool feasible_limit = false;      ///< converged to a point of X within gap_tol of Y - e
    bool finite_termination = false;  ///< converged before 5 positive gaps existed
    std::optional<RateFit> rate;
    bool linear = false;  ///< feasible and (finite termination or r_hat < 1 - 1e-3)
    std::optional<Vector> limit;
    std::optional<PointTransversality> point;
};

struct PerturbationStudy {
    ProblemSpec base;
    double sigma = 0.0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    bool degenerate = false;  ///< sigma = 0: every trial is the base problem
    std::vector<TrialResult> results;
    std::size_t feasible = 0;
    std::size_t linear = 0;
    double linear_fraction = 0.0;  ///< linear / feasible, 0 when nothing was feasible
};

inline constexpr double linear_rate_threshold = 1.0 - 1e-3;

/// Shift of trial `index`: uniform in the sigma-ball, a pure function of (seed, index).
inline Vector trial_shift(std::size_t dim, double sigma, std::uint64_t seed, std::size_t index) {
    Rng rng(derive_seed(seed, index));
    return random_in_ball(rng, dim, sigma);
}

inline PerturbationStudy perturbation_study(const ProblemSpec& spec, double sigma, std::size_t trials,
                                            std::uint64_t seed) {
    if (trials < 1) throw precondition_error("perturbation_study: trials must be at least 1");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw precondition_error("perturbation_study: sigma must be >= 0");

    PerturbationStudy study{spec, sigma, trials, seed, sigma == 0.0, {}, 0, 0, 0.0};
    for (std::size_t i = 0; i < trials; ++i) {
        TrialResult t;
        t.index = i;
        t.seed = derive_seed(seed, i);
        t.shift = trial_shift(spec.dim, sigma, seed, i);
        const SetSpec Y = translate(spec.Y, t.shift);
        SolverConfig cfg = spec.solver;
        cfg.seed = t.seed;
        const Trace trace = alternate(spec.X, Y, spec.start, cfg);
        t.termination = trace.termination;
        t.iterations = trace.records.size();
        t.final_gap = trace.records.back().gap;
        t.feasible_limit = trace.termination == Termination::converged;
        try {
            t.rate = fit_rate(trace);
        } catch (const numerical_error&) {
            t.finite_termination = t.feasible_limit;
        }
        if (t.feasible_limit) {
            t.limit = trace.final_x;
            t.point = point_transversality(spec.X, Y, trace.final_x, spec.diagnostics.samples, derive_seed(t.seed, 1));
            t.linear = t.finite_termination || (t.rate && t.rate->r_hat < linear_rate_threshold);
            ++study.feasible;
            if (t.linear) ++study.linear;
        }
        study.results.push_back(std::move(t));
    }
    if (study.feasible > 0) study.linear_fraction = static_cast<double>(study.linear) / static_cast<double>(study.feasible);
    return study;
}

}  // namespace apkit
