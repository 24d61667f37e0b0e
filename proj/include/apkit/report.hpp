#pragma once

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "apkit/alternating.hpp"
#include "apkit/diagnostics.hpp"
#include "apkit/harness.hpp"
#include "apkit/problem.hpp"

namespace apkit {

inline constexpr std::string_view trace_csv_header = "n,gap,half_gap,cos_ratio,tie_x,tie_y";

/// %.17g: enough digits to round-trip every double.
inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string emit_trace_csv(const Trace& t) {
    std::string out(trace_csv_header);
    out += '\n';
    for (const IterationRecord& r : t.records) {
        out += std::to_string(r.n);
        out += ',' + format_real(r.gap);
        out += ',' + format_real(r.half_gap);
        out += ',' + format_real(r.cos_ratio);
        out += r.tie_x ? ",1" : ",0";
        out += r.tie_y ? ",1\n" : ",0\n";
    }
    return out;
}

/// Gap column of a trace CSV, indexed by row. Throws parse_error on a bad header or row.
inline std::vector<double> parse_trace_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line) || (++lineno, line != trace_csv_header)) {
        throw parse_error(1, "header", "expected header '" + std::string(trace_csv_header) + "'");
    }
    std::vector<double> gaps;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string n_field;
        std::string gap_field;
        if (!std::getline(row, n_field, ',') || !std::getline(row, gap_field, ',')) {
            throw parse_error(lineno, "gap", "row has too few columns");
        }
        char* end = nullptr;
        const double g = std::strtod(gap_field.c_str(), &end);
        if (end == gap_field.c_str() || *end != '\0') throw parse_error(lineno, "gap", "not a number: " + gap_field);
        gaps.push_back(g);
    }
    return gaps;
}

// ---------------------------------------------------------------------------
// JSON reports. ordered_json keeps insertion order, so output is stable.
// ---------------------------------------------------------------------------

using report_json = nlohmann::ordered_json;

/// Finite reals as numbers; infinities and NaN as strings.
inline report_json real_json(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline report_json vector_json(const Vector& v) {
    report_json a = report_json::array();
    for (double x : v) a.push_back(real_json(x));
    return a;
}

inline report_json to_report(const RateFit& f) {
    report_json j;
    j["r_hat"] = real_json(f.r_hat);
    j["M_hat"] = real_json(f.M_hat);
    j["window"] = {f.window.first, f.window.last};
    j["residual"] = real_json(f.residual);
    j["points"] = f.points;
    return j;
}

inline report_json to_report(const LinearBoundReport& r) {
    report_json j;
    j["c"] = real_json(r.c);
    j["factor"] = real_json(r.factor);
    j["holds"] = r.holds;
    j["first_violation"] = r.first_violation ? report_json(*r.first_violation) : report_json(nullptr);
    j["checked"] = r.checked;
    j["worst_ratio"] = real_json(r.worst_ratio);
    return j;
}

inline report_json to_report(const TransversalityReport& r) {
    report_json j;
    j["at"] = vector_json(r.at);
    j["kappa_intrinsic_hat"] = real_json(r.kappa_intrinsic_hat);
    j["intrinsic_vacuous"] = r.intrinsic_vacuous;
    j["intrinsic_pairs"] = r.intrinsic_pairs;
    j["kappa_point"] = real_json(r.kappa_point);
    j["theta"] = real_json(r.theta);
    j["kappa_relative"] = real_json(r.kappa_relative);
    j["relative_rank"] = r.relative_rank;
    j["inherent_angle"] = real_json(r.inherent);
    j["radius"] = real_json(r.options.radius);
    j["pairs"] = r.options.pairs;
    j["sphere_samples"] = r.samples;
    j["seed"] = r.options.seed;
    return j;
}

inline report_json to_report(const SuperRegularityProfile& p) {
    report_json j;
    j["deficit"] = real_json(p.deficit);
    j["pairs"] = p.pairs;
    return j;
}

inline report_json to_report(const DecreaseCheck& c) {
    report_json j;
    j["mu_hat"] = real_json(c.mu_hat);
    j["delta"] = real_json(c.delta);
    j["rho"] = real_json(c.rho);
    j["lhs"] = real_json(c.lhs);
    j["rhs"] = real_json(c.rhs);
    j["holds"] = c.holds;
    j["samples"] = c.samples;
    j["empirical"] = c.empirical;
    return j;
}

inline report_json to_report(const ErrorBoundCheck& c) {
    report_json j;
    j["K_hat"] = real_json(c.K_hat);
    j["alpha"] = real_json(c.alpha);
    j["delta"] = real_json(c.delta);
    j["f_x"] = real_json(c.f_x);
    j["hypothesis_met"] = c.hypothesis_met;
    j["level_distance"] = real_json(c.level_distance);
    j["bound"] = real_json(c.bound);
    j["holds"] = c.holds;
    j["samples"] = c.samples;
    j["empirical"] = c.empirical;
    return j;
}

inline report_json to_report(const KLProfile& p) {
    report_json j;
    j["rho_window"] = {real_json(p.rho_lo), real_json(p.rho_hi)};
    j["pairs_evaluated"] = p.pairs_evaluated;
    report_json bins = report_json::array();
    for (const KLBin& b : p.bins) {
        report_json bj;
        bj["lo"] = real_json(b.lo);
        bj["hi"] = real_json(b.hi);
        bj["min_slope"] = b.min_slope ? real_json(*b.min_slope) : report_json(nullptr);
        bj["count"] = b.count;
        bins.push_back(bj);
    }
    j["bins"] = bins;
    return j;
}

inline report_json to_report(const RunResult& r, const ProblemSpec& spec) {
    report_json j;
    j["report"] = "run";
    j["problem"] = spec.name;
    j["dim"] = spec.dim;
    j["seed"] = spec.seed;
    j["start_side"] = spec.solver.start_side == StartSide::X ? "X" : "Y";
    j["termination"] = std::string(to_string(r.trace.termination));
    j["iterations"] = r.trace.records.size();
    j["final_gap"] = r.trace.records.empty() ? report_json(nullptr) : real_json(r.trace.records.back().gap);
    j["final_x"] = vector_json(r.trace.final_x);
    if (r.rate) j["rate"] = to_report(*r.rate);
    if (r.rate_error) j["rate_error"] = *r.rate_error;
    if (r.linear_bound) j["linear_bound"] = to_report(*r.linear_bound);
    if (r.transversality) j["transversality"] = to_report(*r.transversality);
    if (r.transversality_error) j["transversality_error"] = *r.transversality_error;
    return j;
}

inline report_json to_report(const PerturbationStudy& s) {
    report_json j;
    j["report"] = "perturb";
    j["problem"] = s.base.name;
    j["sigma"] = real_json(s.sigma);
    j["trials"] = s.trials;
    j["seed"] = s.seed;
    j["degenerate"] = s.degenerate;
    j["feasible"] = s.feasible;
    j["linear"] = s.linear;
    j["linear_fraction"] = real_json(s.linear_fraction);
    j["rate_threshold"] = real_json(linear_rate_threshold);
    report_json trials = report_json::array();
    for (const TrialResult& t : s.results) {
        report_json tj;
        tj["index"] = t.index;
        tj["seed"] = t.seed;
        tj["shift"] = vector_json(t.shift);
        tj["termination"] = std::string(to_string(t.termination));
        tj["iterations"] = t.iterations;
        tj["final_gap"] = real_json(t.final_gap);
        tj["feasible_limit"] = t.feasible_limit;
        tj["finite_termination"] = t.finite_termination;
        tj["r_hat"] = t.rate ? real_json(t.rate->r_hat) : report_json(nullptr);
        tj["linear"] = t.linear;
        tj["limit"] = t.limit ? vector_json(*t.limit) : report_json(nullptr);
        tj["kappa_point"] = t.point ? real_json(t.point->kappa_point) : report_json(nullptr);
        tj["theta"] = t.point ? real_json(t.point->theta) : report_json(nullptr);
        tj["sphere_samples"] = t.point ? report_json(t.point->samples) : report_json(nullptr);
        trials.push_back(tj);
    }
    j["results"] = trials;
    return j;
}

inline std::string emit_report_json(const report_json& j) { return j.dump(2) + "\n"; }

}  // namespace apkit
