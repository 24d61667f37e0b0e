#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apkit/sets.hpp"
#include "apkit/vector.hpp"

namespace apkit {

enum class StartSide { X, Y };

struct SolverConfig {
    std::size_t max_iter = 10000;
    double gap_tol = 1e-12;    ///< stop once |x_n - y_n| (or |y_n - x_{n+1}|) is this small
    double stall_tol = 1e-14;  ///< relative gap decrease that counts as progress
    std::size_t stall_window = 20;
    std::uint64_t seed = 0;
    bool record_angles = false;
    StartSide start_side = StartSide::X;
};

/// One full step x_n -> y_n -> x_{n+1}.
struct IterationRecord {
    std::size_t n = 0;
    Vector x;       ///< x_n in X
    Vector y;       ///< y_n, nearest point of Y to x_n
    Vector x_next;  ///< x_{n+1}, nearest point of X to y_n
    double gap = 0.0;        ///< |x_n - y_n|
    double half_gap = 0.0;   ///< |y_n - x_{n+1}|
    double cos_ratio = 0.0;  ///< half_gap / gap (0 when gap is 0)
    bool tie_x = false;      ///< projection producing x_{n+1} was a tie
    bool tie_y = false;      ///< projection producing y_n was a tie
    std::optional<double> angle;  ///< angle at y_n between x_n - y_n and x_{n+1} - y_n
};

enum class Termination { converged, max_iter, stalled };

inline std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::max_iter: return "max_iter";
        case Termination::stalled: return "stalled";
    }
    return "unknown";
}

struct Trace {
    std::vector<IterationRecord> records;
    Termination termination = Termination::max_iter;
    Vector start;
    std::optional<Vector> start_on_y;  ///< set when the run started by projecting onto Y
    Vector final_x;                    ///< last point of X produced

    [[nodiscard]] std::vector<double> gaps() const {
        std::vector<double> g;
        g.reserve(records.size());
        for (const IterationRecord& r : records) g.push_back(r.gap);
        return g;
    }
};

/**
 * Method of alternating projections between X and Y.
 *
 * With StartSide::X the start is projected onto X; with StartSide::Y it is
 * first projected onto Y and then onto X, so every record starts from a point
 * of X. Stops on a gap below gap_tol, on max_iter, or when the gap has not
 * shrunk by a relative stall_tol over stall_window steps.
 */
inline Trace alternate(const SetSpec& X, const SetSpec& Y, const Vector& start, const SolverConfig& cfg) {
    if (X.dim() != Y.dim() || X.dim() != start.dim()) throw dimension_error("alternate: dimension mismatch");
    if (cfg.max_iter < 1) throw precondition_error("alternate: max_iter must be at least 1");
    if (cfg.gap_tol < 0.0 || cfg.stall_tol < 0.0) throw precondition_error("alternate: tolerances must be >= 0");
    if (!start.finite()) throw numerical_error("alternate: start point is not finite");

    Trace trace;
    trace.start = start;
    Vector x;
    if (cfg.start_side == StartSide::Y) {
        Vector y0 = project(Y, start).point;
        x = project(X, y0).point;
        trace.start_on_y = std::move(y0);
    } else {
        x = project(X, start).point;
    }

    trace.records.reserve(std::min<std::size_t>(cfg.max_iter, 1 << 16));
    for (std::size_t n = 0; n < cfg.max_iter; ++n) {
        IterationRecord rec;
        rec.n = n;
        ProjectionResult py = project(Y, x);
        ProjectionResult px = project(X, py.point);
        rec.gap = py.distance;
        rec.half_gap = px.distance;
        rec.cos_ratio = rec.gap > 0.0 ? rec.half_gap / rec.gap : 0.0;
        rec.tie_y = py.tie;
        rec.tie_x = px.tie;
        if (!py.point.finite() || !px.point.finite() || !std::isfinite(rec.gap) || !std::isfinite(rec.half_gap)) {
            throw numerical_error("alternate: non-finite iterate at step " + std::to_string(n));
        }
        if (cfg.record_angles && rec.gap > 0.0 && rec.half_gap > 0.0) {
            rec.angle = angle_between(x - py.point, px.point - py.point);
        }
        rec.x = std::move(x);
        rec.y = std::move(py.point);
        rec.x_next = px.point;
        x = std::move(px.point);
        const double gap = rec.gap;
        const double half_gap = rec.half_gap;
        trace.records.push_back(std::move(rec));

        if (gap <= cfg.gap_tol || half_gap <= cfg.gap_tol) {
            trace.termination = Termination::converged;
            break;
        }
        if (n + 1 > cfg.stall_window) {
            const double earlier = trace.records[n - cfg.stall_window].gap;
            if (earlier - gap <= cfg.stall_tol * earlier) {
                trace.termination = Termination::stalled;
                break;
            }
        }
    }
    trace.final_x = x;
    return trace;
}

/// Half-open range [first, last) of record indices.
struct IndexRange {
    std::size_t first = 0;
    std::size_t last = 0;
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Least-squares fit of log gap_n = log M + n log r.
struct RateFit {
    double r_hat = 0.0;
    double M_hat = 0.0;
    IndexRange window;
    double residual = 0.0;  ///< root-mean-square residual in log space
    std::size_t points = 0;
};

inline RateFit fit_rate(std::span<const double> gaps, IndexRange window) {
    if (window.first > window.last || window.last > gaps.size()) throw precondition_error("fit_rate: window out of range");
    std::vector<double> ns;
    std::vector<double> logs;
    for (std::size_t i = window.first; i < window.last; ++i) {
        if (gaps[i] > 0.0 && std::isfinite(gaps[i])) {
            ns.push_back(static_cast<double>(i));
            logs.push_back(std::log(gaps[i]));
        }
    }
    if (ns.size() < 5) throw numerical_error("fit_rate: need at least 5 positive gaps in the window");
    const double count = static_cast<double>(ns.size());
    double mean_n = 0.0;
    double mean_l = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        mean_n += ns[i];
        mean_l += logs[i];
    }
    mean_n /= count;
    mean_l /= count;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        sxx += (ns[i] - mean_n) * (ns[i] - mean_n);
        sxy += (ns[i] - mean_n) * (logs[i] - mean_l);
    }
    const double slope = sxy / sxx;
    const double intercept = mean_l - slope * mean_n;
    double ss = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const double e = logs[i] - (intercept + slope * ns[i]);
        ss += e * e;
    }
    RateFit fit;
    fit.r_hat = std::exp(slope);
    fit.M_hat = std::exp(intercept);
    fit.window = window;
    fit.residual = std::sqrt(ss / count);
    fit.points = ns.size();
    return fit;
}

/// Last half of the positive-gap records after skipping the first five of them.
inline IndexRange default_window(std::span<const double> gaps) {
    std::vector<std::size_t> positive;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        if (gaps[i] > 0.0) positive.push_back(i);
    }
    if (positive.size() < 5) return {0, gaps.size()};
    std::size_t skip = std::min<std::size_t>(5, positive.size() - 5);
    const std::size_t usable = positive.size() - skip;
    const std::size_t take = std::max<std::size_t>(5, usable / 2);
    const std::size_t begin = positive[positive.size() - take];
    return {begin, positive.back() + 1};
}

inline RateFit fit_rate(const Trace& trace, IndexRange window) {
    const std::vector<double> g = trace.gaps();
    return fit_rate(std::span<const double>(g), window);
}

inline RateFit fit_rate(const Trace& trace) {
    const std::vector<double> g = trace.gaps();
    return fit_rate(std::span<const double>(g), default_window(g));
}

/// Outcome of checking d(y_n, X) <= (1 - c^2) |x_n - y_n| along a trace.
struct LinearBoundReport {
    double c = 0.0;
    double factor = 0.0;  ///< 1 - c^2
    bool holds = true;
    std::optional<std::size_t> first_violation;
    std::size_t checked = 0;
    double worst_ratio = 0.0;  ///< max over positive gaps of d(y_n, X) / gap_n
};

inline LinearBoundReport check_linear_bound(const Trace& trace, const SetSpec& X, double c) {
    if (!(c > 0.0 && c < 1.0)) throw precondition_error("check_linear_bound: c must lie in (0, 1)");
    LinearBoundReport rep;
    rep.c = c;
    rep.factor = 1.0 - c * c;
    for (const IterationRecord& r : trace.records) {
        const double d = distance(X, r.y);
        ++rep.checked;
        if (r.gap > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, d / r.gap);
        if (d > rep.factor * r.gap + 1e-10 && rep.holds) {
            rep.holds = false;
            rep.first_violation = r.n;
        }
    }
    return rep;
}

}  // namespace apkit
