#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "apkit/basis.hpp"
#include "apkit/cone.hpp"
#include "apkit/random.hpp"
#include "apkit/sets.hpp"
#include "apkit/vector.hpp"

namespace apkit {

// ---------------------------------------------------------------------------
// Coupling function phi(x, y) = delta_X(x) + |x - y| + delta_Y(y) and slopes.
// ---------------------------------------------------------------------------

inline double coupling_value(const SetSpec& X, const SetSpec& Y, const Vector& x, const Vector& y) {
    if (!contains(X, x, tol::membership) || !contains(Y, y, tol::membership)) {
        return std::numeric_limits<double>::infinity();
    }
    return distance(x, y);
}

namespace detail {

inline void require_member(const SetSpec& S, const Vector& p, const char* what) {
    if (!contains(S, p, tol::precondition)) throw precondition_error(std::string(what) + ": point not in set");
}

inline void require_distinct(const Vector& x, const Vector& y, const char* what) {
    if (norm(x - y) == 0.0) throw precondition_error(std::string(what) + ": x and y coincide");
}

}  // namespace detail

/// Limiting slope of phi_y at x: d(u, -N_X(x)) with u = (x - y)/|x - y|.
inline double limiting_marginal_slope_x(const SetSpec& X, const Vector& y, const Vector& x) {
    detail::require_member(X, x, "limiting_marginal_slope_x");
    detail::require_distinct(x, y, "limiting_marginal_slope_x");
    return distance_to_cone(normalize(x - y), negate_cone(proximal_normal_cone(X, x)));
}

/// Limiting slope of phi_x at y: d(u, N_Y(y)) with u = (x - y)/|x - y|.
inline double limiting_marginal_slope_y(const SetSpec& Y, const Vector& x, const Vector& y) {
    detail::require_member(Y, y, "limiting_marginal_slope_y");
    detail::require_distinct(x, y, "limiting_marginal_slope_y");
    return distance_to_cone(normalize(x - y), proximal_normal_cone(Y, y));
}

struct SlopeEstimate {
    double value = 0.0;
    bool isolated = false;  ///< no sampled neighbour was available
    std::size_t samples = 0;
};

/**
 * Lower estimate of the slope of w -> |w - anchor| restricted to S at p:
 * the largest observed decrease rate (|p - anchor| - |w - anchor|)/|p - w|
 * over seeded neighbours w, floored at 0.
 */
inline SlopeEstimate sampled_marginal_slope(const SetSpec& S, const Vector& anchor, const Vector& p, double radius,
                                            std::size_t count, std::uint64_t seed) {
    detail::require_member(S, p, "sampled_marginal_slope");
    detail::require_distinct(p, anchor, "sampled_marginal_slope");
    if (count == 0) return {0.0, true, 0};
    const std::vector<Vector> neighbours = sample_near(S, p, radius, count, seed);
    if (neighbours.empty()) return {0.0, true, 0};
    const double base = distance(p, anchor);
    double best = 0.0;
    for (const Vector& w : neighbours) {
        best = std::max(best, (base - distance(w, anchor)) / distance(p, w));
    }
    return {best, false, neighbours.size()};
}

/// Limiting slope of the coupling function at (x, y), x in X\Y, y in Y\X.
inline double coupling_slope(const SetSpec& X, const SetSpec& Y, const Vector& x, const Vector& y) {
    if (contains(Y, x, tol::membership)) throw precondition_error("coupling_slope: x must lie outside Y");
    if (contains(X, y, tol::membership)) throw precondition_error("coupling_slope: y must lie outside X");
    const double sx = limiting_marginal_slope_x(X, y, x);
    const double sy = limiting_marginal_slope_y(Y, x, y);
    return std::sqrt(sx * sx + sy * sy);
}

// ---------------------------------------------------------------------------
// Minimization over the unit sphere of a subspace.
// ---------------------------------------------------------------------------

inline std::size_t default_sphere_samples(std::size_t dim) { return dim <= 4 ? 4096 : 16384; }

struct SphereMinimum {
    Vector argmin;
    double value = std::numeric_limits<double>::infinity();
};

/**
 * Minimizes f over unit vectors of span(basis): seeded uniform sample plus the
 * basis axes and any extra candidates, then a 50-step compass refinement
 * (coordinate and pairwise-diagonal moves, step halved on failure).
 */
template <class Objective>
SphereMinimum minimize_on_sphere(const std::vector<Vector>& basis, Objective&& f, std::size_t samples,
                                 std::uint64_t seed, const std::vector<Vector>& extra = {}) {
    SphereMinimum best;
    if (basis.empty()) return best;
    const std::size_t dim = basis.front().dim();
    const std::size_t rank = basis.size();
    auto lift = [&](const std::vector<double>& c) {
        Vector u(dim);
        for (std::size_t i = 0; i < rank; ++i) u.add_scaled(c[i], basis[i]);
        return normalize(u);
    };
    auto coords = [&](const Vector& u) {
        std::vector<double> c(rank);
        for (std::size_t i = 0; i < rank; ++i) c[i] = dot(u, basis[i]);
        return c;
    };
    std::vector<double> best_c;
    auto consider = [&](const std::vector<double>& c) {
        double n2 = 0.0;
        for (double v : c) n2 += v * v;
        if (n2 <= 1e-24) return;
        const Vector u = lift(c);
        const double value = f(u);
        if (value < best.value) {
            best.value = value;
            best.argmin = u;
            best_c = coords(u);
        }
    };

    for (std::size_t i = 0; i < rank; ++i) {
        for (double sign : {1.0, -1.0}) {
            std::vector<double> c(rank, 0.0);
            c[i] = sign;
            consider(c);
        }
    }
    for (const Vector& e : extra) consider(coords(e));
    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t s = 0; s < samples; ++s) {
        std::vector<double> c(rank);
        for (double& v : c) v = gauss(rng);
        consider(c);
    }
    if (best_c.empty() || rank == 1) return best;

    std::vector<std::vector<double>> moves;
    for (std::size_t i = 0; i < rank; ++i) {
        for (double si : {1.0, -1.0}) {
            std::vector<double> m(rank, 0.0);
            m[i] = si;
            moves.push_back(m);
            for (std::size_t j = i + 1; j < rank && rank <= 8; ++j) {
                for (double sj : {1.0, -1.0}) {
                    std::vector<double> d(rank, 0.0);
                    d[i] = si;
                    d[j] = sj;
                    moves.push_back(d);
                }
            }
        }
    }
    double step = 0.25;
    for (int it = 0; it < 50; ++it) {
        const double before = best.value;
        const std::vector<double> centre = best_c;
        for (const auto& m : moves) {
            std::vector<double> c = centre;
            for (std::size_t i = 0; i < rank; ++i) c[i] += step * m[i];
            consider(c);
        }
        if (!(best.value < before)) step *= 0.5;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Transversality constants.
// ---------------------------------------------------------------------------

namespace detail {

inline void require_intersection(const SetSpec& X, const SetSpec& Y, const Vector& z, const char* what) {
    if (!contains(X, z, tol::precondition) || !contains(Y, z, tol::precondition)) {
        throw precondition_error(std::string(what) + ": point not in the intersection");
    }
}

inline std::vector<Vector> identity_basis(std::size_t dim) {
    std::vector<Vector> b;
    for (std::size_t i = 0; i < dim; ++i) b.push_back(Vector::unit(dim, i));
    return b;
}

/// Points of S near z lying outside `other` and within radius of z.
inline std::vector<Vector> exclusive_points(const SetSpec& S, const SetSpec& other, const Vector& z, double radius,
                                            std::size_t count, std::uint64_t seed) {
    std::vector<Vector> out;
    for (Vector& p : sample_near(S, z, radius, count, seed)) {
        if (distance(p, z) <= radius && !contains(other, p, tol::membership)) out.push_back(std::move(p));
    }
    return out;
}

/// max{d(u, N_Y), d(u, -N_X)} restricted to unit u in span(basis).
inline SphereMinimum cone_pair_minimum(const ConeModel& normal_y, const ConeModel& neg_normal_x,
                                       const std::vector<Vector>& basis, std::size_t samples, std::uint64_t seed) {
    return minimize_on_sphere(
        basis,
        [&](const Vector& u) { return std::max(distance_to_cone(u, normal_y), distance_to_cone(u, neg_normal_x)); },
        samples, seed);
}

}  // namespace detail

struct KappaEstimate {
    double value = 1.0;
    std::size_t pairs = 0;
    bool vacuous = true;  ///< no admissible (x, y) pair was found
};

/**
 * Sampled intrinsic transversality constant near z: the minimum over pairs
 * x in X\Y, y in Y\X within radius of z of
 * max{d(u, N_Y(y)), d(u, -N_X(x))}, u = (x - y)/|x - y|. `pairs` points are
 * drawn from each set and every cross pair is evaluated.
 */
inline KappaEstimate intrinsic_kappa(const SetSpec& X, const SetSpec& Y, const Vector& z, double radius,
                                     std::size_t pairs, std::uint64_t seed) {
    detail::require_intersection(X, Y, z, "intrinsic_kappa");
    KappaEstimate est;
    if (pairs == 0) return est;
    const auto xs = detail::exclusive_points(X, Y, z, radius, pairs, derive_seed(seed, 0));
    const auto ys = detail::exclusive_points(Y, X, z, radius, pairs, derive_seed(seed, 1));
    std::vector<ConeModel> neg_nx;
    std::vector<ConeModel> ny;
    for (const Vector& x : xs) neg_nx.push_back(negate_cone(proximal_normal_cone(X, x)));
    for (const Vector& y : ys) ny.push_back(proximal_normal_cone(Y, y));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < ys.size(); ++j) {
            const Vector u = normalize(xs[i] - ys[j]);
            const double v = std::max(distance_to_cone(u, ny[j]), distance_to_cone(u, neg_nx[i]));
            est.value = est.vacuous ? v : std::min(est.value, v);
            est.vacuous = false;
            ++est.pairs;
        }
    }
    return est;
}

struct PointTransversality {
    double kappa_point = 0.0;  ///< min over |u| = 1 of max{d(u, N_Y(z)), d(u, -N_X(z))}
    double theta = std::numbers::pi;  ///< minimal angle between N_Y(z) and -N_X(z); pi if either is {0}
    std::size_t samples = 0;
};

inline PointTransversality point_transversality(const SetSpec& X, const SetSpec& Y, const Vector& z,
                                                std::size_t samples, std::uint64_t seed) {
    detail::require_intersection(X, Y, z, "point_transversality");
    const std::size_t dim = z.dim();
    if (samples == 0) samples = default_sphere_samples(dim);
    const ConeModel ny = proximal_normal_cone(Y, z);
    const ConeModel neg_nx = negate_cone(proximal_normal_cone(X, z));
    const std::vector<Vector> full = detail::identity_basis(dim);

    PointTransversality out;
    out.samples = samples;
    out.kappa_point = detail::cone_pair_minimum(ny, neg_nx, full, samples, seed).value;

    if (!ny.is_zero() && !neg_nx.is_zero()) {
        // Minimize -cos over unit v in N_Y (projected sphere samples) against -N_X.
        auto negative_cosine = [&](const Vector& u) {
            double best = -1.0;
            for (const ConePiece& piece : ny.pieces()) {
                const Vector v = piece.project(u);
                if (norm(v) <= 1e-12) continue;
                if (auto c = neg_nx.max_cosine(normalize(v))) best = std::max(best, *c);
            }
            return -best;
        };
        std::vector<Vector> seeds;
        for (const ConePiece& piece : ny.pieces()) {
            for (Vector& d : piece.representative_directions()) seeds.push_back(std::move(d));
        }
        const SphereMinimum m = minimize_on_sphere(full, negative_cosine, samples, derive_seed(seed, 7), seeds);
        out.theta = std::acos(std::clamp(-m.value, -1.0, 1.0));
    }
    return out;
}

struct RelativeTransversality {
    double kappa_relative = 0.0;
    std::size_t rank = 0;  ///< estimated dimension of span(X u Y - z)
    std::vector<Vector> span;
    std::size_t samples = 0;
};

/**
 * Transversality constant inside the estimated span of (X u Y) - z.
 *
 * For sets inside z + L the normal cones split as N^L + L^perp, so distances
 * of unit u in L to the full cones equal distances to the restricted cones;
 * minimizing over the unit sphere of L is therefore the restricted constant.
 */
inline RelativeTransversality relative_transversality(const SetSpec& X, const SetSpec& Y, const Vector& z,
                                                      std::size_t samples, std::uint64_t seed, double radius = 1.0,
                                                      std::size_t span_points = 64) {
    detail::require_intersection(X, Y, z, "relative_transversality");
    const std::size_t dim = z.dim();
    if (samples == 0) samples = default_sphere_samples(dim);
    std::vector<Vector> diffs;
    for (const Vector& p : sample_near(X, z, radius, span_points, derive_seed(seed, 11))) diffs.push_back(p - z);
    for (const Vector& p : sample_near(Y, z, radius, span_points, derive_seed(seed, 12))) diffs.push_back(p - z);
    RelativeTransversality out;
    out.samples = samples;
    out.span = span_basis(diffs, tol::rank);
    out.rank = out.span.size();
    if (out.rank == dim) {
        out.kappa_relative = point_transversality(X, Y, z, samples, seed).kappa_point;
        return out;
    }
    if (out.rank == 0) {
        // X and Y coincide with {z} locally: nothing to separate.
        out.kappa_relative = 1.0;
        return out;
    }
    const ConeModel ny = proximal_normal_cone(Y, z);
    const ConeModel neg_nx = negate_cone(proximal_normal_cone(X, z));
    out.kappa_relative = detail::cone_pair_minimum(ny, neg_nx, out.span, samples, seed).value;
    return out;
}

struct SuperRegularityProfile {
    double deficit = -std::numbers::pi / 2;  ///< pi/2 minus the smallest chord/normal angle seen
    std::size_t pairs = 0;
};

/**
 * Worst observed violation of "chords make an angle of at least pi/2 - delta
 * with limiting normals" among sampled points of X near z. For each chord the smallest
 * angle to the normal cone is exact (via ConePiece::max_cosine).
 */
inline SuperRegularityProfile super_regularity_profile(const SetSpec& X, const Vector& z, double radius,
                                                       std::size_t samples, std::uint64_t seed) {
    detail::require_member(X, z, "super_regularity_profile");
    std::vector<Vector> points{z};
    for (Vector& p : sample_near(X, z, radius, samples, seed)) points.push_back(std::move(p));
    std::vector<ConeModel> cones;
    for (const Vector& p : points) cones.push_back(limiting_normal_cone(X, p));
    SuperRegularityProfile out;
    double min_angle = std::numbers::pi;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (cones[i].is_zero()) continue;
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (i == j) continue;
            const Vector chord = points[j] - points[i];
            if (norm(chord) == 0.0) continue;
            const auto c = cones[i].max_cosine(normalize(chord));
            if (!c) continue;
            ++out.pairs;
            min_angle = std::min(min_angle, std::acos(std::clamp(*c, -1.0, 1.0)));
        }
    }
    out.deficit = std::numbers::pi / 2 - min_angle;
    return out;
}

struct InherentAngle {
    double angle = std::numbers::pi;
    std::size_t pairs = 0;
    bool vacuous = true;
};

/// Smallest angle between x - P_Y(x) and P_X(y) - y over sampled x in X\Y, y in Y\X near z.
inline InherentAngle inherent_angle(const SetSpec& X, const SetSpec& Y, const Vector& z, double radius,
                                    std::size_t pairs, std::uint64_t seed) {
    detail::require_intersection(X, Y, z, "inherent_angle");
    InherentAngle out;
    if (pairs == 0) return out;
    const auto xs = detail::exclusive_points(X, Y, z, radius, pairs, derive_seed(seed, 0));
    const auto ys = detail::exclusive_points(Y, X, z, radius, pairs, derive_seed(seed, 1));
    std::vector<Vector> dx;
    std::vector<Vector> dy;
    for (const Vector& x : xs) {
        Vector d = x - project(Y, x).point;
        if (norm(d) > 0.0) dx.push_back(std::move(d));
    }
    for (const Vector& y : ys) {
        Vector d = project(X, y).point - y;
        if (norm(d) > 0.0) dy.push_back(std::move(d));
    }
    for (const Vector& a : dx) {
        for (const Vector& b : dy) {
            out.angle = std::min(out.angle, angle_between(a, b));
            out.vacuous = false;
            ++out.pairs;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Verifiers for the distance-decrease and error-bound inequalities.
// ---------------------------------------------------------------------------

/// Check of d(y, X) <= |y - x| - mu * delta with a sampled mu.
struct DecreaseCheck {
    double mu_hat = 0.0;
    double delta = 0.0;
    double rho = 0.0;
    double lhs = 0.0;  ///< d(y, X)
    double rhs = 0.0;  ///< rho - mu_hat * delta
    bool holds = false;
    std::size_t samples = 0;
    bool empirical = true;
};

namespace detail {

/// Points P_X(x + t (target - x)) for `count` evenly spaced t, stopping at distance delta from x.
inline void append_segment(const SetSpec& X, const Vector& x, Vector target, double delta, std::size_t count,
                           std::vector<Vector>& out) {
    const double len = distance(x, target);
    if (len == 0.0) return;
    const double reach = std::min(1.0, delta / len);
    for (std::size_t k = 1; k <= count; ++k) {
        Vector probe = x;
        probe.add_scaled(reach * static_cast<double>(k) / static_cast<double>(count), target - x);
        out.push_back(project(X, probe).point);
    }
}

}  // namespace detail

/**
 * mu_hat is the minimum over sampled w in X, |w - x| <= delta, |w - y| <= rho,
 * of d((y - w)/|y - w|, N_X(w)). Candidates: x, P_X(y), points on the path toward P_X(y), seeded neighbours of x
 * and their radial extensions to the delta-sphere (projected onto X).
 * Sampling can only overestimate the true infimum.
 */
inline DecreaseCheck distance_decrease_check(const SetSpec& X, const Vector& x, const Vector& y, double delta,
                                             std::size_t samples, std::uint64_t seed) {
    detail::require_member(X, x, "distance_decrease_check");
    if (!(delta > 0.0)) throw precondition_error("distance_decrease_check: delta must be positive");
    const double dy = distance(X, y);
    if (dy <= tol::membership) throw precondition_error("distance_decrease_check: y must lie outside X");

    DecreaseCheck out;
    out.delta = delta;
    out.rho = distance(x, y);
    out.lhs = dy;

    std::vector<Vector> candidates{x, project(X, y).point};
    detail::append_segment(X, x, candidates.back(), delta, 64, candidates);
    if (samples > 0) {
        for (const Vector& w : sample_near(X, x, delta, samples, seed)) {
            candidates.push_back(w);
            Vector edge = x;
            edge.add_scaled(delta, normalize(w - x));
            candidates.push_back(project(X, edge).point);
        }
    }
    const double slack = 1e-12;
    out.mu_hat = std::numeric_limits<double>::infinity();
    for (const Vector& w : candidates) {
        if (distance(w, x) > delta * (1.0 + slack) + slack || distance(w, y) > out.rho * (1.0 + slack)) continue;
        const double d = distance_to_cone(normalize(y - w), proximal_normal_cone(X, w));
        out.mu_hat = std::min(out.mu_hat, d);
        ++out.samples;
    }
    out.rhs = out.rho - out.mu_hat * delta;
    out.holds = out.lhs <= out.rhs + 1e-9;
    return out;
}

/// Check of the level-set error bound for f = |. - y| + delta_X.
struct ErrorBoundCheck {
    double K_hat = 0.0;
    double alpha = 0.0;
    double delta = 0.0;
    double f_x = 0.0;
    double level_distance = std::numeric_limits<double>::infinity();  ///< sampled d(x, [f <= alpha])
    double bound = std::numeric_limits<double>::infinity();           ///< (f(x) - alpha) / K_hat
    bool hypothesis_met = false;  ///< K_hat > (f(x) - alpha) / delta
    bool holds = false;
    std::size_t samples = 0;
    bool empirical = true;
};

inline ErrorBoundCheck error_bound_check(const SetSpec& X, const Vector& y, const Vector& x, double alpha,
                                         double delta, std::size_t samples, std::uint64_t seed) {
    detail::require_member(X, x, "error_bound_check");
    if (!(delta > 0.0)) throw precondition_error("error_bound_check: delta must be positive");
    const double fx = distance(x, y);
    if (!(alpha < fx)) throw precondition_error("error_bound_check: alpha must be below f(x)");

    ErrorBoundCheck out;
    out.alpha = alpha;
    out.delta = delta;
    out.f_x = fx;

    // Slope infimum over the slab alpha < f(w) <= f(x), |w - x| <= delta.
    std::vector<Vector> candidates{x};
    detail::append_segment(X, x, project(X, y).point, delta, 256, candidates);
    if (samples > 0) {
        for (const Vector& w : sample_near(X, x, delta, samples, seed)) {
            candidates.push_back(w);
            Vector edge = x;
            edge.add_scaled(delta, normalize(w - x));
            candidates.push_back(project(X, edge).point);
        }
    }
    const double slack = 1e-12;
    out.K_hat = std::numeric_limits<double>::infinity();
    for (const Vector& w : candidates) {
        const double fw = distance(w, y);
        if (!(fw > alpha) || fw > fx * (1.0 + slack) || distance(w, x) > delta * (1.0 + slack) + slack) continue;
        out.K_hat = std::min(out.K_hat, limiting_marginal_slope_x(X, y, w));
        ++out.samples;
    }
    out.hypothesis_met = out.K_hat > (fx - alpha) / delta;
    if (!out.hypothesis_met) return out;
    out.bound = (fx - alpha) / out.K_hat;

    // Level set {w in X : |w - y| <= alpha}: feasible candidates, then bisection
    // along the path t -> P_X(x + t (w - x)) for the most promising ones.
    const Vector anchor = project(X, y).point;
    std::vector<Vector> feasible;
    if (distance(anchor, y) <= alpha) feasible.push_back(anchor);
    if (samples > 0 && alpha > 0.0) {
        for (Vector& w : sample_near(X, anchor, alpha, samples, derive_seed(seed, 3))) {
            if (distance(w, y) <= alpha) feasible.push_back(std::move(w));
        }
    }
    std::stable_sort(feasible.begin() + (feasible.empty() ? 0 : 1), feasible.end(),
                     [&](const Vector& a, const Vector& b) { return distance(a, x) < distance(b, x); });
    if (feasible.size() > 17) feasible.resize(17);
    for (const Vector& w : feasible) {
        double lo = 0.0;
        double hi = 1.0;
        Vector best = w;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            Vector probe = x;
            probe.add_scaled(mid, w - x);
            Vector p = project(X, probe).point;
            if (distance(p, y) <= alpha) {
                hi = mid;
                best = std::move(p);
            } else {
                lo = mid;
            }
        }
        out.level_distance = std::min(out.level_distance, distance(best, x));
    }
    out.holds = out.level_distance <= out.bound + 1e-9;
    return out;
}

// ---------------------------------------------------------------------------
// Empirical KL envelope.
// ---------------------------------------------------------------------------

struct KLBin {
    double lo = 0.0;
    double hi = 0.0;
    std::optional<double> min_slope;  ///< absent when no pair fell in the bin
    std::size_t count = 0;
};

struct KLProfile {
    std::vector<KLBin> bins;
    double rho_lo = 0.0;
    double rho_hi = 0.0;
    std::size_t pairs_evaluated = 0;
};

/**
 * Lower envelope of the coupling slope as a function of the gap |x - y|.
 * `pairs` points are drawn from each set near the centre's projections; all
 * cross pairs with x in X\Y, y in Y\X, plus each point paired with its
 * projection onto the other set, are binned by gap (<= radius) on a log scale
 * over [smallest gap, radius].
 */
inline KLProfile kl_profile(const SetSpec& X, const SetSpec& Y, const Vector& center, double radius, std::size_t bins,
                            std::size_t pairs, std::uint64_t seed) {
    if (bins == 0 || pairs < bins) throw precondition_error("kl_profile: need pairs >= bins >= 1");
    auto gather = [&](const SetSpec& S, const SetSpec& other, std::uint64_t s) {
        const Vector anchor = project(S, center).point;
        std::vector<Vector> pts{anchor};
        for (Vector& p : sample_near(S, anchor, radius, pairs, s)) pts.push_back(std::move(p));
        std::vector<Vector> kept;
        for (Vector& p : pts) {
            if (distance(p, center) <= 2.0 * radius && !contains(other, p, tol::membership)) kept.push_back(std::move(p));
        }
        return kept;
    };
    const auto xs = gather(X, Y, derive_seed(seed, 0));
    const auto ys = gather(Y, X, derive_seed(seed, 1));
    std::vector<ConeModel> neg_nx;
    std::vector<ConeModel> ny;
    for (const Vector& x : xs) neg_nx.push_back(negate_cone(proximal_normal_cone(X, x)));
    for (const Vector& y : ys) ny.push_back(proximal_normal_cone(Y, y));

    std::vector<std::pair<double, double>> observed;  // (gap, slope)
    auto observe = [&](const Vector& x, const Vector& y, const ConeModel& nx_neg, const ConeModel& n_y) {
        const double gap = distance(x, y);
        if (gap <= 0.0 || gap > radius) return;
        const Vector u = normalize(x - y);
        const double sx = distance_to_cone(u, nx_neg);
        const double sy = distance_to_cone(u, n_y);
        observed.emplace_back(gap, std::sqrt(sx * sx + sy * sy));
    };
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < ys.size(); ++j) observe(xs[i], ys[j], neg_nx[i], ny[j]);
    }
    // Projection-coupled pairs, the ones alternating projections visit.
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const Vector y = project(Y, xs[i]).point;
        if (!contains(X, y, tol::membership)) observe(xs[i], y, neg_nx[i], proximal_normal_cone(Y, y));
    }
    for (std::size_t j = 0; j < ys.size(); ++j) {
        const Vector x = project(X, ys[j]).point;
        if (!contains(Y, x, tol::membership)) observe(x, ys[j], negate_cone(proximal_normal_cone(X, x)), ny[j]);
    }

    KLProfile out;
    out.pairs_evaluated = observed.size();
    out.rho_hi = radius;
    double gap_min = radius;
    for (const auto& [g, s] : observed) gap_min = std::min(gap_min, g);
    out.rho_lo = gap_min;
    const double span = std::log(radius / gap_min);
    for (std::size_t b = 0; b < bins; ++b) {
        KLBin bin;
        bin.lo = gap_min * std::exp(span * static_cast<double>(b) / static_cast<double>(bins));
        bin.hi = gap_min * std::exp(span * static_cast<double>(b + 1) / static_cast<double>(bins));
        out.bins.push_back(bin);
    }
    if (!out.bins.empty()) out.bins.back().hi = radius;
    for (const auto& [g, s] : observed) {
        std::size_t b = 0;
        if (span > 0.0) {
            b = static_cast<std::size_t>(std::floor(static_cast<double>(bins) * std::log(g / gap_min) / span));
            b = std::min(b, bins - 1);
        }
        KLBin& bin = out.bins[b];
        bin.min_slope = bin.min_slope ? std::min(*bin.min_slope, s) : s;
        ++bin.count;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Combined report.
// ---------------------------------------------------------------------------

struct TransversalityOptions {
    double radius = 0.1;      ///< neighbourhood for pair sampling
    std::size_t pairs = 128;  ///< points drawn from each set for intrinsic_kappa
    std::size_t samples = 0;  ///< unit-sphere samples; 0 picks by dimension
    std::uint64_t seed = 0;
};

struct TransversalityReport {
    Vector at;
    double kappa_intrinsic_hat = 1.0;
    bool intrinsic_vacuous = true;
    std::size_t intrinsic_pairs = 0;
    double kappa_point = 0.0;
    double theta = std::numbers::pi;
    double kappa_relative = 0.0;
    std::size_t relative_rank = 0;
    double inherent = std::numbers::pi;
    TransversalityOptions options;
    std::size_t samples = 0;
};

inline TransversalityReport transversality_report(const SetSpec& X, const SetSpec& Y, const Vector& z,
                                                  const TransversalityOptions& opt) {
    TransversalityReport rep;
    rep.at = z;
    rep.options = opt;
    const KappaEstimate k = intrinsic_kappa(X, Y, z, opt.radius, opt.pairs, derive_seed(opt.seed, 100));
    rep.kappa_intrinsic_hat = k.value;
    rep.intrinsic_vacuous = k.vacuous;
    rep.intrinsic_pairs = k.pairs;
    const PointTransversality pt = point_transversality(X, Y, z, opt.samples, derive_seed(opt.seed, 101));
    rep.kappa_point = pt.kappa_point;
    rep.theta = pt.theta;
    rep.samples = pt.samples;
    const RelativeTransversality rt = relative_transversality(X, Y, z, opt.samples, derive_seed(opt.seed, 101));
    rep.kappa_relative = rt.kappa_relative;
    rep.relative_rank = rt.rank;
    rep.inherent = inherent_angle(X, Y, z, opt.radius, std::min<std::size_t>(opt.pairs, 64), derive_seed(opt.seed, 102)).angle;
    return rep;
}

}  // namespace apkit
