#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "apkit/basis.hpp"
#include "apkit/cone.hpp"
#include "apkit/random.hpp"
#include "apkit/vector.hpp"

namespace apkit {

class SetSpec;

/// base + span(directions); directions orthonormal.
struct Affine {
    Vector base;
    std::vector<Vector> directions;
    std::vector<Vector> normals;  // orthonormal complement, filled by SetSpec::affine
};

/// Componentwise lo <= z <= hi; infinite bounds allowed.
struct Box {
    Vector lo;
    Vector hi;
};

struct Ball {
    Vector center;
    double radius;
};

struct Sphere {
    Vector center;
    double radius;
};

/// {z : <normal, z> <= offset}.
struct HalfSpace {
    Vector normal;
    double offset;
};

/// Vectors of R^dim with at most k nonzero entries.
struct Sparsity {
    std::size_t dim;
    std::size_t k;
};

/// Finite union of convex sets.
struct UnionOf {
    std::vector<SetSpec> members;
};

/// inner + shift.
struct Translated {
    std::shared_ptr<const SetSpec> inner;
    Vector shift;
};

/**
 * @brief Immutable descriptor of a closed subset of R^n.
 *
 * Instances are built through the validating factories below; the variant is
 * exposed read-only for visitors (projection, cones, serialization).
 */
class SetSpec {
public:
    using Variant = std::variant<Affine, Box, Ball, Sphere, HalfSpace, Sparsity, UnionOf, Translated>;

    static SetSpec affine(Vector base, std::vector<Vector> directions) {
        require_dim(base.dim());
        for (const Vector& d : directions) {
            if (d.dim() != base.dim()) throw dimension_error("affine direction dimension mismatch");
        }
        if (!is_orthonormal(directions)) throw precondition_error("affine directions are not orthonormal");
        if (directions.size() > base.dim()) throw precondition_error("too many affine directions");
        std::vector<Vector> normals = orthonormal_complement(directions, base.dim());
        return SetSpec(Affine{std::move(base), std::move(directions), std::move(normals)});
    }

    static SetSpec box(Vector lo, Vector hi) {
        require_dim(lo.dim());
        lo.require_same_dim(hi);
        for (std::size_t i = 0; i < lo.dim(); ++i) {
            if (std::isnan(lo[i]) || std::isnan(hi[i]) || lo[i] > hi[i] || lo[i] == INFINITY ||
                hi[i] == -INFINITY) {
                throw precondition_error("box requires lo <= hi componentwise");
            }
        }
        return SetSpec(Box{std::move(lo), std::move(hi)});
    }

    static SetSpec ball(Vector center, double radius) {
        require_dim(center.dim());
        if (!(radius > 0.0) || !std::isfinite(radius)) throw precondition_error("ball radius must be positive");
        return SetSpec(Ball{std::move(center), radius});
    }

    static SetSpec sphere(Vector center, double radius) {
        require_dim(center.dim());
        if (!(radius > 0.0) || !std::isfinite(radius)) throw precondition_error("sphere radius must be positive");
        return SetSpec(Sphere{std::move(center), radius});
    }

    static SetSpec halfspace(Vector normal, double offset) {
        require_dim(normal.dim());
        if (norm(normal) == 0.0) throw precondition_error("halfspace normal must be nonzero");
        if (!std::isfinite(offset)) throw precondition_error("halfspace offset must be finite");
        return SetSpec(HalfSpace{std::move(normal), offset});
    }

    static SetSpec sparsity(std::size_t dim, std::size_t k) {
        require_dim(dim);
        if (k > dim) throw precondition_error("sparsity bound k exceeds dimension");
        return SetSpec(Sparsity{dim, k});
    }

    static SetSpec union_of(std::vector<SetSpec> members) {
        if (members.empty()) throw precondition_error("union needs at least one member");
        for (const SetSpec& m : members) {
            if (m.dim() != members.front().dim()) throw dimension_error("union members disagree on dimension");
            if (!m.is_convex()) throw precondition_error("union members must be convex");
        }
        return SetSpec(UnionOf{std::move(members)});
    }

    static SetSpec translated(SetSpec inner, Vector shift) {
        if (inner.dim() != shift.dim()) throw dimension_error("translation dimension mismatch");
        return SetSpec(Translated{std::make_shared<const SetSpec>(std::move(inner)), std::move(shift)});
    }

    [[nodiscard]] const Variant& variant() const noexcept { return v_; }

    [[nodiscard]] std::size_t dim() const {
        return std::visit(
            [](const auto& s) -> std::size_t {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Affine>) return s.base.dim();
                else if constexpr (std::is_same_v<T, Box>) return s.lo.dim();
                else if constexpr (std::is_same_v<T, Ball> || std::is_same_v<T, Sphere>) return s.center.dim();
                else if constexpr (std::is_same_v<T, HalfSpace>) return s.normal.dim();
                else if constexpr (std::is_same_v<T, Sparsity>) return s.dim;
                else if constexpr (std::is_same_v<T, UnionOf>) return s.members.front().dim();
                else return s.shift.dim();
            },
            v_);
    }

    [[nodiscard]] bool is_convex() const {
        return std::visit(
            [](const auto& s) -> bool {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Sphere>) return false;
                else if constexpr (std::is_same_v<T, Sparsity>) return s.k == 0 || s.k == s.dim;
                else if constexpr (std::is_same_v<T, UnionOf>) return s.members.size() == 1;
                else if constexpr (std::is_same_v<T, Translated>) return s.inner->is_convex();
                else return true;
            },
            v_);
    }

    [[nodiscard]] std::string_view kind_name() const {
        static constexpr std::string_view names[] = {"affine",   "box",      "ball",  "sphere",
                                                     "halfspace", "sparsity", "union", "translated"};
        return names[v_.index()];
    }

    friend bool operator==(const SetSpec& a, const SetSpec& b) {
        if (a.v_.index() != b.v_.index()) return false;
        return std::visit(
            [&](const auto& s) -> bool {
                using T = std::decay_t<decltype(s)>;
                const T& t = std::get<T>(b.v_);
                if constexpr (std::is_same_v<T, Affine>) return s.base == t.base && s.directions == t.directions;
                else if constexpr (std::is_same_v<T, Box>) return s.lo == t.lo && s.hi == t.hi;
                else if constexpr (std::is_same_v<T, Ball> || std::is_same_v<T, Sphere>)
                    return s.center == t.center && s.radius == t.radius;
                else if constexpr (std::is_same_v<T, HalfSpace>) return s.normal == t.normal && s.offset == t.offset;
                else if constexpr (std::is_same_v<T, Sparsity>) return s.dim == t.dim && s.k == t.k;
                else if constexpr (std::is_same_v<T, UnionOf>) return s.members == t.members;
                else return s.shift == t.shift && *s.inner == *t.inner;
            },
            a.v_);
    }

private:
    explicit SetSpec(Variant v) : v_(std::move(v)) {}

    static void require_dim(std::size_t dim) {
        if (dim == 0) throw precondition_error("set dimension must be positive");
    }

    Variant v_;
};

/// Canonical nearest point of a set to a query.
struct ProjectionResult {
    Vector point;
    double distance = 0.0;
    bool tie = false;  ///< another nearest point exists within tol::tie relative distance
};

namespace detail {

inline void check_query(const SetSpec& s, const Vector& z) {
    if (s.dim() != z.dim()) {
        throw dimension_error("set has dimension " + std::to_string(s.dim()) + ", point has " +
                              std::to_string(z.dim()));
    }
}

inline ProjectionResult finish(const Vector& z, Vector p, bool tie = false) {
    const double d = distance(z, p);
    return {std::move(p), d, tie};
}

inline ProjectionResult project_sparsity(const Sparsity& s, const Vector& z) {
    std::vector<std::size_t> order(s.dim);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Largest magnitude first; equal magnitudes keep the lowest index.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(z[a]) > std::abs(z[b]); });
    Vector p(s.dim);
    for (std::size_t i = 0; i < s.k; ++i) p[order[i]] = z[order[i]];
    ProjectionResult r = finish(z, std::move(p));
    if (s.k > 0 && s.k < s.dim) {
        const double kept = std::abs(z[order[s.k - 1]]);
        const double dropped = std::abs(z[order[s.k]]);
        if (dropped > 0.0) {
            const double alt = std::sqrt(std::max(0.0, r.distance * r.distance - dropped * dropped + kept * kept));
            r.tie = alt - r.distance <= tol::tie * r.distance;
        }
    }
    return r;
}

}  // namespace detail

/// Global nearest point of S to z with deterministic tie-breaking.
inline ProjectionResult project(const SetSpec& set, const Vector& z) {
    detail::check_query(set, z);
    return std::visit(
        [&](const auto& s) -> ProjectionResult {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Affine>) {
                return detail::finish(z, s.base + project_onto_span(s.directions, z - s.base));
            } else if constexpr (std::is_same_v<T, Box>) {
                Vector p = z;
                for (std::size_t i = 0; i < p.dim(); ++i) p[i] = std::clamp(p[i], s.lo[i], s.hi[i]);
                return detail::finish(z, std::move(p));
            } else if constexpr (std::is_same_v<T, Ball>) {
                const Vector offset = z - s.center;
                const double r = norm(offset);
                if (r <= s.radius) return ProjectionResult{z, 0.0, false};
                return detail::finish(z, s.center + (s.radius / r) * offset);
            } else if constexpr (std::is_same_v<T, Sphere>) {
                const Vector offset = z - s.center;
                const double r = norm(offset);
                const bool tie = r <= 0.5 * tol::tie * s.radius;
                if (r == 0.0) return detail::finish(z, s.center + s.radius * Vector::unit(z.dim(), 0), true);
                return detail::finish(z, s.center + (s.radius / r) * offset, tie);
            } else if constexpr (std::is_same_v<T, HalfSpace>) {
                const double excess = dot(s.normal, z) - s.offset;
                if (excess <= 0.0) return ProjectionResult{z, 0.0, false};
                Vector p = z;
                p.add_scaled(-excess / dot(s.normal, s.normal), s.normal);
                return detail::finish(z, std::move(p));
            } else if constexpr (std::is_same_v<T, Sparsity>) {
                return detail::project_sparsity(s, z);
            } else if constexpr (std::is_same_v<T, UnionOf>) {
                std::vector<ProjectionResult> candidates;
                candidates.reserve(s.members.size());
                std::size_t best = 0;
                for (std::size_t i = 0; i < s.members.size(); ++i) {
                    candidates.push_back(project(s.members[i], z));
                    if (candidates[i].distance < candidates[best].distance) best = i;
                }
                ProjectionResult r = candidates[best];
                const double slack = tol::tie * r.distance;
                for (std::size_t i = 0; i < candidates.size() && !r.tie; ++i) {
                    if (i == best || candidates[i].distance > r.distance + slack) continue;
                    if (distance(candidates[i].point, r.point) > tol::membership * (1.0 + norm(r.point))) r.tie = true;
                }
                return r;
            } else {
                ProjectionResult r = project(*s.inner, z - s.shift);
                r.point += s.shift;
                return r;
            }
        },
        set.variant());
}

inline double distance(const SetSpec& set, const Vector& z) { return project(set, z).distance; }

inline bool contains(const SetSpec& set, const Vector& z, double tolerance) {
    return distance(set, z) <= tolerance;
}

/// Y - (-e): the set shifted by e.
inline SetSpec translate(const SetSpec& set, const Vector& shift) { return SetSpec::translated(set, shift); }

/// True when x is recovered as a nearest point of x + t u.
inline bool is_proximal_normal(const SetSpec& set, const Vector& x, const Vector& u, double t) {
    detail::check_query(set, x);
    detail::check_query(set, u);
    if (!(t > 0.0)) throw precondition_error("proximal normal test needs t > 0");
    if (std::abs(norm(u) - 1.0) > tol::precondition) throw precondition_error("proximal normal test needs |u| = 1");
    Vector probe = x;
    probe.add_scaled(t, u);
    return distance(project(set, probe).point, x) <= 1e-8 * (1.0 + norm(x));
}

/// Default probe scale for proximal-normal verification.
inline double default_probe_scale(const Vector& x) { return 1e-3 * (1.0 + norm(x)); }

namespace detail {

inline ConeModel sparsity_cone(const Sparsity& s, const Vector& x) {
    const double cut = tol::membership * (1.0 + norm(x));
    std::vector<std::size_t> order(s.dim);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(x[a]) > std::abs(x[b]); });
    std::vector<bool> in_support(s.dim, false);
    std::size_t support = 0;
    for (std::size_t i = 0; i < s.k; ++i) {
        if (std::abs(x[order[i]]) > cut) {
            in_support[order[i]] = true;
            ++support;
        }
    }
    auto complement_of = [&](const std::vector<bool>& chosen) {
        std::vector<Vector> basis;
        for (std::size_t j = 0; j < s.dim; ++j) {
            if (!chosen[j]) basis.push_back(Vector::unit(s.dim, j));
        }
        return ConePiece::subspace(std::move(basis), s.dim);
    };
    if (support == s.k) return ConeModel(complement_of(in_support));

    // Fewer than k nonzeros: one piece per size-k superset of the support.
    std::vector<std::size_t> free;
    for (std::size_t j = 0; j < s.dim; ++j) {
        if (!in_support[j]) free.push_back(j);
    }
    const std::size_t extra = s.k - support;
    std::vector<bool> pick(free.size(), false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(extra), true);
    std::vector<ConePiece> pieces;
    do {
        if (pieces.size() > 100000) throw numerical_error("sparsity normal cone has too many pieces");
        std::vector<bool> chosen = in_support;
        for (std::size_t i = 0; i < free.size(); ++i) {
            if (pick[i]) chosen[free[i]] = true;
        }
        pieces.push_back(complement_of(chosen));
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return ConeModel(std::move(pieces));
}

inline ConeModel cone_at(const SetSpec& set, const Vector& x, bool limiting = false);

inline ConeModel union_cone(const SetSpec& whole, const UnionOf& u, const Vector& x, bool limiting) {
    const std::size_t dim = x.dim();
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < u.members.size(); ++i) {
        if (contains(u.members[i], x, tol::membership * (1.0 + norm(x)))) active.push_back(i);
    }
    if (active.size() == 1) return cone_at(u.members[active.front()], x, limiting);
    if (active.empty()) {
        // Within the precondition slack but outside every member's tight tolerance.
        std::size_t best = 0;
        for (std::size_t i = 1; i < u.members.size(); ++i) {
            if (distance(u.members[i], x) < distance(u.members[best], x)) best = i;
        }
        return cone_at(u.members[best], project(u.members[best], x).point, limiting);
    }
    // Junction: the limiting cone is the union of the member cones; the proximal
    // cone keeps only member pieces whose directions pass the proximal test.
    const double t = default_probe_scale(x);
    std::vector<ConePiece> kept;
    for (std::size_t i : active) {
        const ConeModel member = cone_at(u.members[i], x, limiting);
        for (const ConePiece& piece : member.pieces()) {
            if (piece.is_zero()) continue;
            if (limiting) {
                kept.push_back(piece);
                continue;
            }
            const auto dirs = piece.representative_directions();
            const bool verified = std::all_of(dirs.begin(), dirs.end(),
                                              [&](const Vector& d) { return is_proximal_normal(whole, x, d, t); });
            if (verified) kept.push_back(piece);
        }
    }
    if (kept.empty()) return ConeModel::zero(dim);
    return ConeModel(std::move(kept));
}

inline ConeModel cone_at(const SetSpec& set, const Vector& x, bool limiting) {
    const std::size_t dim = x.dim();
    return std::visit(
        [&](const auto& s) -> ConeModel {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Affine>) {
                return ConeModel(ConePiece::subspace(s.normals, dim));
            } else if constexpr (std::is_same_v<T, Box>) {
                std::vector<Vector> basis;
                std::vector<Vector> inequalities;
                for (std::size_t i = 0; i < dim; ++i) {
                    const bool at_hi = std::isfinite(s.hi[i]) && x[i] >= s.hi[i] - tol::membership * (1.0 + std::abs(s.hi[i]));
                    const bool at_lo = std::isfinite(s.lo[i]) && x[i] <= s.lo[i] + tol::membership * (1.0 + std::abs(s.lo[i]));
                    if (!at_hi && !at_lo) continue;
                    basis.push_back(Vector::unit(dim, i));
                    if (at_hi && at_lo) continue;  // degenerate interval: the whole axis is normal
                    // at the upper face v_i >= 0, i.e. <v, -e_i> <= 0
                    inequalities.push_back((at_hi ? -1.0 : 1.0) * Vector::unit(dim, i));
                }
                return ConeModel(ConePiece::halfspace_cone(std::move(basis), std::move(inequalities), dim));
            } else if constexpr (std::is_same_v<T, Ball>) {
                const Vector offset = x - s.center;
                if (norm(offset) >= s.radius - tol::membership * (1.0 + s.radius)) return ConeModel(ConePiece::ray(offset));
                return ConeModel::zero(dim);
            } else if constexpr (std::is_same_v<T, Sphere>) {
                return ConeModel(ConePiece::subspace({normalize(x - s.center)}, dim));
            } else if constexpr (std::is_same_v<T, HalfSpace>) {
                const double slack = s.offset - dot(s.normal, x);
                if (slack <= tol::membership * (1.0 + std::abs(s.offset)) * norm(s.normal)) {
                    return ConeModel(ConePiece::ray(s.normal));
                }
                return ConeModel::zero(dim);
            } else if constexpr (std::is_same_v<T, Sparsity>) {
                return sparsity_cone(s, x);
            } else if constexpr (std::is_same_v<T, UnionOf>) {
                return union_cone(set, s, x, limiting);
            } else {
                return cone_at(*s.inner, x - s.shift, limiting);
            }
        },
        set.variant());
}

}  // namespace detail

/**
 * Normal cone of S at x.
 *
 * Exact proximal normal cone for every variant except two documented cases:
 * Sparsity points with fewer than k nonzeros get the limiting cone (union of
 * complements of the size-k supersets of the support), and union junction
 * points keep only member pieces that pass is_proximal_normal.
 */
inline ConeModel proximal_normal_cone(const SetSpec& set, const Vector& x) {
    detail::check_query(set, x);
    if (!contains(set, x, tol::precondition)) throw precondition_error("proximal_normal_cone: point not in set");
    return detail::cone_at(set, x);
}

/// Limiting normal cone: as proximal_normal_cone, but union junctions keep every active member piece.
inline ConeModel limiting_normal_cone(const SetSpec& set, const Vector& x) {
    detail::check_query(set, x);
    if (!contains(set, x, tol::precondition)) throw precondition_error("limiting_normal_cone: point not in set");
    return detail::cone_at(set, x, true);
}

/**
 * Seeded points of S near x: projections of x + r g with g a uniform unit
 * direction and r uniform in (0, radius]. Points equal to x are dropped, so
 * fewer than `count` points may come back.
 */
inline std::vector<Vector> sample_near(const SetSpec& set, const Vector& x, double radius, std::size_t count,
                                       std::uint64_t seed) {
    detail::check_query(set, x);
    if (!contains(set, x, tol::precondition)) throw precondition_error("sample_near: point not in set");
    if (!(radius > 0.0)) throw precondition_error("sample_near needs radius > 0");
    if (count == 0) throw precondition_error("sample_near needs count >= 1");
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double same = 1e-14 * (1.0 + norm(x));
    std::vector<Vector> out;
    out.reserve(count);
    for (std::size_t attempt = 0; attempt < 4 * count && out.size() < count; ++attempt) {
        const double r = radius * (1.0 - unif(rng));
        Vector probe = x;
        probe.add_scaled(r, random_unit(rng, x.dim()));
        Vector p = project(set, probe).point;
        if (distance(p, x) > same) out.push_back(std::move(p));
    }
    return out;
}

}  // namespace apkit
