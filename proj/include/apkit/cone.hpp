#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "apkit/basis.hpp"
#include "apkit/vector.hpp"

namespace apkit {

/**
 * @brief One closed convex piece of a normal-cone model.
 *
 * - subspace: span of an orthonormal basis (an empty basis is the zero cone);
 * - ray: R_+ generator;
 * - halfspace_cone: {v in span(basis) : <v, g_j> <= 0 for every j}, where the
 *   g_j are unit, mutually orthogonal and lie in span(basis).
 *
 * Mutually orthogonal inequality directions decouple, so projecting onto the
 * subspace and then clipping each coefficient is an exact projection.
 */
class ConePiece {
public:
    enum class Kind { subspace, ray, halfspace_cone };

    static ConePiece zero(std::size_t dim) { return subspace({}, dim); }

    static ConePiece subspace(std::vector<Vector> basis, std::size_t dim) {
        ConePiece p(Kind::subspace, dim);
        for (const Vector& b : basis) p.check_dim(b);
        if (!is_orthonormal(basis)) throw precondition_error("cone subspace basis is not orthonormal");
        p.basis_ = std::move(basis);
        return p;
    }

    static ConePiece ray(const Vector& generator) {
        ConePiece p(Kind::ray, generator.dim());
        if (norm(generator) == 0.0) throw precondition_error("ray generator must be nonzero");
        p.generator_ = normalize(generator);
        return p;
    }

    static ConePiece halfspace_cone(std::vector<Vector> basis, std::vector<Vector> inequalities, std::size_t dim) {
        if (inequalities.empty()) return subspace(std::move(basis), dim);
        ConePiece p(Kind::halfspace_cone, dim);
        for (const Vector& b : basis) p.check_dim(b);
        for (const Vector& g : inequalities) p.check_dim(g);
        if (!is_orthonormal(basis)) throw precondition_error("cone subspace basis is not orthonormal");
        for (Vector& g : inequalities) {
            if (norm(g) == 0.0) throw precondition_error("inequality direction must be nonzero");
            g = normalize(g);
            if (norm(g - project_onto_span(basis, g)) > tol::membership) {
                throw precondition_error("inequality direction must lie in the cone subspace");
            }
        }
        if (!is_orthonormal(inequalities)) {
            throw precondition_error("inequality directions must be mutually orthogonal");
        }
        p.basis_ = std::move(basis);
        p.inequalities_ = std::move(inequalities);
        return p;
    }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] const std::vector<Vector>& basis() const noexcept { return basis_; }
    [[nodiscard]] const Vector& generator() const noexcept { return generator_; }
    [[nodiscard]] const std::vector<Vector>& inequalities() const noexcept { return inequalities_; }

    /// The piece contains no nonzero vector.
    [[nodiscard]] bool is_zero() const noexcept { return kind_ != Kind::ray && basis_.empty(); }

    /// Nearest point of the piece to u.
    [[nodiscard]] Vector project(const Vector& u) const {
        check_dim(u);
        switch (kind_) {
            case Kind::ray: {
                const double t = dot(u, generator_);
                return t > 0.0 ? t * generator_ : Vector(dim_);
            }
            case Kind::subspace:
                return project_onto_span(basis_, u);
            case Kind::halfspace_cone: {
                Vector p = project_onto_span(basis_, u);
                for (const Vector& g : inequalities_) {
                    const double c = dot(p, g);
                    if (c > 0.0) p.add_scaled(-c, g);
                }
                return p;
            }
        }
        return Vector(dim_);
    }

    [[nodiscard]] double distance(const Vector& u) const {
        if (kind_ == Kind::ray) {
            check_dim(u);
            const double t = dot(u, generator_);
            if (t <= 0.0) return norm(u);
        }
        return norm(u - project(u));
    }

    /**
     * Largest <v, w> over unit vectors w of the piece, for unit v; the cosine of
     * the smallest angle between v and the piece. Empty for the zero cone.
     */
    [[nodiscard]] std::optional<double> max_cosine(const Vector& v) const {
        check_dim(v);
        switch (kind_) {
            case Kind::ray:
                return dot(v, generator_);
            case Kind::subspace:
                if (basis_.empty()) return std::nullopt;
                return norm(project_onto_span(basis_, v));
            case Kind::halfspace_cone: {
                if (basis_.empty()) return std::nullopt;
                const Vector q = project(v);
                const double nq = norm(q);
                if (nq > 0.0) return nq;
                // v lies in the polar cone. With a free direction left in the
                // subspace the best unit vector is orthogonal to v; otherwise it
                // is -g_j for the least positive coefficient.
                if (basis_.size() > inequalities_.size()) return 0.0;
                const Vector p = project_onto_span(basis_, v);
                double least = std::numeric_limits<double>::infinity();
                for (const Vector& g : inequalities_) least = std::min(least, dot(p, g));
                return -least;
            }
        }
        return std::nullopt;
    }

    /// Reflection through the origin.
    [[nodiscard]] ConePiece negated() const {
        ConePiece p = *this;
        if (kind_ == Kind::ray) p.generator_ = -generator_;
        for (Vector& g : p.inequalities_) g = -g;
        return p;
    }

    /// A few unit vectors of the piece (axes of its subspace clipped into the cone).
    [[nodiscard]] std::vector<Vector> representative_directions() const {
        std::vector<Vector> out;
        if (kind_ == Kind::ray) {
            out.push_back(generator_);
            return out;
        }
        for (const Vector& b : basis_) {
            for (double sign : {1.0, -1.0}) {
                const Vector q = project(sign * b);
                if (norm(q) > 1e-12) out.push_back(normalize(q));
            }
        }
        for (const Vector& g : inequalities_) out.push_back(-g);
        return out;
    }

private:
    ConePiece(Kind kind, std::size_t dim) : kind_(kind), dim_(dim) {
        if (dim == 0) throw precondition_error("cone dimension must be positive");
    }

    void check_dim(const Vector& v) const {
        if (v.dim() != dim_) {
            throw dimension_error("cone piece has dimension " + std::to_string(dim_) + ", vector has " +
                                  std::to_string(v.dim()));
        }
    }

    Kind kind_;
    std::size_t dim_;
    std::vector<Vector> basis_;
    Vector generator_;
    std::vector<Vector> inequalities_;
};

/// Closed cone given as a finite union of convex pieces.
class ConeModel {
public:
    explicit ConeModel(std::vector<ConePiece> pieces) : pieces_(std::move(pieces)) {
        if (pieces_.empty()) throw precondition_error("cone model needs at least one piece");
        dim_ = pieces_.front().dim();
        for (const ConePiece& p : pieces_) {
            if (p.dim() != dim_) throw dimension_error("cone pieces disagree on ambient dimension");
        }
    }
    explicit ConeModel(ConePiece piece) : ConeModel(std::vector<ConePiece>{std::move(piece)}) {}

    static ConeModel zero(std::size_t dim) { return ConeModel(ConePiece::zero(dim)); }

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] const std::vector<ConePiece>& pieces() const noexcept { return pieces_; }

    [[nodiscard]] bool is_zero() const {
        return std::all_of(pieces_.begin(), pieces_.end(), [](const ConePiece& p) { return p.is_zero(); });
    }

    /// max over pieces of ConePiece::max_cosine.
    [[nodiscard]] std::optional<double> max_cosine(const Vector& v) const {
        std::optional<double> best;
        for (const ConePiece& p : pieces_) {
            if (auto c = p.max_cosine(v); c && (!best || *c > *best)) best = c;
        }
        return best;
    }

private:
    std::vector<ConePiece> pieces_;
    std::size_t dim_ = 0;
};

/// Euclidean distance from u to the cone (minimum over pieces).
inline double distance_to_cone(const Vector& u, const ConeModel& cone) {
    if (u.dim() != cone.dim()) throw dimension_error("distance_to_cone: dimension mismatch");
    double best = std::numeric_limits<double>::infinity();
    for (const ConePiece& p : cone.pieces()) best = std::min(best, p.distance(u));
    return best;
}

inline ConeModel negate_cone(const ConeModel& cone) {
    std::vector<ConePiece> pieces;
    pieces.reserve(cone.pieces().size());
    for (const ConePiece& p : cone.pieces()) pieces.push_back(p.negated());
    return ConeModel(std::move(pieces));
}

/// Membership test for the cone within tol::membership (scaled by |u|).
inline bool cone_contains(const ConeModel& cone, const Vector& u) {
    return distance_to_cone(u, cone) <= tol::membership * std::max(1.0, norm(u));
}

}  // namespace apkit
