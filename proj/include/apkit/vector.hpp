#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "apkit/tolerances.hpp"

namespace apkit {

/**
 * @brief Dense point of R^n.
 *
 * Thin value type over std::vector<double> with the handful of operations the
 * projection and cone code needs. Dimension is fixed at construction.
 */
class Vector {
public:
    Vector() = default;
    explicit Vector(std::size_t dim, double fill = 0.0) : data_(dim, fill) {}
    Vector(std::initializer_list<double> values) : data_(values) {}
    explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

    static Vector unit(std::size_t dim, std::size_t axis) {
        Vector e(dim);
        e[axis] = 1.0;
        return e;
    }

    [[nodiscard]] std::size_t dim() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    [[nodiscard]] auto begin() noexcept { return data_.begin(); }
    [[nodiscard]] auto end() noexcept { return data_.end(); }
    [[nodiscard]] auto begin() const noexcept { return data_.begin(); }
    [[nodiscard]] auto end() const noexcept { return data_.end(); }

    [[nodiscard]] std::span<const double> values() const noexcept { return data_; }
    [[nodiscard]] const std::vector<double>& raw() const noexcept { return data_; }

    [[nodiscard]] bool finite() const noexcept {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    Vector& operator+=(const Vector& other) {
        require_same_dim(other);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
        return *this;
    }
    Vector& operator-=(const Vector& other) {
        require_same_dim(other);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
        return *this;
    }
    Vector& operator*=(double s) noexcept {
        for (double& v : data_) v *= s;
        return *this;
    }
    Vector& operator/=(double s) noexcept {
        for (double& v : data_) v /= s;
        return *this;
    }

    /// In-place `this += s * other`.
    Vector& add_scaled(double s, const Vector& other) {
        require_same_dim(other);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
        return *this;
    }

    friend Vector operator+(Vector a, const Vector& b) { return a += b; }
    friend Vector operator-(Vector a, const Vector& b) { return a -= b; }
    friend Vector operator-(Vector a) { return a *= -1.0; }
    friend Vector operator*(Vector a, double s) noexcept { return a *= s; }
    friend Vector operator*(double s, Vector a) noexcept { return a *= s; }
    friend Vector operator/(Vector a, double s) noexcept { return a /= s; }

    friend bool operator==(const Vector&, const Vector&) = default;

    friend std::ostream& operator<<(std::ostream& os, const Vector& v) {
        os << '(';
        for (std::size_t i = 0; i < v.dim(); ++i) os << (i ? ", " : "") << v[i];
        return os << ')';
    }

    void require_same_dim(const Vector& other) const {
        if (other.dim() != dim()) {
            throw dimension_error("dimension mismatch: " + std::to_string(dim()) + " vs " +
                                  std::to_string(other.dim()));
        }
    }

private:
    std::vector<double> data_;
};

inline double dot(const Vector& a, const Vector& b) {
    a.require_same_dim(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vector& v) {
    // Scaled two-pass sum keeps tiny gaps (1e-200 and below) from underflowing.
    double scale = 0.0;
    for (double x : v) scale = std::max(scale, std::abs(x));
    if (scale == 0.0 || !std::isfinite(scale)) return scale;
    double s = 0.0;
    for (double x : v) {
        const double r = x / scale;
        s += r * r;
    }
    return scale * std::sqrt(s);
}

inline double distance(const Vector& a, const Vector& b) { return norm(a - b); }

/// The normalization map v -> v/|v|.
inline Vector normalize(const Vector& v) {
    const double n = norm(v);
    if (n == 0.0) throw std::domain_error("normalization of zero");
    // Already unit up to rounding: return unchanged so the map is idempotent.
    if (std::abs(n - 1.0) <= 8.0 * std::numeric_limits<double>::epsilon()) return v;
    return v / n;
}

/// Angle in [0, pi] between two nonzero vectors.
inline double angle_between(const Vector& u, const Vector& v) {
    const double c = dot(normalize(u), normalize(v));
    return std::acos(std::clamp(c, -1.0, 1.0));
}

/// Distance from u to the closed ray R_+ q (q nonzero).
inline double distance_to_ray(const Vector& u, const Vector& q) {
    const Vector qhat = normalize(q);
    const double t = dot(u, qhat);
    if (t <= 0.0) return norm(u);
    return norm(u - t * qhat);
}

struct RayLemmaResult {
    double lhs;    ///< d(p^, R_+ q)
    double rhs;    ///< |p - q| / |q|
    double sharp;  ///< |p^ - <p^, q^> q^|, the tighter left side
    bool holds;
};

/// Evaluates d(p^, R_+ q) <= |p - q| / |q| for nonzero p, q.
inline RayLemmaResult ray_distance_lemma(const Vector& p, const Vector& q) {
    const Vector phat = normalize(p);
    const Vector qhat = normalize(q);
    RayLemmaResult r{};
    r.lhs = distance_to_ray(phat, q);
    r.rhs = norm(p - q) / norm(q);
    r.sharp = norm(phat - dot(phat, qhat) * qhat);
    r.holds = r.lhs <= r.rhs + tol::identity;
    return r;
}

}  // namespace apkit
