#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "apkit/vector.hpp"

namespace apkit {

/// True when the vectors are pairwise orthogonal unit vectors within `tolerance`.
inline bool is_orthonormal(const std::vector<Vector>& basis, double tolerance = tol::membership) {
    for (std::size_t i = 0; i < basis.size(); ++i) {
        for (std::size_t j = i; j < basis.size(); ++j) {
            const double target = (i == j) ? 1.0 : 0.0;
            if (std::abs(dot(basis[i], basis[j]) - target) > tolerance) return false;
        }
    }
    return true;
}

/// Orthogonal projection of v onto span(basis); basis must be orthonormal.
inline Vector project_onto_span(const std::vector<Vector>& basis, const Vector& v) {
    Vector p(v.dim());
    for (const Vector& b : basis) p.add_scaled(dot(v, b), b);
    return p;
}

/**
 * Modified Gram-Schmidt with re-orthogonalization. Candidates whose residual
 * falls below `drop * |candidate|` are discarded.
 */
inline std::vector<Vector> gram_schmidt(const std::vector<Vector>& candidates, double drop = 1e-10) {
    std::vector<Vector> basis;
    for (const Vector& c : candidates) {
        const double scale = norm(c);
        if (scale == 0.0) continue;
        Vector r = c;
        for (int pass = 0; pass < 2; ++pass) {
            for (const Vector& b : basis) r.add_scaled(-dot(r, b), b);
        }
        const double n = norm(r);
        if (n > drop * scale) basis.push_back(r / n);
    }
    return basis;
}

/// Orthonormal basis of the orthogonal complement of span(basis) in R^dim.
inline std::vector<Vector> orthonormal_complement(const std::vector<Vector>& basis, std::size_t dim) {
    std::vector<Vector> all = basis;
    const std::size_t given = basis.size();
    for (std::size_t i = 0; i < dim; ++i) all.push_back(Vector::unit(dim, i));
    std::vector<Vector> full = gram_schmidt(all, 1e-8);
    if (full.size() <= given) return {};
    return {full.begin() + static_cast<std::ptrdiff_t>(given), full.end()};
}

/**
 * Orthonormal basis of span(vectors) by one-sided Jacobi SVD.
 *
 * Columns are rotated until mutually orthogonal; their norms are then the
 * singular values. Directions with singular value below
 * `relative_cut * sigma_max` are treated as zero.
 */
inline std::vector<Vector> span_basis(std::vector<Vector> columns, double relative_cut = tol::rank) {
    columns.erase(std::remove_if(columns.begin(), columns.end(), [](const Vector& v) { return norm(v) == 0.0; }),
                  columns.end());
    const std::size_t m = columns.size();
    if (m == 0) return {};
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (std::size_t i = 0; i + 1 < m; ++i) {
            for (std::size_t j = i + 1; j < m; ++j) {
                const double alpha = dot(columns[i], columns[i]);
                const double beta = dot(columns[j], columns[j]);
                const double gamma = dot(columns[i], columns[j]);
                if (std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta) || gamma == 0.0) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                Vector ci = columns[i];
                Vector cj = columns[j];
                columns[i] = c * ci - s * cj;
                columns[j] = s * ci + c * cj;
            }
        }
        if (!rotated) break;
    }
    double sigma_max = 0.0;
    for (const Vector& c : columns) sigma_max = std::max(sigma_max, norm(c));
    std::vector<Vector> basis;
    for (const Vector& c : columns) {
        if (norm(c) > relative_cut * sigma_max) basis.push_back(normalize(c));
    }
    // Rotations leave the kept columns orthogonal only to working precision.
    return gram_schmidt(basis);
}

}  // namespace apkit
