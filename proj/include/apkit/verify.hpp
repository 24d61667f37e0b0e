#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "apkit/basis.hpp"
#include "apkit/diagnostics.hpp"
#include "apkit/random.hpp"
#include "apkit/sets.hpp"

// Built-in property suites behind `apkit verify`.

namespace apkit::verify {

struct SuiteResult {
    std::string name;
    std::size_t cases = 0;
    std::size_t violations = 0;
    double worst = 0.0;  ///< largest observed error for the suite's tolerance check
    std::string first_failure;

    [[nodiscard]] bool passed() const { return violations == 0; }
};

inline void record_failure(SuiteResult& r, const std::string& what) {
    if (r.violations++ == 0) r.first_failure = what;
}

/// d(p/|p|, R+ q) <= |p - q| / |q| on random pairs in dims 2..10.
inline SuiteResult lemma_suite(std::uint64_t seed, std::size_t count = 10000) {
    SuiteResult r{"ray-distance lemma", 0, 0, 0.0, {}};
    Rng rng(derive_seed(seed, 11));
    std::uniform_int_distribution<std::size_t> dims(2, 10);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t n = dims(rng);
        Vector p(n);
        Vector q(n);
        for (std::size_t k = 0; k < n; ++k) {
            p[k] = gauss(rng);
            q[k] = gauss(rng);
        }
        const RayLemmaResult res = ray_distance_lemma(p, q);
        ++r.cases;
        r.worst = std::max(r.worst, res.lhs - res.rhs);
        if (!res.holds || res.sharp > res.rhs + 1e-12) record_failure(r, "case " + std::to_string(i));
    }
    return r;
}

struct CatalogPair {
    std::string name;
    SetSpec X;
    SetSpec Y;
};

/// Set pairs whose catalog cones are exact at every point.
inline std::vector<CatalogPair> analytic_catalog() {
    const Vector e1{1.0, 0.0};
    const Vector e2{0.0, 1.0};
    std::vector<CatalogPair> out;
    out.push_back({"axes", SetSpec::affine({0.0, 0.0}, {e1}), SetSpec::affine({0.0, 0.0}, {e2})});
    out.push_back({"corner", SetSpec::affine({0.0, 0.0}, {e1}),
                   SetSpec::box({0.0, 0.0}, {0.0, std::numeric_limits<double>::infinity()})});
    out.push_back({"lines3", SetSpec::affine({0.0, 0.0, 0.0}, {Vector{1.0, 0.0, 0.0}}),
                   SetSpec::affine({0.0, 0.0, 0.0}, {Vector{0.0, 1.0, 0.0}})});
    out.push_back({"tangency", SetSpec::sphere({0.0, 0.0}, 1.0), SetSpec::affine({0.0, 1.0}, {e1})});
    out.push_back({"ball-halfspace", SetSpec::ball({0.0, 0.0}, 1.0), SetSpec::halfspace({1.0, 1.0}, 0.5)});
    out.push_back({"box-plane", SetSpec::box({-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}),
                   SetSpec::affine({0.0, 0.0, 0.5}, {Vector{1.0, 0.0, 0.0}, Vector{0.0, 1.0, 0.0}})});
    out.push_back({"sparse-line", SetSpec::sparsity(3, 1),
                   SetSpec::affine({1.0, 1.0, 1.0}, {normalize(Vector{1.0, -1.0, 0.0})})});
    return out;
}

/// coupling_slope^2 == slope_x^2 + slope_y^2 on sampled pairs.
inline SuiteResult coupling_identity_suite(std::uint64_t seed, std::size_t count = 1000) {
    SuiteResult r{"coupling-slope identity", 0, 0, 0.0, {}};
    const auto catalog = analytic_catalog();
    Rng rng(derive_seed(seed, 12));
    std::normal_distribution<double> gauss(0.0, 1.5);
    std::size_t attempts = 0;
    while (r.cases < count && attempts < 50 * count) {
        const CatalogPair& c = catalog[attempts++ % catalog.size()];
        const std::size_t n = c.X.dim();
        Vector a(n);
        Vector b(n);
        for (std::size_t k = 0; k < n; ++k) {
            a[k] = gauss(rng);
            b[k] = gauss(rng);
        }
        const Vector x = project(c.X, a).point;
        const Vector y = project(c.Y, b).point;
        if (contains(c.Y, x, 1e-8) || contains(c.X, y, 1e-8) || distance(x, y) == 0.0) continue;
        const double sx = limiting_marginal_slope_x(c.X, y, x);
        const double sy = limiting_marginal_slope_y(c.Y, x, y);
        const double cs = coupling_slope(c.X, c.Y, x, y);
        const double err = std::abs(cs * cs - (sx * sx + sy * sy));
        ++r.cases;
        r.worst = std::max(r.worst, err);
        if (err > 1e-12) record_failure(r, c.name + " case " + std::to_string(r.cases - 1));
    }
    return r;
}

/// Random affine X with points x in X and y off X; the closed forms below depend only on
/// h = d(y, X) and s_x = |x - P_X(y)|.
struct AffineInstance {
    SetSpec X;
    Vector x;
    Vector y;
    double h = 0.0;
    double s_x = 0.0;
};

inline AffineInstance random_affine_instance(Rng& rng) {
    std::uniform_int_distribution<std::size_t> dims(2, 6);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t n = dims(rng);
    const std::size_t m = std::uniform_int_distribution<std::size_t>(1, n - 1)(rng);
    std::vector<Vector> cols;
    for (std::size_t j = 0; j < n; ++j) cols.push_back(random_unit(rng, n));
    std::vector<Vector> q = gram_schmidt(cols);
    std::vector<Vector> dirs(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(m));
    Vector base = random_in_ball(rng, n, 1.0);
    AffineInstance inst{SetSpec::affine(base, dirs), {}, {}, 0.2 + 0.8 * unif(rng), 0.5 + 2.5 * unif(rng)};
    Vector p = base;
    for (const Vector& d : dirs) p.add_scaled(gauss(rng), d);
    Vector t(n, 0.0);
    for (const Vector& d : dirs) t.add_scaled(gauss(rng), d);
    Vector nu = random_unit(rng, n);
    nu = nu - project_onto_span(dirs, nu);
    inst.x = p + inst.s_x * normalize(t);
    inst.y = p + inst.h * normalize(nu);
    return inst;
}

/// mu = s / sqrt(h^2 + s^2) with s = max(0, s_x - delta).
inline double affine_mu(double h, double s_x, double delta) {
    const double s = std::max(0.0, s_x - delta);
    return s / std::hypot(h, s);
}

/// K over the slab alpha < f <= f(x), |w - x| <= delta, for f = |. - y| on affine X.
inline double affine_K(double h, double s_x, double alpha, double delta) {
    const double s_alpha = std::sqrt(std::max(0.0, alpha * alpha - h * h));
    const double s = std::max(s_alpha, s_x - delta);
    return s / std::hypot(h, s);
}

inline double affine_level_distance(double h, double s_x, double alpha) {
    return std::max(0.0, s_x - std::sqrt(std::max(0.0, alpha * alpha - h * h)));
}

inline SuiteResult decrease_suite(std::uint64_t seed, std::size_t count = 100, std::size_t samples = 256) {
    SuiteResult r{"distance decrease", 0, 0, 0.0, {}};
    Rng rng(derive_seed(seed, 13));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < count; ++i) {
        const AffineInstance inst = random_affine_instance(rng);
        const double delta = 0.1 + 1.4 * unif(rng);
        const double mu = affine_mu(inst.h, inst.s_x, delta);
        const DecreaseCheck chk = distance_decrease_check(inst.X, inst.x, inst.y, delta, samples, derive_seed(seed, 1000 + i));
        const double err = std::abs(chk.mu_hat - mu);
        const bool analytic_holds = chk.lhs <= chk.rho - mu * delta + 1e-9;
        ++r.cases;
        r.worst = std::max(r.worst, err);
        if (!analytic_holds || err > 0.02) record_failure(r, "instance " + std::to_string(i));
    }
    return r;
}

inline SuiteResult error_bound_suite(std::uint64_t seed, std::size_t count = 20, std::size_t samples = 512) {
    SuiteResult r{"error bound", 0, 0, 0.0, {}};
    Rng rng(derive_seed(seed, 14));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::size_t attempts = 0;
    while (r.cases < count && attempts < 100 * count) {
        const std::size_t i = attempts++;
        const AffineInstance inst = random_affine_instance(rng);
        const double fx = std::hypot(inst.h, inst.s_x);
        const double alpha = inst.h + (fx - inst.h) * (0.2 + 0.6 * unif(rng));
        const double delta = inst.s_x * (0.6 + 0.8 * unif(rng));
        const double K = affine_K(inst.h, inst.s_x, alpha, delta);
        if (!(K > (fx - alpha) / delta)) continue;  // hypothesis unmet for the true K
        const double level = affine_level_distance(inst.h, inst.s_x, alpha);
        const ErrorBoundCheck chk = error_bound_check(inst.X, inst.y, inst.x, alpha, delta, samples, derive_seed(seed, 2000 + i));
        const double err = std::abs(chk.K_hat - K);
        ++r.cases;
        r.worst = std::max(r.worst, err);
        if (level > (fx - alpha) / K + 1e-9 || !chk.hypothesis_met || !chk.holds || err > 0.02) {
            record_failure(r, "instance " + std::to_string(i));
        }
    }
    return r;
}

inline std::vector<SuiteResult> all_suites(std::uint64_t seed) {
    return {lemma_suite(seed), coupling_identity_suite(seed), decrease_suite(seed), error_bound_suite(seed)};
}

}  // namespace apkit::verify
