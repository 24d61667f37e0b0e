#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "apkit/random.hpp"
#include "apkit/sets.hpp"

using namespace apkit;
using Catch::Matchers::WithinAbs;

namespace {

const double inf = std::numeric_limits<double>::infinity();
const Vector e1{1.0, 0.0};
const Vector e2{0.0, 1.0};

SetSpec x_axis() { return SetSpec::affine({0.0, 0.0}, {e1}); }
SetSpec y_axis() { return SetSpec::affine({0.0, 0.0}, {e2}); }
SetSpec axes() { return SetSpec::union_of({x_axis(), y_axis()}); }
SetSpec upper_y_ray() { return SetSpec::box({0.0, 0.0}, {0.0, inf}); }

// Brute force over all supports of size k.
double brute_sparsity_distance(const Vector& z, std::size_t k) {
    const std::size_t n = z.dim();
    double best = inf;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(mask & (1u << i))) s += z[i] * z[i];
        }
        best = std::min(best, std::sqrt(s));
    }
    return best;
}

struct Variant {
    const char* name;
    SetSpec set;
    bool convex;
};

std::vector<Variant> catalog() {
    return {
        {"affine", SetSpec::affine({1.0, 0.0, -1.0}, {normalize(Vector{1.0, 1.0, 0.0})}), true},
        {"box", SetSpec::box({-1.0, 0.0, -inf}, {1.0, 2.0, 0.5}), true},
        {"ball", SetSpec::ball({0.5, 0.0, 0.0}, 1.5), true},
        {"sphere", SetSpec::sphere({0.0, 1.0, 0.0}, 2.0), false},
        {"halfspace", SetSpec::halfspace({1.0, -2.0, 0.5}, 0.3), true},
        {"sparsity", SetSpec::sparsity(3, 1), false},
        {"union", SetSpec::union_of({SetSpec::ball({2.0, 0.0, 0.0}, 1.0), SetSpec::halfspace({0.0, 0.0, 1.0}, -2.0)}),
         false},
        {"translated", translate(SetSpec::sparsity(3, 2), {0.5, -0.5, 1.0}), false},
    };
}

Vector random_vector(Rng& rng, std::size_t n, double scale) {
    std::normal_distribution<double> g(0.0, scale);
    Vector v(n);
    for (double& x : v) x = g(rng);
    return v;
}

// Normalized point of a random piece direction, or nothing for a zero piece.
std::optional<Vector> random_cone_direction(const ConeModel& cone, Rng& rng) {
    for (int attempt = 0; attempt < 50; ++attempt) {
        const ConePiece& piece = cone.pieces()[rng() % cone.pieces().size()];
        const Vector v = piece.project(random_unit(rng, cone.dim()));
        if (norm(v) > 1e-6) return normalize(v);
    }
    return std::nullopt;
}

}  // namespace

TEST_CASE("project examples", "[sets]") {
    auto r = project(SetSpec::sparsity(3, 1), {3.0, -4.0, 1.0});
    CHECK(r.point == Vector{0.0, -4.0, 0.0});
    CHECK_THAT(r.distance, WithinAbs(std::sqrt(10.0), 1e-15));
    CHECK_THAT(r.distance, WithinAbs(brute_sparsity_distance({3.0, -4.0, 1.0}, 1), 1e-15));
    CHECK_FALSE(r.tie);

    r = project(x_axis(), {1.0, 1.0});
    CHECK(r.point == Vector{1.0, 0.0});
    CHECK(r.distance == 1.0);

    r = project(axes(), {2.0, 1.0});
    CHECK(r.point == Vector{2.0, 0.0});
    CHECK_FALSE(r.tie);
    CHECK(r.distance == std::min(distance(x_axis(), {2.0, 1.0}), distance(y_axis(), {2.0, 1.0})));
}

TEST_CASE("distance examples", "[sets]") {
    CHECK(distance(SetSpec::ball({0.0, 0.0}, 1.0), {3.0, 4.0}) == 4.0);
    CHECK(distance(SetSpec::box({0.0, 0.0}, {1.0, 1.0}), {2.0, 0.5}) == 1.0);
    CHECK(distance(SetSpec::sparsity(2, 1), {1.0, 1.0}) == 1.0);
    CHECK(brute_sparsity_distance({1.0, 1.0}, 1) == 1.0);
    CHECK(distance(SetSpec::sphere({0.0, 0.0}, 2.0), {0.0, 0.5}) == 1.5);
    CHECK(distance(SetSpec::halfspace({0.0, 2.0}, 2.0), {5.0, 3.0}) == 2.0);
}

TEST_CASE("contains examples", "[sets]") {
    CHECK(contains(x_axis(), {1.0, 0.0}, 1e-10));
    CHECK_FALSE(contains(SetSpec::ball({0.0, 0.0}, 1.0), {2.0, 0.0}, 1e-10));
    CHECK(contains(SetSpec::sparsity(2, 1), {0.0, 5.0}, 0.0));
}

TEST_CASE("tie-breaking is deterministic", "[sets][ties]") {
    auto r = project(SetSpec::sparsity(2, 1), {1.0, -1.0});
    CHECK(r.point == Vector{1.0, 0.0});
    CHECK(r.tie);

    r = project(axes(), {1.0, 1.0});
    CHECK(r.point == Vector{1.0, 0.0});
    CHECK(r.tie);

    r = project(SetSpec::sphere({1.0, 1.0}, 2.0), {1.0, 1.0});
    CHECK(r.point == Vector{3.0, 1.0});
    CHECK(r.tie);

    r = project(SetSpec::sparsity(3, 1), {1.0, 1.0 - 1e-12, 0.0});
    CHECK(r.tie);
    r = project(SetSpec::sparsity(3, 1), {1.0, 0.5, 0.0});
    CHECK_FALSE(r.tie);
}

TEST_CASE("validation", "[sets]") {
    CHECK_THROWS_AS((SetSpec::affine({0.0, 0.0}, {Vector{1.0, 1.0}})), precondition_error);
    CHECK_THROWS_AS((SetSpec::affine({0.0, 0.0}, {Vector{1.0, 0.0, 0.0}})), dimension_error);
    CHECK_THROWS_AS((SetSpec::box({1.0, 0.0}, {0.0, 1.0})), precondition_error);
    CHECK_THROWS_AS((SetSpec::ball({0.0}, 0.0)), precondition_error);
    CHECK_THROWS_AS((SetSpec::sphere({0.0}, -1.0)), precondition_error);
    CHECK_THROWS_AS((SetSpec::halfspace({0.0, 0.0}, 1.0)), precondition_error);
    CHECK_THROWS_AS(SetSpec::sparsity(2, 3), precondition_error);
    CHECK_THROWS_AS((SetSpec::union_of({})), precondition_error);
    CHECK_THROWS_AS((SetSpec::union_of({SetSpec::sphere({0.0}, 1.0)})), precondition_error);
    CHECK_THROWS_AS((SetSpec::union_of({x_axis(), SetSpec::ball({0.0}, 1.0)})), dimension_error);
    CHECK_THROWS_AS((project(x_axis(), Vector{1.0, 2.0, 3.0})), dimension_error);
    CHECK_THROWS_AS((translate(x_axis(), Vector{1.0})), dimension_error);
    CHECK(SetSpec::sparsity(3, 0).is_convex());
    CHECK(SetSpec::sparsity(3, 3).is_convex());
}

TEST_CASE("translate is consistent with shifted queries", "[sets]") {
    const Vector e{0.3, -1.2};
    Rng rng(5);
    for (const SetSpec& s : {x_axis(), SetSpec::sphere({0.0, 0.0}, 1.0), axes()}) {
        const SetSpec t = translate(s, e);
        for (int i = 0; i < 50; ++i) {
            const Vector z = random_vector(rng, 2, 2.0);
            CHECK(distance(t, z) == distance(s, z - e));
            CHECK(project(t, z).point == project(s, z - e).point + e);
        }
    }
    CHECK(translate(x_axis(), {0.0, 0.0}) == translate(x_axis(), {0.0, 0.0}));
}

TEST_CASE("projection idempotence and distance consistency", "[sets][property]") {
    for (const Variant& v : catalog()) {
        INFO(v.name);
        Rng rng(derive_seed(11, v.set.variant().index()));
        for (int i = 0; i < 1000; ++i) {
            const Vector z = random_vector(rng, 3, 3.0);
            const ProjectionResult p = project(v.set, z);
            const ProjectionResult pp = project(v.set, p.point);
            REQUIRE(distance(pp.point, p.point) <= 1e-10);
            REQUIRE(std::abs(distance(z, p.point) - p.distance) <= 1e-12);
            REQUIRE(contains(v.set, p.point, 1e-10));
        }
    }
}

TEST_CASE("convex projections are nonexpansive", "[sets][property]") {
    for (const Variant& v : catalog()) {
        if (!v.convex) continue;
        INFO(v.name);
        Rng rng(99);
        for (int i = 0; i < 1000; ++i) {
            const Vector a = random_vector(rng, 3, 3.0);
            const Vector b = random_vector(rng, 3, 3.0);
            REQUIRE(distance(project(v.set, a).point, project(v.set, b).point) <= distance(a, b) + 1e-12);
        }
    }
}

TEST_CASE("proximal_normal_cone examples", "[sets][cones]") {
    const SetSpec x3 = SetSpec::affine({0.0, 0.0, 0.0}, {Vector{1.0, 0.0, 0.0}});
    const ConeModel c = proximal_normal_cone(x3, {4.0, 0.0, 0.0});
    CHECK(distance_to_cone(Vector{0.0, 0.6, 0.8}, c) <= 1e-12);
    CHECK_THAT(distance_to_cone(Vector{1.0, 0.0, 0.0}, c), WithinAbs(1.0, 1e-12));

    const ConeModel s = proximal_normal_cone(SetSpec::sparsity(2, 1), {5.0, 0.0});
    CHECK(distance_to_cone(e2, s) <= 1e-12);
    CHECK(distance_to_cone(-1.0 * e2, s) <= 1e-12);
    CHECK_THAT(distance_to_cone(e1, s), WithinAbs(1.0, 1e-12));

    const ConeModel h = proximal_normal_cone(upper_y_ray(), {0.0, 0.0});
    CHECK(distance_to_cone(Vector{0.6, -0.8}, h) <= 1e-12);
    CHECK(distance_to_cone(e1, h) <= 1e-12);
    CHECK_THAT(distance_to_cone(e2, h), WithinAbs(1.0, 1e-12));

    // Interior of a ball and its boundary.
    CHECK(proximal_normal_cone(SetSpec::ball({0.0, 0.0}, 1.0), {0.2, 0.1}).is_zero());
    const ConeModel b = proximal_normal_cone(SetSpec::ball({0.0, 0.0}, 1.0), {0.0, 1.0});
    CHECK(distance_to_cone(e2, b) <= 1e-12);
    CHECK(distance_to_cone(-1.0 * e2, b) == 1.0);

    // Sphere: the whole radial line.
    const ConeModel sp = proximal_normal_cone(SetSpec::sphere({0.0, 0.0}, 1.0), {1.0, 0.0});
    CHECK(distance_to_cone(e1, sp) <= 1e-12);
    CHECK(distance_to_cone(-1.0 * e1, sp) <= 1e-12);

    // Sparsity below full support: the limiting cone over supersets.
    const ConeModel lim = proximal_normal_cone(SetSpec::sparsity(3, 2), {1.0, 0.0, 0.0});
    CHECK(distance_to_cone(Vector{0.0, 1.0, 0.0}, lim) <= 1e-12);
    CHECK(distance_to_cone(Vector{0.0, 0.0, 1.0}, lim) <= 1e-12);
    CHECK(distance_to_cone(normalize(Vector{0.0, 1.0, 1.0}), lim) > 0.5);

    CHECK_THROWS_AS((proximal_normal_cone(x_axis(), {0.0, 1.0})), precondition_error);
}

TEST_CASE("is_proximal_normal examples", "[sets][cones]") {
    CHECK(is_proximal_normal(x_axis(), {1.0, 0.0}, e2, 0.5));
    CHECK_FALSE(is_proximal_normal(x_axis(), {1.0, 0.0}, e1, 0.5));
    CHECK(is_proximal_normal(SetSpec::sphere({0.0, 0.0}, 1.0), {1.0, 0.0}, {-1.0, 0.0}, 0.5));
    CHECK_THROWS(is_proximal_normal(x_axis(), {1.0, 0.0}, {0.0, 2.0}, 0.5));
    CHECK_THROWS(is_proximal_normal(x_axis(), {1.0, 0.0}, e2, 0.0));
}

TEST_CASE("cone soundness: emitted directions are proximal normals", "[sets][cones][property]") {
    Rng rng(2024);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto check_points = [&](const SetSpec& S, const std::vector<Vector>& points) {
        for (const Vector& x : points) {
            const ConeModel cone = proximal_normal_cone(S, x);
            const double t = 0.1 * (1.0 + norm(x));
            for (int i = 0; i < 20; ++i) {
                const auto u = random_cone_direction(cone, rng);
                if (!u) break;
                INFO("x = " << x << ", u = " << *u);
                REQUIRE(is_proximal_normal(S, x, *u, t));
            }
        }
    };

    const SetSpec aff = SetSpec::affine({1.0, 2.0, 0.0, -1.0},
                                        {normalize(Vector{1.0, 0.0, 1.0, 0.0}), Vector{0.0, 1.0, 0.0, 0.0}});
    std::vector<Vector> pts;
    for (int i = 0; i < 10; ++i) pts.push_back(project(aff, random_vector(rng, 4, 2.0)).point);
    check_points(aff, pts);

    const SetSpec box = SetSpec::box({-1.0, 0.0, -inf}, {1.0, 2.0, 0.5});
    pts.clear();
    for (int i = 0; i < 20; ++i) pts.push_back(project(box, random_vector(rng, 3, 3.0)).point);
    pts.push_back({1.0, 0.0, 0.5});
    check_points(box, pts);

    const SetSpec sparse = SetSpec::sparsity(4, 2);
    pts.clear();
    for (int i = 0; i < 20; ++i) {
        Vector x(4, 0.0);
        const std::size_t a = rng() % 4;
        const std::size_t b = (a + 1 + rng() % 3) % 4;
        x[a] = (unif(rng) < 0 ? -1.0 : 1.0) * (1.5 + std::abs(unif(rng)));
        x[b] = (unif(rng) < 0 ? -1.0 : 1.0) * (1.5 + std::abs(unif(rng)));
        pts.push_back(x);
    }
    check_points(sparse, pts);

    check_points(axes(), {Vector{2.0, 0.0}, Vector{0.0, -3.0}, Vector{0.0, 0.0}});
}

TEST_CASE("cone completeness on a 360-direction grid", "[sets][cones][property]") {
    const Vector origin{0.0, 0.0};
    for (const SetSpec& S : {upper_y_ray(), axes()}) {
        const ConeModel cone = proximal_normal_cone(S, origin);
        std::size_t proximal = 0;
        for (int deg = 0; deg < 360; ++deg) {
            const double a = deg * std::numbers::pi / 180.0;
            const Vector u{std::cos(a), std::sin(a)};
            if (is_proximal_normal(S, origin, u, default_probe_scale(origin))) {
                ++proximal;
                INFO("deg = " << deg);
                CHECK(distance_to_cone(u, cone) <= 1e-6);
            }
        }
        CHECK(proximal < 360);
    }
    // The corner's proximal normals are exactly the closed lower half-plane.
    std::size_t lower = 0;
    for (int deg = 0; deg < 360; ++deg) {
        const double a = deg * std::numbers::pi / 180.0;
        if (is_proximal_normal(upper_y_ray(), origin, {std::cos(a), std::sin(a)}, 1e-3)) ++lower;
    }
    CHECK(lower == 181);
}

TEST_CASE("sample_near", "[sets]") {
    auto pts = sample_near(x_axis(), {0.0, 0.0}, 1.0, 8, 1);
    REQUIRE(pts.size() == 8);
    for (const Vector& p : pts) {
        CHECK(p[1] == 0.0);
        CHECK(std::abs(p[0]) > 0.0);
        CHECK(std::abs(p[0]) <= 2.0);
    }

    pts = sample_near(SetSpec::sparsity(2, 1), {1.0, 0.0}, 0.5, 32, 2);
    REQUIRE_FALSE(pts.empty());
    for (const Vector& p : pts) {
        CHECK((p[0] == 0.0 || p[1] == 0.0));
        CHECK(distance(p, {1.0, 0.0}) <= 1.0);
    }

    const SetSpec ball = SetSpec::ball({0.0, 0.0}, 1.0);
    pts = sample_near(ball, {1.0, 0.0}, 0.5, 64, 3);
    bool interior = false;
    for (const Vector& p : pts) {
        CHECK(contains(ball, p, 1e-10));
        interior = interior || norm(p) < 1.0 - 1e-6;
    }
    CHECK(interior);

    CHECK(sample_near(x_axis(), {0.0, 0.0}, 1.0, 16, 9) == sample_near(x_axis(), {0.0, 0.0}, 1.0, 16, 9));
    // An isolated point of the set yields nothing.
    CHECK(sample_near(SetSpec::sparsity(2, 0), {0.0, 0.0}, 1.0, 8, 4).empty());
    CHECK_THROWS(sample_near(x_axis(), {0.0, 1.0}, 1.0, 8, 4));
}

TEST_CASE("limiting_normal_cone at a union junction", "[sets][cones]") {
    const Vector origin{0.0, 0.0};
    // Neither axis direction is a proximal normal of the cross at 0, but both are limits of normals.
    CHECK(proximal_normal_cone(axes(), origin).is_zero());
    const ConeModel lim = limiting_normal_cone(axes(), origin);
    CHECK(distance_to_cone(e1, lim) <= 1e-12);
    CHECK(distance_to_cone(e2, lim) <= 1e-12);
    CHECK_THAT(distance_to_cone(normalize(Vector{1.0, 1.0}), lim), WithinAbs(1.0 / std::sqrt(2.0), 1e-12));
    // Away from the junction both cones agree.
    CHECK(distance_to_cone(e2, limiting_normal_cone(axes(), {2.0, 0.0})) <= 1e-12);
    CHECK(distance_to_cone(e1, limiting_normal_cone(axes(), {2.0, 0.0})) == 1.0);
    CHECK_THROWS_AS(limiting_normal_cone(axes(), Vector{1.0, 1.0}), precondition_error);
}
