#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "apkit/diagnostics.hpp"
#include "apkit/verify.hpp"

using namespace apkit;
using Catch::Matchers::WithinAbs;

namespace {

const double inf = std::numeric_limits<double>::infinity();
const double r2 = 1.0 / std::sqrt(2.0);
const Vector e1{1.0, 0.0};
const Vector e2{0.0, 1.0};
const Vector o2{0.0, 0.0};

SetSpec line(double angle) { return SetSpec::affine({0.0, 0.0}, {Vector{std::cos(angle), std::sin(angle)}}); }
SetSpec x_axis() { return line(0.0); }
SetSpec y_axis() { return SetSpec::affine({0.0, 0.0}, {e2}); }
SetSpec upper_y_ray() { return SetSpec::box({0.0, 0.0}, {0.0, inf}); }
SetSpec x3() { return SetSpec::affine({0.0, 0.0, 0.0}, {Vector{1.0, 0.0, 0.0}}); }
SetSpec y3() { return SetSpec::affine({0.0, 0.0, 0.0}, {Vector{0.0, 1.0, 0.0}}); }

// min over (a, b) in (0, r]^2 of max(a, b)/sqrt(a^2 + b^2), the corner's intrinsic constant.
double corner_kappa_grid() {
    double best = 1.0;
    for (int i = 1; i <= 200; ++i) {
        for (int j = 1; j <= 200; ++j) {
            const double a = i * 0.0005;
            const double b = j * 0.0005;
            best = std::min(best, std::max(a, b) / std::hypot(a, b));
        }
    }
    return best;
}

// min over t of max(|cos t|, |sin t|).
double axes_point_grid() {
    double best = 1.0;
    for (int i = 0; i < 100000; ++i) {
        const double t = 2 * std::numbers::pi * i / 100000;
        best = std::min(best, std::max(std::abs(std::cos(t)), std::abs(std::sin(t))));
    }
    return best;
}

}  // namespace

TEST_CASE("coupling_value", "[diagnostics]") {
    CHECK(coupling_value(x_axis(), y_axis(), {3.0, 0.0}, {0.0, 4.0}) == 5.0);
    CHECK(coupling_value(x_axis(), y_axis(), {3.0, 1.0}, {0.0, 4.0}) == inf);
    CHECK(coupling_value(x_axis(), y_axis(), o2, o2) == 0.0);
}

TEST_CASE("limiting marginal slopes", "[diagnostics][slopes]") {
    CHECK_THAT(limiting_marginal_slope_x(x_axis(), {1.0, -1.0}, {1.0, 0.0}), WithinAbs(0.0, 1e-15));
    CHECK_THAT(limiting_marginal_slope_x(x_axis(), o2, {1.0, 0.0}), WithinAbs(1.0, 1e-15));
    CHECK_THROWS(limiting_marginal_slope_x(x_axis(), {1.0, 0.0}, {1.0, 0.0}));
    CHECK_THROWS(limiting_marginal_slope_x(x_axis(), o2, {1.0, 1.0}));

    CHECK_THAT(limiting_marginal_slope_y(x_axis(), {1.0, -1.0}, {1.0, 0.0}), WithinAbs(0.0, 1e-15));
    CHECK_THAT(limiting_marginal_slope_y(x_axis(), o2, {1.0, 0.0}), WithinAbs(1.0, 1e-15));
    CHECK_THROWS(limiting_marginal_slope_y(x_axis(), {1.0, 0.0}, {1.0, 0.0}));
}

TEST_CASE("sampled_marginal_slope", "[diagnostics][slopes]") {
    auto s = sampled_marginal_slope(x_axis(), {1.0, -1.0}, {1.0, 0.0}, 1e-3, 64, 1);
    CHECK(s.value <= 1e-3);
    CHECK_FALSE(s.isolated);
    s = sampled_marginal_slope(x_axis(), o2, {1.0, 0.0}, 1e-3, 64, 1);
    CHECK_THAT(s.value, WithinAbs(1.0, 1e-3));
    s = sampled_marginal_slope(x_axis(), o2, {1.0, 0.0}, 1e-3, 0, 1);
    CHECK(s.value == 0.0);
    CHECK(s.isolated);
}

TEST_CASE("coupling_slope", "[diagnostics][slopes]") {
    // Grid over (a, b): both the corner and the axes give slope 1.
    for (int i = 1; i <= 20; ++i) {
        for (int j = 1; j <= 20; ++j) {
            const Vector x{0.1 * i, 0.0};
            const Vector y{0.0, 0.1 * j};
            CHECK_THAT(coupling_slope(x_axis(), upper_y_ray(), x, y), WithinAbs(1.0, 1e-12));
            CHECK_THAT(coupling_slope(x_axis(), y_axis(), x, y), WithinAbs(1.0, 1e-12));
        }
    }
    CHECK_THROWS(coupling_slope(x_axis(), y_axis(), o2, o2));
}

TEST_CASE("intrinsic_kappa", "[diagnostics][kappa]") {
    const KappaEstimate corner = intrinsic_kappa(x_axis(), upper_y_ray(), o2, 0.1, 128, 1);
    CHECK_THAT(corner.value, WithinAbs(corner_kappa_grid(), 0.05));
    CHECK_FALSE(corner.vacuous);
    CHECK_THAT(intrinsic_kappa(x_axis(), y_axis(), o2, 0.1, 128, 2).value, WithinAbs(r2, 0.05));
    const KappaEstimate same = intrinsic_kappa(x_axis(), x_axis(), o2, 0.1, 128, 3);
    CHECK(same.value == 1.0);
    CHECK(same.vacuous);
    CHECK_THROWS(intrinsic_kappa(x_axis(), y_axis(), e1, 0.1, 16, 1));
}

TEST_CASE("point_transversality", "[diagnostics][kappa]") {
    CHECK(point_transversality(x3(), y3(), {0.0, 0.0, 0.0}, 0, 1).kappa_point <= 1e-9);
    const PointTransversality axes = point_transversality(x_axis(), y_axis(), o2, 0, 1);
    CHECK_THAT(axes.kappa_point, WithinAbs(axes_point_grid(), 1e-6));
    CHECK_THAT(axes.theta, WithinAbs(std::numbers::pi / 2, 1e-9));
    CHECK(point_transversality(x_axis(), upper_y_ray(), o2, 0, 1).kappa_point <= 1e-9);
    CHECK(point_transversality(x_axis(), upper_y_ray(), o2, 0, 1).theta <= 1e-9);
    CHECK_THROWS(point_transversality(x_axis(), y_axis(), e1, 0, 1));
}

TEST_CASE("theta and kappa_point for single-ray cones", "[diagnostics][kappa]") {
    // N_X(0) = R+ e2 and N_Y(0) = R+ n with the angle between n and -e2 equal to phi.
    const SetSpec X = SetSpec::halfspace(e2, 0.0);
    for (double deg : {20.0, 60.0, 90.0}) {
        const double phi = deg * std::numbers::pi / 180.0;
        const SetSpec Y = SetSpec::halfspace({std::sin(phi), -std::cos(phi)}, 0.0);
        const PointTransversality p = point_transversality(X, Y, o2, 0, 4);
        CHECK_THAT(p.theta, WithinAbs(phi, 1e-9));
        CHECK_THAT(p.kappa_point, WithinAbs(std::sin(p.theta / 2), 1e-6));
    }
}

TEST_CASE("relative_transversality", "[diagnostics][kappa]") {
    const RelativeTransversality r3 = relative_transversality(x3(), y3(), {0.0, 0.0, 0.0}, 0, 1);
    CHECK(r3.rank == 2);
    CHECK_THAT(r3.kappa_relative, WithinAbs(r2, 1e-6));

    const SetSpec a = line(0.3);
    const SetSpec b = line(1.4);
    CHECK(relative_transversality(a, b, o2, 0, 5).kappa_relative == point_transversality(a, b, o2, 0, 5).kappa_point);

    const RelativeTransversality corner = relative_transversality(x_axis(), upper_y_ray(), o2, 0, 1);
    CHECK(corner.rank == 2);
    CHECK(corner.kappa_relative <= 1e-9);
}

TEST_CASE("super_regularity_profile", "[diagnostics]") {
    const SetSpec aff = SetSpec::affine({1.0, 0.0, 0.0}, {normalize(Vector{1.0, 1.0, 0.0})});
    CHECK(std::abs(super_regularity_profile(aff, {1.0, 0.0, 0.0}, 0.5, 32, 1).deficit) <= 1e-9);
    CHECK(super_regularity_profile(SetSpec::box({0.0, 0.0}, {1.0, 1.0}), {1.0, 1.0}, 0.5, 32, 2).deficit <= 1e-9);
    const SetSpec cross = SetSpec::union_of({x_axis(), y_axis()});
    CHECK_THAT(super_regularity_profile(cross, o2, 0.5, 64, 3).deficit, WithinAbs(std::numbers::pi / 2, 1e-9));
    CHECK_THROWS(super_regularity_profile(x_axis(), e2, 0.5, 8, 1));
}

TEST_CASE("inherent_angle", "[diagnostics]") {
    for (double deg : {30.0, 60.0, 90.0}) {
        const double theta = deg * std::numbers::pi / 180.0;
        CHECK_THAT(inherent_angle(x_axis(), line(theta), o2, 0.1, 64, 1).angle, WithinAbs(theta, 1e-9));
    }
    const InherentAngle corner = inherent_angle(x_axis(), upper_y_ray(), o2, 0.1, 64, 2);
    CHECK(corner.angle > 0.1);
    CHECK_FALSE(corner.vacuous);
    const InherentAngle same = inherent_angle(x_axis(), x_axis(), o2, 0.1, 64, 3);
    CHECK(same.vacuous);
    CHECK(same.angle == std::numbers::pi);
}

TEST_CASE("distance_decrease_check", "[diagnostics][verifiers]") {
    // w = (a, 0): d(normalize(y - w), N_X(w)) = |a| / sqrt(a^2 + 1).
    auto closed = [](double a) { return std::abs(a) / std::hypot(a, 1.0); };

    DecreaseCheck c = distance_decrease_check(x_axis(), o2, e2, 0.5, 128, 1);
    CHECK_THAT(c.mu_hat, WithinAbs(closed(0.0), 1e-12));
    CHECK(c.holds);
    CHECK(c.lhs == 1.0);

    c = distance_decrease_check(x_axis(), {2.0, 0.0}, e2, 0.5, 128, 1);
    CHECK_THAT(c.mu_hat, WithinAbs(closed(1.5), 1e-9));
    CHECK_THAT(c.rho, WithinAbs(std::sqrt(5.0), 1e-15));
    CHECK(c.holds);
    CHECK(c.lhs <= std::sqrt(5.0) - closed(1.5) * 0.5);

    CHECK_THROWS(distance_decrease_check(x_axis(), o2, {3.0, 0.0}, 0.5, 8, 1));
    CHECK_THROWS(distance_decrease_check(x_axis(), o2, e2, 0.0, 8, 1));
}

TEST_CASE("error_bound_check", "[diagnostics][verifiers]") {
    const Vector y{0.0, 1.0};
    const Vector x{3.0, 0.0};
    const double alpha = std::sqrt(2.0);
    // Level set is {(a, 0) : |a| <= 1}; over the slab the slope |a|/sqrt(a^2+1) is least at a = 1.
    const ErrorBoundCheck c = error_bound_check(x_axis(), y, x, alpha, 2.5, 256, 1);
    CHECK(c.hypothesis_met);
    CHECK_THAT(c.K_hat, WithinAbs(r2, 0.01));
    CHECK_THAT(c.level_distance, WithinAbs(2.0, 1e-9));
    CHECK(c.holds);
    CHECK(2.0 <= (std::sqrt(10.0) - alpha) / r2);

    CHECK_THROWS(error_bound_check(x_axis(), y, x, std::sqrt(10.0), 2.5, 8, 1));
    const ErrorBoundCheck small = error_bound_check(x_axis(), y, x, alpha, 0.1, 64, 1);
    CHECK_FALSE(small.hypothesis_met);
    CHECK_FALSE(small.holds);
}

TEST_CASE("kl_profile", "[diagnostics][kl]") {
    const SetSpec circle = SetSpec::sphere({0.0, 0.0}, 1.0);
    const SetSpec tangent = SetSpec::affine({0.0, 1.0}, {e1});
    const KLProfile tangency = kl_profile(circle, tangent, e2, 0.3, 10, 200, 1);
    std::vector<double> env;
    for (const KLBin& b : tangency.bins) {
        if (b.min_slope) env.push_back(*b.min_slope);
    }
    REQUIRE(env.size() >= 3);
    CHECK(env.front() < 0.1);
    CHECK(env.front() < env.back());

    const KLProfile lines = kl_profile(x_axis(), y_axis(), o2, 0.3, 10, 100, 2);
    for (const KLBin& b : lines.bins) {
        if (b.min_slope) CHECK(*b.min_slope >= 0.9);
    }

    const KLProfile empty = kl_profile(x_axis(), x_axis(), o2, 0.3, 5, 10, 3);
    for (const KLBin& b : empty.bins) {
        CHECK_FALSE(b.min_slope.has_value());
        CHECK(b.count == 0);
    }
    CHECK_THROWS(kl_profile(x_axis(), y_axis(), o2, 0.3, 10, 5, 1));
}

TEST_CASE("slope ordering on catalog points", "[diagnostics][property]") {
    struct Case {
        SetSpec X;
        Vector x;
        Vector y;
    };
    const std::vector<Case> cases{
        {x_axis(), {1.0, 0.0}, {0.0, 1.0}},
        {upper_y_ray(), {0.0, 0.5}, {1.0, 0.0}},
        {upper_y_ray(), {0.0, 0.0}, {0.5, 0.5}},
        {SetSpec::ball({0.0, 0.0}, 1.0), {0.0, 1.0}, {0.0, 2.0}},
        {SetSpec::ball({0.0, 0.0}, 1.0), {0.6, 0.0}, {2.0, 1.0}},
        {SetSpec::sparsity(2, 1), {2.0, 0.0}, {1.0, 1.0}},
        {SetSpec::sphere({0.0, 0.0}, 1.0), {0.0, 1.0}, {0.5, 2.0}},
    };
    for (std::size_t i = 0; i < cases.size(); ++i) {
        INFO("case " << i);
        const Case& c = cases[i];
        const double sampled = sampled_marginal_slope(c.X, c.y, c.x, 1e-4, 256, i).value;
        const Vector u = normalize(c.x - c.y);
        const double bound = distance_to_cone(u, negate_cone(proximal_normal_cone(c.X, c.x)));
        CHECK(sampled <= bound + 0.05);
    }
}

TEST_CASE("transversality hierarchy", "[diagnostics][property]") {
    struct Case {
        SetSpec X;
        SetSpec Y;
        Vector z;
    };
    const std::vector<Case> cases{
        {x_axis(), y_axis(), o2},
        {x_axis(), upper_y_ray(), o2},
        {x3(), y3(), {0.0, 0.0, 0.0}},
        {line(0.0), line(1.0), o2},
        {SetSpec::halfspace(e2, 0.0), SetSpec::halfspace({0.5, -0.8660254037844386}, 0.0), o2},
        {SetSpec::sphere({0.0, 0.0}, 1.0), SetSpec::affine({0.0, 0.5}, {e1}), {std::sqrt(0.75), 0.5}},
    };
    for (std::size_t i = 0; i < cases.size(); ++i) {
        INFO("case " << i);
        const Case& c = cases[i];
        const TransversalityReport r = transversality_report(c.X, c.Y, c.z, {0.1, 64, 0, i});
        CHECK(r.kappa_point <= r.kappa_relative + 0.02);
        if (r.kappa_point > 0.1) CHECK(r.kappa_intrinsic_hat > 0.05);
        for (double k : {r.kappa_point, r.kappa_relative, r.kappa_intrinsic_hat}) CHECK((k >= 0.0 && k <= 1.0));
        for (double a : {r.theta, r.inherent}) CHECK((a >= 0.0 && a <= std::numbers::pi));
    }
}

TEST_CASE("slope-based and cone-based intrinsic estimates agree", "[diagnostics][property]") {
    struct Case {
        SetSpec X;
        SetSpec Y;
    };
    const std::vector<Case> cases{{x_axis(), y_axis()}, {x_axis(), upper_y_ray()}, {line(0.0), line(1.0)}};
    for (std::size_t i = 0; i < cases.size(); ++i) {
        INFO("case " << i);
        const Case& c = cases[i];
        const auto xs = sample_near(c.X, o2, 0.1, 24, derive_seed(i, 0));
        const auto ys = sample_near(c.Y, o2, 0.1, 24, derive_seed(i, 1));
        double cone_based = 1.0;
        double slope_based = 1.0;
        for (const Vector& x : xs) {
            if (contains(c.Y, x, 1e-10)) continue;
            for (const Vector& y : ys) {
                if (contains(c.X, y, 1e-10)) continue;
                cone_based = std::min(cone_based, std::max(limiting_marginal_slope_x(c.X, y, x),
                                                           limiting_marginal_slope_y(c.Y, x, y)));
                const double sx = sampled_marginal_slope(c.X, y, x, 1e-5, 16, 1).value;
                const double sy = sampled_marginal_slope(c.Y, x, y, 1e-5, 16, 2).value;
                slope_based = std::min(slope_based, std::max(sx, sy));
            }
        }
        CHECK_THAT(slope_based, WithinAbs(cone_based, 0.1));
        CHECK_THAT(cone_based, WithinAbs(intrinsic_kappa(c.X, c.Y, o2, 0.1, 24, derive_seed(i, 2)).value, 0.1));
    }
}

TEST_CASE("verification suites", "[diagnostics][verifiers]") {
    for (std::uint64_t seed : {1u, 2u}) {
        for (const verify::SuiteResult& r : verify::all_suites(seed)) {
            INFO(r.name << " seed " << seed << ": " << r.first_failure);
            CHECK(r.cases > 0);
            CHECK(r.violations == 0);
        }
    }
    // The closed forms agree with the definitions at a hand-worked point: h = 1, s_x = 2.
    CHECK_THAT(verify::affine_mu(1.0, 2.0, 1.0), WithinAbs(r2, 1e-15));
    CHECK(verify::affine_mu(1.0, 2.0, 3.0) == 0.0);
    CHECK_THAT(verify::affine_K(1.0, 2.0, std::sqrt(2.0), 1.5), WithinAbs(r2, 1e-15));
    CHECK_THAT(verify::affine_level_distance(1.0, 2.0, std::sqrt(2.0)), WithinAbs(1.0, 1e-15));
}

TEST_CASE("relative transversality of convex polyhedra follows relative interiors", "[diagnostics][transversality]") {
    const double inf = std::numeric_limits<double>::infinity();
    const SetSpec square = SetSpec::box({0.0, 0.0}, {1.0, 1.0});
    // Relative interiors meet: constant bounded away from zero.
    CHECK(relative_transversality(square, SetSpec::halfspace({1.0, 0.0}, 0.5), {0.5, 1.0}, 0, 1).kappa_relative > 0.1);
    const SetSpec slab = SetSpec::box({0.0, -1.0}, {1.0, 1.0});
    CHECK(relative_transversality(x_axis(), slab, {0.5, 0.0}, 0, 2).kappa_relative > 0.1);
    CHECK(relative_transversality(x_axis(), slab, {0.0, 0.0}, 0, 6).kappa_relative > 0.1);
    const SetSpec plane = SetSpec::affine({0.0, 0.0, 0.0}, {Vector{1.0, 0.0, 0.0}, Vector{0.0, 1.0, 0.0}});
    const SetSpec line3 = SetSpec::affine({0.0, 0.0, 0.0}, {normalize(Vector{1.0, 1.0, 0.0})});
    const RelativeTransversality inside = relative_transversality(line3, plane, {0.0, 0.0, 0.0}, 0, 3);
    CHECK(inside.rank == 2);
    CHECK(inside.kappa_relative > 0.1);
    // Relative interiors are disjoint: the sets only touch, and the constant vanishes.
    const SetSpec right = SetSpec::box({1.0, 0.0}, {2.0, 1.0});
    CHECK(relative_transversality(square, right, {1.0, 0.5}, 0, 4).kappa_relative <= 1e-9);
    const SetSpec left_half = SetSpec::box({-inf, -inf}, {0.0, inf});
    CHECK(relative_transversality(left_half, SetSpec::halfspace({-1.0, 0.0}, 0.0), {0.0, 0.3}, 0, 5).kappa_relative <= 1e-9);
    // The x-axis only touches the square's boundary.
    CHECK(relative_transversality(x_axis(), square, {0.5, 0.0}, 0, 8).kappa_relative <= 1e-9);
    CHECK(relative_transversality(SetSpec::affine({0.0, 1.0}, {e1}), square, {0.5, 1.0}, 0, 7).kappa_relative <= 1e-9);
}
