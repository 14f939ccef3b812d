#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "vortexflow/field_ops.hpp"
#include "vortexflow/initial_data.hpp"
#include "vortexflow/radial_profile.hpp"

using namespace vf;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Uniform patch on the disk of radius rad, total mass 2 pi.
Density uniform_patch(double rad) {
    double val = 2.0 / (rad * rad);
    return [val, rad](const Vec2& p) { return p.norm() < rad ? val : 0.0; };
}

double integrate_jacobian_ball(const ScalarGrid& J, Vec2 center, double radius) {
    double acc = 0.0;
    for (int i = 0; i < J.n_r; ++i)
        for (int k = 0; k < J.n_theta; ++k)
            if (dist(J.point(i, k), center) < radius)
                acc += J.at(i, k) * J.radius(i) * J.dr * J.dtheta;
    return acc;
}

} // namespace

TEST_CASE("placement: bump confined to one interior cell") {
    // n = 16 gives cell side 1/2; the cell [-1/2,0]^2 lies strictly inside
    // the disk. A bump carrying 1.5 quanta (one quantum = 2 pi / n) floors
    // to a single vortex at the cell's slice midpoint, the cell center.
    double quantum = 2.0 * kPi / 16.0;
    Density bump = [quantum](const Vec2& p) {
        bool in = p.x > -0.4 && p.x < -0.3 && p.y > -0.4 && p.y < -0.3;
        return in ? 1.5 * quantum / 0.01 : 0.0;
    };
    PlacementReport rep = place_vortices(bump, 16);
    CHECK(rep.cell_side == doctest::Approx(0.5).epsilon(1e-12));
    REQUIRE(rep.n_emitted == 1);
    CHECK(rep.cfg.positions[0].x == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(rep.cfg.positions[0].y == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(rep.cfg.degrees[0] == 1);
}

TEST_CASE("placement: uniform density on one square cell, n = 4") {
    // Cell side h = 4^{-1/4}; the cell with indices (1,1) spans
    // [-1+h, -1+2h]^2 and is interior. Uniform mass 2 pi there yields four
    // vortices on four equal-width vertical slices at mid-height.
    double h = std::pow(4.0, -0.25);
    double x0 = -1.0 + h, y0 = -1.0 + h;
    Density omega = [=](const Vec2& p) {
        bool in = p.x > x0 && p.x < x0 + h && p.y > y0 && p.y < y0 + h;
        return in ? 2.0 * kPi / (h * h) : 0.0;
    };
    PlacementReport rep = place_vortices(omega, 4);
    REQUIRE(rep.n_emitted == 4);
    for (int s = 0; s < 4; ++s) {
        CHECK(rep.cfg.positions[s].x ==
              doctest::Approx(x0 + (s + 0.5) / 4.0 * h).epsilon(1e-12));
        CHECK(rep.cfg.positions[s].y == doctest::Approx(y0 + 0.5 * h).epsilon(1e-12));
    }
}

TEST_CASE("placement: uniform disk patch, counts and containment") {
    Density omega = uniform_patch(0.4);
    PlacementReport rep = place_vortices(omega, 64);
    CHECK(rep.n_emitted <= 64);
    // flooring loses less than one vortex per occupied cell; the patch of
    // radius 0.4 meets at most 16 cells of side 64^{-1/4}
    CHECK(rep.n_emitted >= 64 - 16);
    for (const auto& p : rep.cfg.positions) {
        CHECK(p.norm() < 1.0);
        CHECK(std::abs(p.x) <= 0.4 + rep.cell_side);
        CHECK(std::abs(p.y) <= 0.4 + rep.cell_side);
    }

    SUBCASE("determinism: identical inputs give bitwise-identical placements") {
        PlacementReport rep2 = place_vortices(uniform_patch(0.4), 64);
        REQUIRE(rep2.n_emitted == rep.n_emitted);
        for (std::size_t j = 0; j < rep.cfg.size(); ++j) {
            CHECK(rep2.cfg.positions[j].x == rep.cfg.positions[j].x);
            CHECK(rep2.cfg.positions[j].y == rep.cfg.positions[j].y);
        }
    }
}

TEST_CASE("placement: density reaching the boundary is rejected") {
    Density annulus = [](const Vec2& p) {
        double r = p.norm();
        return (r > 0.8 && r < 0.95) ? 2.0 : 0.0;
    };
    CHECK_THROWS_AS(place_vortices(annulus, 64), std::invalid_argument);
    CHECK_THROWS_AS(place_vortices(uniform_patch(0.4), 0), std::invalid_argument);
}

TEST_CASE("energy_bound_check closed forms and boundedness") {
    VortexConfiguration two;
    two.positions = {{-0.5, 0.0}, {0.5, 0.0}};
    two.degrees = {1, 1};
    CHECK(energy_bound_check(two) == doctest::Approx(0.0).epsilon(1e-15));

    double d = std::exp(-1.0);
    two.positions = {{0.0, 0.0}, {d, 0.0}};
    CHECK(energy_bound_check(two) == doctest::Approx(0.5).epsilon(1e-12));

    VortexConfiguration one;
    one.positions = {{0.0, 0.0}};
    one.degrees = {1};
    CHECK_THROWS_AS(energy_bound_check(one), std::invalid_argument);

    // the placement sequence for a fixed patch keeps the pair-energy sum
    // bounded: max/min ratio at most 2 over n in {16, 64, 256}
    double lo = 1e300, hi = -1e300;
    for (int n : {16, 64, 256}) {
        PlacementReport rep = place_vortices(uniform_patch(0.4), n);
        REQUIRE(rep.n_emitted >= 2);
        double e = energy_bound_check(rep.cfg);
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    CHECK(hi / lo <= 2.0);
}

TEST_CASE("build_field: single centered vortex matches the radial ansatz") {
    KernelContext ctx;
    ctx.kind = KernelKind::dirichlet_green;
    ctx.winding = 1;
    VortexConfiguration cfg;
    cfg.positions = {{0.0, 0.0}};
    cfg.degrees = {1};
    double eps = 0.05;
    PreparedField pf = build_field(ctx, cfg, eps, BcKind::dirichlet, 256, 256);
    CHECK(pf.field.epsilon == eps);

    const RadialProfile& f0 = standard_profile();
    double max_err = 0.0;
    for (int i = 0; i < 256; i += 7)
        for (int k = 0; k < 256; k += 7) {
            double r = pf.field.radius(i), th = pf.field.theta(k);
            Complex expect = f0.value(r / eps) * Complex{std::cos(th), std::sin(th)};
            max_err = std::max(max_err, std::abs(pf.field.at(i, k) - expect));
        }
    CHECK(max_err <= 1e-10);
    CHECK(pf.excess_energy <= 0.05);
    CHECK(pf.excess_energy >= -0.05);

    SUBCASE("determinism: bitwise-identical fields") {
        PreparedField pf2 = build_field(ctx, cfg, eps, BcKind::dirichlet, 256, 256);
        REQUIRE(pf2.field.v.size() == pf.field.v.size());
        bool same = true;
        for (std::size_t j = 0; j < pf.field.v.size(); ++j)
            same = same && pf2.field.v[j] == pf.field.v[j];
        CHECK(same);
        CHECK(pf2.excess_energy == pf.excess_energy);
    }
}

TEST_CASE("build_field: zero-vortex configuration gives u == 1, D == 0") {
    KernelContext ctx;
    ctx.kind = KernelKind::dirichlet_green;
    ctx.winding = 0;
    VortexConfiguration cfg;
    PreparedField pf = build_field(ctx, cfg, 0.05, BcKind::dirichlet, 128, 128);
    for (const Complex& z : pf.field.v) {
        CHECK(std::abs(z.real() - 1.0) <= 1e-12);
        CHECK(std::abs(z.imag()) <= 1e-12);
    }
    CHECK(pf.w_value == 0.0);
    CHECK(std::abs(pf.excess_energy) <= 1e-10);
}

TEST_CASE("build_field: pair carries unit windings at both sites only") {
    KernelContext ctx;
    VortexConfiguration cfg;
    cfg.positions = {{0.3, 0.0}, {-0.3, 0.0}};
    cfg.degrees = {1, 1};
    PreparedField pf = build_field(ctx, cfg, 0.05, BcKind::neumann, 256, 256);

    // phase circulation over grid rectangles: pi per enclosed unit winding
    int n = 256;
    double right = phase_circulation_half(pf.field, 51, 102, n - 32, n + 32);
    double left = phase_circulation_half(pf.field, 51, 102, n / 2 - 32, n / 2 + 32);
    double empty = phase_circulation_half(pf.field, 160, 220, 16, 100);
    CHECK(right == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(left == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(empty == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(origin_cap_circulation(pf.field) == doctest::Approx(0.0).epsilon(1e-12));

    // the Jacobian carries no mass away from the cores
    ScalarGrid J = jacobian(pf.field);
    CHECK(std::abs(integrate_jacobian_ball(J, {0.0, 0.0}, 0.15)) <= 1e-9);

    CHECK_THROWS_AS(build_field(ctx, cfg, 0.001, BcKind::neumann, 256, 256),
                    std::invalid_argument);
}
