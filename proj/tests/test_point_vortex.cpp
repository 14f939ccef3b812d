#include <doctest.h>

#include <cmath>

#include "vortexflow/point_vortex.hpp"

using namespace vf;

namespace {
constexpr double kPi = 3.14159265358979323846;

// Closed-form radius of a single vortex started at r0 on the real axis:
// log(r^2) - r^2 = log(r0^2) - r0^2 - 4t, solved by bisection.
double single_vortex_radius(double r0, double t) {
    double target = std::log(r0 * r0) - r0 * r0 - 4.0 * t;
    double lo = 1e-12, hi = r0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double v = std::log(mid * mid) - mid * mid;
        (v > target ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}
} // namespace

TEST_CASE("gradient-flow velocities match closed forms") {
    KernelContext ctx;
    CHECK(pv_rhs(ctx, {{{0.0, 0.0}}, {1}})[0].norm() == 0.0);

    // single vortex: da/dt = -2a/(1-|a|^2)
    auto v = pv_rhs(ctx, {{{0.5, 0.0}}, {1}});
    CHECK(v[0].x == doctest::Approx(-4.0 / 3.0).epsilon(1e-12));
    CHECK(v[0].y == doctest::Approx(0.0).epsilon(1e-12));

    // +1,+1 pair at (+/-0.5, 0)
    auto w = pv_rhs(ctx, {{{0.5, 0.0}, {-0.5, 0.0}}, {1, 1}});
    CHECK(w[0].x == doctest::Approx(1.4666666666666666).epsilon(1e-9));
    CHECK(w[0].y == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(w[1].x == doctest::Approx(-1.4666666666666666).epsilon(1e-9));
}

TEST_CASE("single vortex integrates along the closed-form orbit") {
    KernelContext ctx;

    // stationary at the origin
    OdeTrajectory still = integrate_gradient_flow(ctx, {{{0.0, 0.0}}, {1}}, 1.0, 0.0);
    CHECK(still.stop_reason == StopReason::reached_t_end);
    CHECK(still.states.back().positions[0].norm() <= 1e-12);

    // r0 = 0.5: probe t = 0.1 plus dense-output probes against the orbit
    std::vector<double> probes{0.025, 0.0617, 0.1};
    OdeTrajectory traj =
        integrate_gradient_flow(ctx, {{{0.5, 0.0}}, {1}}, 0.1, 0.0, probes);
    CHECK(traj.stop_reason == StopReason::reached_t_end);
    for (double tp : probes) {
        // locate the probe sample
        std::size_t idx = 0;
        for (; idx < traj.times.size(); ++idx)
            if (traj.times[idx] == tp) break;
        REQUIRE(idx < traj.times.size());
        const Vec2& a = traj.states[idx].positions[0];
        CHECK(a.y == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(a.x == doctest::Approx(single_vortex_radius(0.5, tp)).epsilon(1e-7));
    }
    CHECK(traj.states.back().positions[0].x == doctest::Approx(0.3900).epsilon(1e-3 / 0.39));

    // energy ledger: |W(a(t)) + int |da/dt|^2 - W(a(0))| small, W monotone
    CHECK(traj.max_ledger_residual() <= 1e-6 * (1.0 + std::abs(traj.W[0])));
    for (std::size_t i = 1; i < traj.W.size(); ++i) CHECK(traj.W[i] <= traj.W[i - 1] + 1e-12);
    // closed form W = -pi log(1 - r^2) for a degree-1 vortex at radius r
    CHECK(traj.W[0] == doctest::Approx(-kPi * std::log(0.75)).epsilon(1e-12));
}

TEST_CASE("symmetric pair stays mirror-symmetric and dissipates W") {
    KernelContext ctx;
    OdeTrajectory traj =
        integrate_gradient_flow(ctx, {{{0.3, 0.0}, {-0.3, 0.0}}, {1, 1}}, 1.0, 0.0);
    CHECK(traj.stop_reason == StopReason::reached_t_end);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto& p = traj.states[i].positions;
        CHECK(dist(p[0], -1.0 * p[1]) <= 1e-9);
        CHECK(std::abs(p[0].y) <= 1e-9);
    }
    CHECK(traj.max_ledger_residual() <= 1e-6 * (1.0 + std::abs(traj.W[0])));
    for (std::size_t i = 1; i < traj.W.size(); ++i) CHECK(traj.W[i] <= traj.W[i - 1] + 1e-12);
    // same-sign vortices repel
    CHECK(traj.states.back().positions[0].x > 0.3);
}

TEST_CASE("attracting pair stops at the rho breach, bisected in time") {
    KernelContext ctx;
    double rho_stop = 0.25;
    OdeTrajectory traj = integrate_gradient_flow(
        ctx, {{{0.25, 0.0}, {-0.25, 0.0}}, {1, -1}}, 10.0, rho_stop);
    CHECK(traj.stop_reason == StopReason::rho_breach);
    CHECK(traj.t_stop < 10.0);
    // the final sample sits at the crossing: rho_a within the bisection
    // window 1e-9 scaled by the collision speed
    double rho_end = rho_a(traj.states.back());
    CHECK(rho_end == doctest::Approx(rho_stop).epsilon(1e-5));
    // no sample below the stop threshold before the end
    for (std::size_t i = 0; i + 1 < traj.times.size(); ++i)
        CHECK(rho_a(traj.states[i]) >= rho_stop - 1e-12);

    // precondition violation
    CHECK_THROWS_AS(
        integrate_gradient_flow(ctx, {{{0.25, 0.0}, {-0.25, 0.0}}, {1, -1}}, 1.0, 0.9),
        std::invalid_argument);
}

TEST_CASE("collision drives step-size underflow and reports a breach") {
    KernelContext ctx;
    OdeTrajectory traj = integrate_gradient_flow(
        ctx, {{{0.05, 0.0}, {-0.05, 0.0}}, {1, -1}}, 10.0, 0.0);
    CHECK(traj.stop_reason == StopReason::rho_breach);
    // the pair annihilates well before the boundary time scale
    CHECK(traj.t_stop < 0.1);
    CHECK(rho_a(traj.states.back()) <= 1e-4);
}

TEST_CASE("mean-field time rescaling relabels sample times only") {
    KernelContext ctx;
    OdeTrajectory traj =
        integrate_gradient_flow(ctx, {{{0.5, 0.0}}, {1}}, 0.25, 0.0, {0.0625, 0.25});
    OdeTrajectory same = rescale_to_meanfield_time(traj, 1.0);
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        CHECK(same.times[i] == traj.times[i]);

    OdeTrajectory fast = rescale_to_meanfield_time(traj, 4.0);
    CHECK(fast.t_stop == 4.0 * traj.t_stop);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        CHECK(fast.times[i] == 4.0 * traj.times[i]);
        CHECK(fast.W[i] == traj.W[i]);
        CHECK(fast.kinetic[i] == traj.kinetic[i]);
        CHECK(dist(fast.states[i].positions[0], traj.states[i].positions[0]) == 0.0);
    }
    // the sample that sat at t = 0.25 appears at t_bar = 1
    bool found = false;
    for (double t : fast.times) found = found || t == 1.0;
    CHECK(found);
}

TEST_CASE("soft monitors stay bounded on random-ish configurations") {
    KernelContext ctx;
    OdeTrajectory traj = integrate_gradient_flow(
        ctx,
        {{{0.31, 0.12}, {-0.42, 0.25}, {0.05, -0.5}, {-0.1, -0.2}}, {1, 1, 1, 1}}, 0.05,
        0.0);
    CHECK(traj.max_ledger_residual() <= 1e-6 * (1.0 + std::abs(traj.W[0])));
    // calibrated constants for the disk (soft bounds, logged by the harness)
    CHECK(traj.grad_bound_ratio <= 100.0);
    CHECK(traj.w_scale_ratio <= 10.0);
}
