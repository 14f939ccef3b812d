#include <doctest.h>

#include <cmath>
#include <random>

#include "vortexflow/kernels.hpp"

using namespace vf;

namespace {
constexpr double kPi = 3.14159265358979323846;

KernelContext disk_ctx() { return KernelContext{}; }

VortexConfiguration single(double x, double y, int d = 1) {
    return VortexConfiguration{{Vec2(x, y)}, {d}};
}
} // namespace

TEST_CASE("disk Neumann kernel closed form is bit-exact") {
    KernelContext ctx = disk_ctx();
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> U(-0.7, 0.7);
    for (int t = 0; t < 200; ++t) {
        Vec2 x(U(rng), U(rng)), y(U(rng), U(rng));
        if (dist(x, y) < 1e-12) continue;
        Complex zx = x.as_complex(), zy = y.as_complex();
        double expect = std::log(std::abs(zx - zy)) + std::log(std::abs(1.0 - zx * std::conj(zy)));
        CHECK(neumann_N(ctx, x, y) == expect);
        CHECK(harmonic_part_H(ctx, x, y) == std::log(std::abs(1.0 - zx * std::conj(zy))));
        CHECK(dirichlet_green_G(ctx, x, y) ==
              std::log(std::abs(zx - zy)) - std::log(std::abs(1.0 - zx * std::conj(zy))));
    }
}

TEST_CASE("kernel spot values") {
    KernelContext ctx = disk_ctx();
    CHECK(neumann_N(ctx, {0.5, 0.0}, {0.0, 0.0}) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
    CHECK(neumann_N(ctx, {0.5, 0.0}, {0.25, 0.0}) ==
          doctest::Approx(std::log(0.25) + std::log(0.875)).epsilon(1e-12));
    CHECK(harmonic_part_H(ctx, {0.0, 0.0}, {0.0, 0.0}) == 0.0);
    CHECK(harmonic_part_H(ctx, {0.5, 0.0}, {0.5, 0.0}) ==
          doctest::Approx(std::log(0.75)).epsilon(1e-12));
    CHECK(harmonic_part_H(ctx, {0.5, 0.0}, {-0.5, 0.0}) ==
          doctest::Approx(std::log(1.25)).epsilon(1e-12));
    CHECK(dirichlet_green_G(ctx, {0.5, 0.0}, {0.0, 0.0}) ==
          doctest::Approx(std::log(0.5)).epsilon(1e-12));
    CHECK(dirichlet_green_G(ctx, {0.5, 0.0}, {-0.5, 0.0}) ==
          doctest::Approx(std::log(1.0) - std::log(1.25)).epsilon(1e-12));
}

TEST_CASE("kernel symmetry over random pairs") {
    KernelContext ctx = disk_ctx();
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-0.99, 0.99);
    int done = 0;
    while (done < 1000) {
        Vec2 x(U(rng), U(rng)), y(U(rng), U(rng));
        if (x.norm() >= 1.0 || y.norm() >= 1.0 || dist(x, y) < 1e-9) continue;
        ++done;
        CHECK(neumann_N(ctx, x, y) == neumann_N(ctx, y, x));
        CHECK(dirichlet_green_G(ctx, x, y) == dirichlet_green_G(ctx, y, x));
    }
}

TEST_CASE("Green function vanishes on the boundary") {
    KernelContext ctx = disk_ctx();
    CHECK(std::abs(dirichlet_green_G(ctx, {1.0, 0.0}, {0.3, 0.2})) <= 1e-12);
    for (int k = 0; k < 64; ++k) {
        double th = 2.0 * kPi * k / 64.0;
        Vec2 x(std::cos(th), std::sin(th));
        CHECK(std::abs(dirichlet_green_G(ctx, x, {0.45, -0.3})) <= 1e-12);
    }
}

TEST_CASE("Neumann kernel boundary flux is 2 pi") {
    KernelContext ctx = disk_ctx();
    for (Vec2 y : {Vec2(0.0, 0.0), Vec2(0.5, 0.2), Vec2(-0.7, 0.35)}) {
        double flux = 0.0;
        int n = 128;
        for (int k = 0; k < n; ++k) {
            double th = 2.0 * kPi * k / n;
            Vec2 x(std::cos(th), std::sin(th));
            flux += grad_x_neumann_N(ctx, x, y).dot(x) * (2.0 * kPi / n);
        }
        CHECK(flux == doctest::Approx(2.0 * kPi).epsilon(1e-6));
    }
}

TEST_CASE("renormalized energy spot values") {
    KernelContext ctx = disk_ctx();
    CHECK(renormalized_W(ctx, single(0.0, 0.0)) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(renormalized_W(ctx, single(0.5, 0.0)) ==
          doctest::Approx(-kPi * std::log(0.75)).epsilon(1e-12));
    VortexConfiguration pair{{{0.5, 0.0}, {-0.5, 0.0}}, {1, 1}};
    double expect = -2.0 * kPi * (std::log(1.0) + std::log(1.25)) - 2.0 * kPi * std::log(0.75);
    CHECK(renormalized_W(ctx, pair) == doctest::Approx(expect).epsilon(1e-12));
}

namespace {
// Central-difference oracle for grad_W.
std::vector<Vec2> fd_grad_W(const KernelContext& ctx, const VortexConfiguration& cfg,
                            double h) {
    std::vector<Vec2> g(cfg.size());
    for (std::size_t j = 0; j < cfg.size(); ++j) {
        for (int c = 0; c < 2; ++c) {
            VortexConfiguration p = cfg, m = cfg;
            (c == 0 ? p.positions[j].x : p.positions[j].y) += h;
            (c == 0 ? m.positions[j].x : m.positions[j].y) -= h;
            double d = (renormalized_W(ctx, p) - renormalized_W(ctx, m)) / (2.0 * h);
            (c == 0 ? g[j].x : g[j].y) = d;
        }
    }
    return g;
}

double max_rel_err(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    double worst = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double scale = std::max(1.0, b[j].norm());
        worst = std::max(worst, dist(a[j], b[j]) / scale);
    }
    return worst;
}
} // namespace

TEST_CASE("grad_W spot values") {
    KernelContext ctx = disk_ctx();
    auto g0 = grad_W(ctx, single(0.0, 0.0));
    CHECK(g0[0].norm() <= 1e-14);
    auto g1 = grad_W(ctx, single(0.5, 0.0));
    CHECK(g1[0].x == doctest::Approx(2.0 * kPi * 0.5 / 0.75).epsilon(1e-12));
    CHECK(std::abs(g1[0].y) <= 1e-14);
    // -(1/pi) grad W for the (+1,+1) pair at (+-0.5, 0).
    VortexConfiguration pair{{{0.5, 0.0}, {-0.5, 0.0}}, {1, 1}};
    auto gp = grad_W(ctx, pair);
    CHECK(-gp[0].x / kPi == doctest::Approx(1.46667).epsilon(1e-4));
    CHECK(-gp[1].x / kPi == doctest::Approx(-1.46667).epsilon(1e-4));
    CHECK(max_rel_err(gp, fd_grad_W(ctx, pair, 1e-6 * rho_a(pair))) <= 1e-6);
}

TEST_CASE("grad_W matches central differences on random configurations") {
    KernelContext ctx = disk_ctx();
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> U(-0.85, 0.85);
    std::uniform_int_distribution<int> nd(1, 6), dd(0, 1);
    int done = 0;
    while (done < 100) {
        VortexConfiguration cfg;
        int n = nd(rng);
        for (int j = 0; j < n; ++j) {
            cfg.positions.push_back({U(rng), U(rng)});
            cfg.degrees.push_back(dd(rng) ? 1 : -1);
        }
        bool ok = true;
        for (const auto& p : cfg.positions)
            if (p.norm() >= 0.95) ok = false;
        if (!ok || rho_a(cfg) < 0.05) continue;
        ++done;
        auto g = grad_W(ctx, cfg);
        auto fd = fd_grad_W(ctx, cfg, 1e-6 * rho_a(cfg));
        CHECK(max_rel_err(g, fd) <= 1e-6);
    }
}

TEST_CASE("grad_W matches central differences with phi_star and conformal map") {
    KernelContext ctx;
    ctx.winding = 2;
    ctx.phi_star = {{1, 0.3, 0.0}, {3, 0.0, -0.2}};
    VortexConfiguration cfg{{{0.35, 0.1}, {-0.3, -0.25}}, {1, 1}};
    CHECK(max_rel_err(grad_W(ctx, cfg), fd_grad_W(ctx, cfg, 1e-7)) <= 1e-6);

    KernelContext cctx;
    cctx.conformal_map = ConformalMap{{Complex(0.0), Complex(1.0), Complex(0.1)}};
    cctx.validate();
    VortexConfiguration cfg2{{{0.3, 0.15}, {-0.25, -0.2}}, {1, -1}};
    CHECK(max_rel_err(grad_W(cctx, cfg2), fd_grad_W(cctx, cfg2, 1e-7)) <= 1e-6);
}

TEST_CASE("rho_a and rho_star") {
    CHECK(rho_a(single(0.0, 0.0)) == 1.0);
    VortexConfiguration pair{{{0.25, 0.0}, {-0.25, 0.0}}, {1, 1}};
    CHECK(rho_a(pair) == 0.5);
    std::vector<VortexConfiguration> traj{pair, pair, pair};
    CHECK(rho_star(traj) == 0.125);
}

TEST_CASE("diagonal H bound on the disk") {
    KernelContext ctx = disk_ctx();
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(-0.95, 0.95);
    for (int t = 0; t < 500; ++t) {
        Vec2 x(U(rng), U(rng));
        if (x.norm() > 0.95) continue;
        double h = harmonic_part_H(ctx, x, x);
        double d = 1.0 - x.norm();
        CHECK(std::isfinite(h));
        CHECK(std::abs(h) <= std::log(1.0 / d) + 2.0);
    }
}

TEST_CASE("kernel domain errors") {
    KernelContext ctx = disk_ctx();
    CHECK_THROWS_AS(neumann_N(ctx, {0.5, 0.0}, {0.5, 0.0}), std::domain_error);
    CHECK_THROWS_AS(neumann_N(ctx, {1.5, 0.0}, {0.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS(dirichlet_green_G(ctx, {0.2, 0.1}, {0.2, 0.1}), std::domain_error);
    VortexConfiguration bad{{{0.5, 0.0}, {0.5, 0.0}}, {1, 1}};
    CHECK_THROWS_AS(renormalized_W(ctx, bad), std::invalid_argument);
    VortexConfiguration outside{{{1.2, 0.0}}, {1}};
    CHECK_THROWS_AS(renormalized_W(ctx, outside), std::invalid_argument);
    VortexConfiguration bad_degree{{{0.2, 0.0}}, {2}};
    CHECK_THROWS_AS(renormalized_W(ctx, bad_degree), std::invalid_argument);
}

TEST_CASE("conformal kernel reduces to the disk form under the identity") {
    KernelContext ctx;
    ctx.conformal_map = ConformalMap{{Complex(0.0), Complex(1.0)}};
    KernelContext plain = disk_ctx();
    Vec2 x(0.4, -0.2), y(-0.1, 0.55);
    CHECK(conformal_kernel(ctx, x, y) == neumann_N(plain, x, y));
}

TEST_CASE("conformal kernel invariant under rotations of the disk") {
    double al = kPi / 3.0;
    KernelContext ctx;
    ctx.conformal_map = ConformalMap{{Complex(0.0), std::polar(1.0, al)}};
    KernelContext plain = disk_ctx();
    Vec2 x(0.4, -0.2), y(-0.1, 0.55);
    // Rotating both arguments of the disk kernel changes nothing; evaluating
    // through the rotation map therefore matches the unmapped kernel.
    CHECK(conformal_kernel(ctx, x, y) == doctest::Approx(neumann_N(plain, x, y)).epsilon(1e-14));
}

TEST_CASE("phi_star correction carries the prescribed boundary flux") {
    // d_nu N = d_tau theta + (1/winding) d_tau phi_star on |x| = 1; check the
    // normal derivative pointwise against the analytic flux for one mode.
    KernelContext ctx;
    ctx.winding = 2;
    ctx.phi_star = {{2, 0.4, -0.1}};
    Vec2 y(0.3, 0.1);
    for (int k = 0; k < 16; ++k) {
        double th = 2.0 * kPi * (k + 0.37) / 16.0;
        Vec2 x(std::cos(th), std::sin(th));
        double got = grad_x_neumann_N(ctx, x, y).dot(x);
        // phi_star = 0.4 cos 2th - 0.1 sin 2th; d_tau phi_star/winding
        double expect = 1.0 + (-0.4 * 2.0 * std::sin(2.0 * th) - 0.1 * 2.0 * std::cos(2.0 * th)) / 2.0;
        CHECK(got == doctest::Approx(expect).epsilon(1e-10));
    }
}
