#include <doctest.h>

#include <cmath>

#include "vortexflow/field_ops.hpp"
#include "vortexflow/tdgl.hpp"

using namespace vf;

namespace {
constexpr double kPi = 3.14159265358979323846;

Field constant_field(int n_r, int n_theta, double eps, Complex c, BcKind bc) {
    Field f(n_r, n_theta, eps, bc);
    for (auto& v : f.v) v = c;
    return f;
}

// High-accuracy reference for the scalar relaxation c' = |log eps| c (1-c^2)/eps^2.
double scalar_ode_oracle(double c0, double eps, double t_end) {
    double lf = std::abs(std::log(eps));
    auto rhs = [&](double c) { return lf * c * (1.0 - c * c) / (eps * eps); };
    int n = 200000;
    double h = t_end / n, c = c0;
    for (int i = 0; i < n; ++i) {
        double k1 = rhs(c);
        double k2 = rhs(c + 0.5 * h * k1);
        double k3 = rhs(c + 0.5 * h * k2);
        double k4 = rhs(c + h * k3);
        c += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return c;
}
} // namespace

TEST_CASE("u == 1 is a fixed point with an identically zero ledger") {
    SolverConfig cfg;
    cfg.epsilon = 0.1;
    cfg.dt = 1e-4;
    cfg.t_end = 1e-3;
    cfg.bc = BcKind::neumann;
    Field f0 = constant_field(16, 32, cfg.epsilon, Complex(1.0, 0.0), cfg.bc);
    TdglRun out = run_tdgl(f0, cfg, {});
    for (std::size_t i = 0; i < out.ledger.times.size(); ++i) {
        CHECK(out.ledger.energy[i] <= 1e-20);
        CHECK(out.ledger.dissipation[i] <= 1e-20);
    }
}

TEST_CASE("constant-modulus relaxation matches the scalar ODE oracle") {
    SolverConfig cfg;
    cfg.epsilon = 0.1;
    cfg.dt = 1e-6;
    cfg.t_end = 1e-4;
    cfg.bc = BcKind::neumann;
    Field f0 = constant_field(16, 32, cfg.epsilon, Complex(0.9, 0.0), cfg.bc);
    TdglSolver solver(f0, cfg);
    int n_steps = static_cast<int>(std::round(cfg.t_end / cfg.dt));
    for (int s = 0; s < n_steps; ++s) solver.step();
    double expect = scalar_ode_oracle(0.9, cfg.epsilon, cfg.t_end);
    for (const auto& v : solver.field().v)
        CHECK(v.real() == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("ledger residual is second order in dt for constant-modulus relaxation") {
    double residual[2];
    double e0 = 0.0;
    for (int p = 0; p < 2; ++p) {
        SolverConfig cfg;
        cfg.epsilon = 0.1;
        cfg.dt = 2e-5 / (1 << p);
        cfg.t_end = 0.01;
        cfg.bc = BcKind::neumann;
        Field f0 = constant_field(16, 32, cfg.epsilon, Complex(0.8, 0.0), cfg.bc);
        TdglRun out = run_tdgl(f0, cfg, {});
        residual[p] = out.ledger.max_residual();
        e0 = out.ledger.energy[0];
    }
    CHECK(residual[0] <= 1e-4 * e0);
    CHECK(residual[0] / residual[1] >= 3.0);
    CHECK(residual[0] / residual[1] <= 5.5);
}

TEST_CASE("centered vortex with symmetric dirichlet data stays put") {
    SolverConfig cfg;
    cfg.epsilon = 0.1;
    cfg.dt = 1e-3;
    cfg.t_end = 0.5;
    cfg.bc = BcKind::dirichlet;
    cfg.winding = 1;
    int n_r = 64, n_t = 128;
    KernelContext ctx;
    VortexConfiguration c0{{{0.0, 0.0}}, {1}};
    Field f0 = canonical_harmonic_map(ctx, c0, BcKind::dirichlet, n_r, n_t);
    f0.epsilon = cfg.epsilon;
    for (int i = 0; i < n_r; ++i)
        for (int k = 0; k < n_t; ++k)
            f0.at(i, k) *= std::tanh(f0.radius(i) / cfg.epsilon);
    TdglRun out = run_tdgl(f0, cfg, {cfg.t_end});
    const Field& uf = out.snapshots.back();
    // centroid of the core indicator (1-|u|^2)^2 must stay within one cell
    double mx = 0.0, my = 0.0, mass = 0.0;
    for (int i = 0; i < n_r; ++i)
        for (int k = 0; k < n_t; ++k) {
            double w = std::pow(1.0 - std::norm(uf.at(i, k)), 2) * uf.radius(i);
            Vec2 p = uf.point(i, k);
            mx += w * p.x;
            my += w * p.y;
            mass += w;
        }
    CHECK(std::hypot(mx / mass, my / mass) <= 1.0 / n_r);
    // gradient flow: energy non-increasing throughout
    for (std::size_t i = 1; i < out.ledger.energy.size(); ++i)
        CHECK(out.ledger.energy[i] <= out.ledger.energy[i - 1] + 1e-12 * out.ledger.energy[0]);
}

TEST_CASE("vortex pair run dissipates energy monotonically") {
    SolverConfig cfg;
    cfg.epsilon = 0.08;
    cfg.dt = 1e-4;
    cfg.t_end = 0.01;
    cfg.bc = BcKind::dirichlet;
    cfg.winding = 2;
    int n_r = 128, n_t = 256;
    KernelContext ctx;
    ctx.winding = 2;
    VortexConfiguration c0{{{0.3, 0.0}, {-0.3, 0.0}}, {1, 1}};
    Field f0 = canonical_harmonic_map(ctx, c0, BcKind::dirichlet, n_r, n_t);
    f0.epsilon = cfg.epsilon;
    for (int i = 0; i < n_r; ++i)
        for (int k = 0; k < n_t; ++k) {
            Vec2 p = f0.point(i, k);
            f0.at(i, k) *= std::tanh(dist(p, {0.3, 0.0}) / cfg.epsilon) *
                           std::tanh(dist(p, {-0.3, 0.0}) / cfg.epsilon);
        }
    TdglRun out = run_tdgl(f0, cfg, {});
    double maxmod = 0.0;
    const auto& E = out.ledger.energy;
    for (std::size_t i = 1; i < E.size(); ++i) CHECK(E[i] <= E[i - 1] + 1e-12 * E[0]);
    CHECK(E.back() < E.front());
    // maximum principle monitor
    TdglSolver probe(f0, cfg);
    for (int s = 0; s < 20; ++s) {
        probe.step();
        maxmod = std::max(maxmod, probe.field().max_modulus());
    }
    CHECK(maxmod <= std::max(1.0, f0.max_modulus()) + 1e-9);
}

TEST_CASE("identity residuals vanish for u == 1 and self-converge for smooth relaxation") {
    SolverConfig base;
    base.epsilon = 0.1;
    base.bc = BcKind::neumann;

    // u == 1: all residuals identically zero
    {
        SolverConfig cfg = base;
        cfg.dt = 1e-4;
        cfg.t_end = 1e-3;
        Field f0 = constant_field(16, 32, cfg.epsilon, Complex(1.0, 0.0), cfg.bc);
        TdglRun out = run_tdgl(f0, cfg, {3e-4, 4e-4, 5e-4});
        IdentityResiduals r = verify_identities(out.snapshots, out.probe_times);
        // "zero" at rounding level: the FFT round-trip and the eps^-2 factor
        // amplify unit roundoff into the low 1e-12 range
        CHECK(r.mass <= 1e-10);
        CHECK(r.supercurrent <= 1e-10);
        CHECK(r.energy <= 1e-10);
    }

    CHECK_THROWS_AS(verify_identities({constant_field(8, 16, 0.1, Complex(1.0), BcKind::neumann)},
                                      {0.0}),
                    std::invalid_argument);

    // smooth phase/modulus relaxation with zero normal derivative: residuals
    // shrink ~4x when dt and dr are halved together
    auto residuals_at = [&](int p) {
        SolverConfig cfg = base;
        cfg.dt = 2e-4 / (1 << p);
        cfg.t_end = 4e-3;
        int n_r = 48 << p, n_t = 96 << p;
        Field f0(n_r, n_t, cfg.epsilon, cfg.bc);
        for (int i = 0; i < n_r; ++i)
            for (int k = 0; k < n_t; ++k) {
                double r = f0.radius(i), th = f0.theta(k);
                double q = 2.0 * r * r - r * r * r * r; // q'(1) = 0
                f0.at(i, k) =
                    std::polar(0.9 + 0.05 * q * std::cos(th), 0.2 * q * std::sin(th));
            }
        double t0 = 2e-3;
        TdglRun out = run_tdgl(f0, cfg, {t0 - cfg.dt, t0, t0 + cfg.dt});
        return verify_identities(out.snapshots, out.probe_times);
    };
    IdentityResiduals c0 = residuals_at(0);
    IdentityResiduals c1 = residuals_at(1);
    CHECK(c0.supercurrent / c1.supercurrent >= 3.0);
    CHECK(c0.mass / c1.mass >= 3.0);
    CHECK(c0.energy / c1.energy >= 2.5);
}

TEST_CASE("blowup is reported with the last stable state") {
    SolverConfig cfg;
    cfg.epsilon = 0.05;
    cfg.dt = 0.05;
    cfg.t_end = 1.0;
    cfg.bc = BcKind::neumann;
    cfg.dt_guard_factor = 0.0; // disable the guard to provoke the instability
    Field f0 = constant_field(16, 32, cfg.epsilon, Complex(0.5, 0.0), cfg.bc);
    try {
        run_tdgl(f0, cfg, {});
        FAIL("expected TdglBlowup");
    } catch (const TdglBlowup& b) {
        CHECK(b.t_blowup > 0.0);
        CHECK(b.last_state.max_modulus() <= 10.0);
    }
}

TEST_CASE("config guard rejects oversized dt") {
    SolverConfig cfg;
    cfg.epsilon = 0.05;
    cfg.dt = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
