#include "vortexflow/point_vortex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vf {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTol = 1e-9; // per-step error tolerance (absolute + relative)
// Step-size cap: the cubic-Hermite dense output is O(h^4), so very large
// steps on smooth stretches would degrade probe samples below the
// integrator's own accuracy.
constexpr double kMaxStep = 0.01;

using State = std::vector<Vec2>;

State add_scaled(const State& y, double h, const std::vector<const State*>& ks,
                 const std::vector<double>& cs) {
    State out = y;
    for (std::size_t m = 0; m < ks.size(); ++m)
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += (h * cs[m]) * (*ks[m])[j];
    return out;
}

// One Dormand-Prince 5(4) step. k1 = f(y) comes in, k7 = f(y5) goes out
// (first-same-as-last), together with the embedded error estimate.
struct Dp5Step {
    State y5;
    State k7;
    double err; // scaled RMS error, accept iff <= 1
};

Dp5Step dp5(const KernelContext& ctx, const std::vector<int>& degrees, const State& y,
            const State& k1, double h) {
    auto f = [&](const State& p) {
        return pv_rhs(ctx, VortexConfiguration{p, degrees});
    };
    State k2 = f(add_scaled(y, h, {&k1}, {1.0 / 5}));
    State k3 = f(add_scaled(y, h, {&k1, &k2}, {3.0 / 40, 9.0 / 40}));
    State k4 = f(add_scaled(y, h, {&k1, &k2, &k3}, {44.0 / 45, -56.0 / 15, 32.0 / 9}));
    State k5 = f(add_scaled(y, h, {&k1, &k2, &k3, &k4},
                            {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729}));
    State k6 = f(add_scaled(y, h, {&k1, &k2, &k3, &k4, &k5},
                            {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
                             -5103.0 / 18656}));
    State y5 = add_scaled(y, h, {&k1, &k3, &k4, &k5, &k6},
                          {35.0 / 384, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84});
    State k7 = f(y5);
    State y4 = add_scaled(y, h, {&k1, &k3, &k4, &k5, &k6, &k7},
                          {5179.0 / 57600, 7571.0 / 16695, 393.0 / 640, -92097.0 / 339200,
                           187.0 / 2100, 1.0 / 40});
    double s = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        double scale = kTol * (1.0 + std::max(y[j].norm(), y5[j].norm()));
        s += dist(y5[j], y4[j]) * dist(y5[j], y4[j]) / (scale * scale);
    }
    return {std::move(y5), std::move(k7), std::sqrt(s / y.size())};
}

// Cubic Hermite dense output on an accepted step [t0, t0 + h].
struct DenseSegment {
    double t0, h;
    State y0, f0, y1, f1;

    State at(double theta) const { // theta in [0, 1]
        double h00 = (1 + 2 * theta) * (1 - theta) * (1 - theta);
        double h10 = theta * (1 - theta) * (1 - theta);
        double h01 = theta * theta * (3 - 2 * theta);
        double h11 = theta * theta * (theta - 1);
        State out(y0.size());
        for (std::size_t j = 0; j < out.size(); ++j)
            out[j] = h00 * y0[j] + (h * h10) * f0[j] + h01 * y1[j] + (h * h11) * f1[j];
        return out;
    }
};

double speed2(const KernelContext& ctx, const std::vector<int>& degrees, const State& p) {
    State v = pv_rhs(ctx, VortexConfiguration{p, degrees});
    double s = 0.0;
    for (const auto& w : v) s += w.norm2();
    return s;
}

// Composite Simpson quadrature of |da/dt|^2 over [ta, tb] within a dense
// segment (4 panels: fast transients make a single panel per accepted step
// the dominant ledger error).
double kinetic_increment(const KernelContext& ctx, const std::vector<int>& degrees,
                         const DenseSegment& seg, double ta, double tb) {
    constexpr int panels = 4;
    double acc = 0.0;
    double prev_t = ta;
    double prev_s = speed2(ctx, degrees, seg.at((ta - seg.t0) / seg.h));
    for (int p = 1; p <= panels; ++p) {
        double t1 = ta + (tb - ta) * p / panels;
        double tm = 0.5 * (prev_t + t1);
        double sm = speed2(ctx, degrees, seg.at((tm - seg.t0) / seg.h));
        double s1 = speed2(ctx, degrees, seg.at((t1 - seg.t0) / seg.h));
        acc += (t1 - prev_t) / 6.0 * (prev_s + 4.0 * sm + s1);
        prev_t = t1;
        prev_s = s1;
    }
    return acc;
}

} // namespace

double OdeTrajectory::ledger_residual(std::size_t idx) const {
    // da/dt = -(1/pi) grad W gives dW/dt = -pi |da/dt|^2 exactly, so the
    // dissipation identity carries a factor pi on the kinetic term.
    return std::abs(W.at(idx) + kPi * kinetic.at(idx) - W.at(0));
}

double OdeTrajectory::max_ledger_residual() const {
    double m = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) m = std::max(m, ledger_residual(i));
    return m;
}

std::vector<Vec2> pv_rhs(const KernelContext& ctx, const VortexConfiguration& cfg) {
    std::vector<Vec2> g = grad_W(ctx, cfg);
    for (auto& v : g) v = (-1.0 / kPi) * v;
    return g;
}

OdeTrajectory integrate_gradient_flow(const KernelContext& ctx,
                                      const VortexConfiguration& cfg0, double t_end,
                                      double rho_stop,
                                      const std::vector<double>& probes) {
    cfg0.validate();
    if (t_end < 0.0) throw std::invalid_argument("integrate_gradient_flow: t_end < 0");
    if (rho_a(cfg0) <= rho_stop)
        throw std::invalid_argument("integrate_gradient_flow: rho_a(a(0)) <= rho_stop");

    const std::vector<int>& degrees = cfg0.degrees;
    double n = static_cast<double>(cfg0.size());
    std::vector<double> ps(probes);
    std::sort(ps.begin(), ps.end());
    std::size_t next_probe = 0;
    while (next_probe < ps.size() && ps[next_probe] <= 0.0) ++next_probe;

    OdeTrajectory traj;
    auto record = [&](double t, const State& y, double kin) {
        VortexConfiguration c{y, degrees};
        traj.times.push_back(t);
        traj.states.push_back(c);
        traj.W.push_back(renormalized_W(ctx, c));
        traj.kinetic.push_back(kin);
        double rho = rho_a(c);
        std::vector<Vec2> g = grad_W(ctx, c);
        double gmax = 0.0;
        for (const auto& v : g) gmax = std::max(gmax, v.norm());
        traj.grad_bound_ratio = std::max(traj.grad_bound_ratio, gmax * rho / n);
        traj.w_scale_ratio = std::max(
            traj.w_scale_ratio,
            std::abs(traj.W.back()) / (n * n * n + n * n / (rho * rho)));
    };

    State y = cfg0.positions;
    State f = pv_rhs(ctx, cfg0);
    double t = 0.0, kin = 0.0;
    record(0.0, y, 0.0);

    double fmax = 0.0;
    for (const auto& v : f) fmax = std::max(fmax, v.norm());
    double h = std::min(kMaxStep, 0.01 / (1.0 + fmax));

    auto breach = [&](const State& p) {
        return rho_a(VortexConfiguration{p, degrees}) < rho_stop;
    };

    while (t < t_end) {
        h = std::min(h, t_end - t);
        if (h < 1e-14 * std::max(1.0, t)) { // step-size underflow: collision
            traj.stop_reason = StopReason::rho_breach;
            traj.t_stop = t;
            return traj;
        }
        Dp5Step s = dp5(ctx, degrees, y, f, h);
        if (!(s.err <= 1.0)) { // rejects NaN/inf estimates too
            h *= std::isfinite(s.err) ? std::max(0.2, 0.9 * std::pow(s.err, -0.2)) : 0.2;
            continue;
        }
        DenseSegment seg{t, h, y, f, s.y5, s.k7};
        double t_next = t + h;

        double t_cut = t_next;
        bool cut = false;
        if (breach(s.y5)) {
            // first crossing of rho_a below rho_stop, bisected to 1e-9 in time
            double lo = 0.0, hi = 1.0;
            while (h * (hi - lo) > 1e-9) {
                double mid = 0.5 * (lo + hi);
                (breach(seg.at(mid)) ? hi : lo) = mid;
            }
            t_cut = t + hi * h;
            cut = true;
        }

        double t_mark = t;
        while (next_probe < ps.size() && ps[next_probe] < t_cut) {
            double tp = ps[next_probe++];
            kin += kinetic_increment(ctx, degrees, seg, t_mark, tp);
            record(tp, seg.at((tp - t) / h), kin);
            t_mark = tp;
        }
        kin += kinetic_increment(ctx, degrees, seg, t_mark, t_cut);
        if (cut) {
            record(t_cut, seg.at((t_cut - t) / h), kin);
            traj.stop_reason = StopReason::rho_breach;
            traj.t_stop = t_cut;
            return traj;
        }
        while (next_probe < ps.size() && ps[next_probe] <= t_next) ++next_probe;
        record(t_next, s.y5, kin);
        t = t_next;
        y = std::move(s.y5);
        f = std::move(s.k7);
        h *= std::clamp(0.9 * std::pow(std::max(s.err, 1e-10), -0.2), 0.2, 5.0);
        h = std::min(h, kMaxStep);
    }
    traj.stop_reason = StopReason::reached_t_end;
    traj.t_stop = t;
    return traj;
}

OdeTrajectory rescale_to_meanfield_time(OdeTrajectory traj, double n) {
    for (auto& t : traj.times) t *= n;
    traj.t_stop *= n;
    return traj;
}

} // namespace vf
