#include "vortexflow/mean_field.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace vf {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec2 blob_kernel(const Vec2& z, double delta_b) {
    double denom = std::max(z.x * z.x + z.y * z.y, delta_b * delta_b);
    return z * (1.0 / denom);
}

} // namespace

double VorticityMeasure::total_mass() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

void VorticityMeasure::validate() const {
    if (positions.size() != weights.size() ||
        (!frozen.empty() && frozen.size() != positions.size()))
        throw std::invalid_argument("VorticityMeasure: field size mismatch");
    if (!(blob_radius > 0.0))
        throw std::invalid_argument("VorticityMeasure: blob radius must be positive");
    for (std::size_t k = 0; k < positions.size(); ++k) {
        if (weights[k] < 0.0)
            throw std::invalid_argument("VorticityMeasure: negative weight");
        bool on_wall = !frozen.empty() && frozen[k];
        if (!on_wall && positions[k].norm() >= 1.0)
            throw std::invalid_argument("VorticityMeasure: position not interior");
    }
}

Vec2 mf_velocity(const KernelContext& ctx, const VorticityMeasure& m, const Vec2& x) {
    Vec2 v{0.0, 0.0};
    for (std::size_t k = 0; k < m.size(); ++k) {
        Vec2 g = grad_x_harmonic_H(ctx, x, m.positions[k]);
        v = v + (blob_kernel(x - m.positions[k], m.blob_radius) + g) * m.weights[k];
    }
    return v;
}

VorticityMeasure empirical_measure(const VortexConfiguration& cfg, double blob_radius) {
    cfg.validate();
    for (int d : cfg.degrees)
        if (d != 1)
            throw std::invalid_argument(
                "empirical_measure: only all-plus-one configurations are supported");
    VorticityMeasure m;
    m.positions = cfg.positions;
    m.weights.assign(cfg.size(), 2.0 * kPi / static_cast<double>(cfg.size()));
    m.frozen.assign(cfg.size(), 0);
    m.blob_radius = blob_radius;
    return m;
}

VorticityMeasure step_particles(const KernelContext& ctx, const VorticityMeasure& m,
                                double dt_bar, StepLog* log) {
    m.validate();
    VorticityMeasure out = m;
    if (out.frozen.empty()) out.frozen.assign(out.size(), 0);

    // Advection speed is mf_velocity / pi: with weights 2 pi / n this makes
    // one unit of rescaled time equal n units of the vortex-ODE time, so the
    // particle flow is the n-body gradient flow itself.
    auto velocities = [&](const VorticityMeasure& state) {
        std::vector<Vec2> v(state.size(), Vec2{0.0, 0.0});
        for (std::size_t k = 0; k < state.size(); ++k)
            if (state.frozen.empty() || !state.frozen[k])
                v[k] = mf_velocity(ctx, state, state.positions[k]) * (1.0 / kPi);
        return v;
    };
    VorticityMeasure s2 = out, s3 = out, s4 = out;
    std::vector<Vec2> k1 = velocities(out);
    for (std::size_t k = 0; k < out.size(); ++k)
        s2.positions[k] = out.positions[k] + k1[k] * (0.5 * dt_bar);
    std::vector<Vec2> k2 = velocities(s2);
    for (std::size_t k = 0; k < out.size(); ++k)
        s3.positions[k] = out.positions[k] + k2[k] * (0.5 * dt_bar);
    std::vector<Vec2> k3 = velocities(s3);
    for (std::size_t k = 0; k < out.size(); ++k)
        s4.positions[k] = out.positions[k] + k3[k] * dt_bar;
    std::vector<Vec2> k4 = velocities(s4);

    for (std::size_t k = 0; k < out.size(); ++k) {
        if (out.frozen[k]) continue;
        Vec2 p = out.positions[k] +
                 (k1[k] + (k2[k] + k3[k]) * 2.0 + k4[k]) * (dt_bar / 6.0);
        if (p.norm() >= 1.0) {
            p = p * (1.0 / p.norm());
            out.frozen[k] = 1;
            if (log) ++log->clamped;
        }
        out.positions[k] = p;
    }
    return out;
}

WeakResidualReport weak_residual(const KernelContext& ctx,
                                 const std::vector<VorticityMeasure>& traj,
                                 const std::vector<double>& times,
                                 const TestFunction& chi, int n_grid) {
    if (traj.size() != times.size() || traj.size() < 2)
        throw std::invalid_argument("weak_residual: need >= 2 aligned snapshots");
    for (const auto& m : traj)
        if (chi.support_radius > 1.0 - 2.0 * m.blob_radius)
            throw std::invalid_argument(
                "weak_residual: test function support too close to the wall");

    double h = 2.0 * chi.support_radius / n_grid;
    std::vector<Vec2> nodes;
    for (int i = 0; i < n_grid; ++i)
        for (int j = 0; j < n_grid; ++j) {
            Vec2 p{-chi.support_radius + (i + 0.5) * h,
                   -chi.support_radius + (j + 0.5) * h};
            if (p.norm() < chi.support_radius) nodes.push_back(p);
        }

    // per-snapshot integrands of the three terms
    std::vector<double> f1(traj.size()), f2(traj.size()), f3(traj.size());
    for (std::size_t s = 0; s < traj.size(); ++s) {
        double t = times[s];
        const VorticityMeasure& m = traj[s];
        double transport = 0.0;
        for (std::size_t k = 0; k < m.size(); ++k)
            transport -= m.weights[k] * chi.dt(m.positions[k], t);
        double diag = 0.0, off = 0.0;
        // The velocity entering the quadratic terms is the advection field
        // over sqrt(2): with mass-2 pi measures this scaling makes the
        // three-term combination the exact time-boundary identity
        //   d/dt integral(chi omega) = integral(grad chi . U omega),
        // so it vanishes for transported solutions and chi vanishing at the
        // window ends.
        const double scale = 1.0 / (kPi * std::sqrt(2.0));
        for (const Vec2& p : nodes) {
            Vec2 v = mf_velocity(ctx, m, p) * scale;
            diag += 0.5 * (chi.dxx(p, t) - chi.dyy(p, t)) * (v.x * v.x - v.y * v.y);
            off += 2.0 * chi.dxy(p, t) * v.x * v.y;
        }
        f1[s] = transport;
        f2[s] = diag * h * h;
        f3[s] = off * h * h;
    }
    WeakResidualReport rep;
    for (std::size_t s = 0; s + 1 < traj.size(); ++s) {
        double w = 0.5 * (times[s + 1] - times[s]);
        rep.transport_term += w * (f1[s] + f1[s + 1]);
        rep.diagonal_term += w * (f2[s] + f2[s + 1]);
        rep.offdiag_term += w * (f3[s] + f3[s + 1]);
    }
    rep.total = rep.transport_term + rep.diagonal_term + rep.offdiag_term;
    return rep;
}

double maximal_vorticity(const VorticityMeasure& m, double r) {
    if (!(r > 0.0 && r <= 0.5))
        throw std::invalid_argument("maximal_vorticity: need 0 < r <= 1/2");
    double spacing = r / 4.0;
    // only lattice centers within r of some atom can score; dedupe indices
    std::set<std::pair<long, long>> centers;
    long reach = static_cast<long>(std::ceil(r / spacing)) + 1;
    for (const Vec2& p : m.positions) {
        long ci = static_cast<long>(std::floor(p.x / spacing));
        long cj = static_cast<long>(std::floor(p.y / spacing));
        for (long di = -reach; di <= reach; ++di)
            for (long dj = -reach; dj <= reach; ++dj) centers.insert({ci + di, cj + dj});
    }
    double best = 0.0;
    for (const auto& [ci, cj] : centers) {
        Vec2 c{ci * spacing, cj * spacing};
        double mass = 0.0;
        for (std::size_t k = 0; k < m.size(); ++k)
            if (dist(c, m.positions[k]) <= r) mass += m.weights[k];
        best = std::max(best, mass);
    }
    return best;
}

} // namespace vf
