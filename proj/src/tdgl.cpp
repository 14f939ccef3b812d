#include "vortexflow/tdgl.hpp"

#include <algorithm>
#include <cmath>

#include "vortexflow/field_ops.hpp"

namespace vf {

namespace {
constexpr double kPi = 3.14159265358979323846;

double quad_weighted_norm2(const std::vector<Complex>& v, int n_r, int n_theta) {
    double dr = 1.0 / n_r, dt = 2.0 * kPi / n_theta;
    std::vector<double> c(v.size());
    for (int i = 0; i < n_r; ++i) {
        double w = (i + 0.5) * dr * dr * dt;
        for (int k = 0; k < n_theta; ++k) {
            std::size_t idx = static_cast<std::size_t>(i) * n_theta + k;
            c[idx] = w * std::norm(v[idx]);
        }
    }
    return pairwise_sum(c);
}

bool all_finite(const std::vector<Complex>& v) {
    for (const auto& z : v)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}
} // namespace

void SolverConfig::validate() const {
    if (epsilon <= 0.0 || epsilon >= 1.0)
        throw std::invalid_argument("SolverConfig: need 0 < epsilon < 1");
    if (dt <= 0.0) throw std::invalid_argument("SolverConfig: dt must be > 0");
    if (t_end < 0.0) throw std::invalid_argument("SolverConfig: t_end must be >= 0");
    if (dt_guard_factor > 0.0) {
        double guard = dt_guard_factor * epsilon * epsilon * log_factor();
        if (dt > guard)
            throw std::invalid_argument("SolverConfig: dt exceeds the stability guard");
    }
}

double SolverConfig::log_factor() const { return std::abs(std::log(epsilon)); }

double DissipationLedger::residual(std::size_t idx) const {
    return std::abs(energy.at(idx) + dissipation.at(idx) - energy.at(0));
}

double DissipationLedger::max_residual() const {
    double m = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) m = std::max(m, residual(i));
    return m;
}

TdglBlowup::TdglBlowup(double t, Field last)
    : std::runtime_error("tdgl: numerical blowup at t = " + std::to_string(t)),
      t_blowup(t), last_state(std::move(last)) {}

TdglSolver::TdglSolver(const Field& f0, const SolverConfig& cfg) : cfg_(cfg), f_(f0) {
    cfg_.validate();
    f_.validate();
    if (f_.epsilon != cfg_.epsilon)
        throw std::invalid_argument("TdglSolver: field epsilon does not match config");
    if (f_.bc != cfg_.bc)
        throw std::invalid_argument("TdglSolver: field bc does not match config");
    if (cfg_.bc == BcKind::dirichlet) {
        g_.resize(f_.n_theta);
        for (int k = 0; k < f_.n_theta; ++k) {
            double th = f_.theta(k);
            double phase = cfg_.winding * th;
            for (const auto& mode : cfg_.phi_star)
                phase += mode.cos_coeff * std::cos(mode.m * th) +
                         mode.sin_coeff * std::sin(mode.m * th);
            g_[k] = std::polar(1.0, phase);
        }
    }
    double alpha = 2.0 / (cfg_.dt * cfg_.log_factor());
    helmholtz_ = std::make_unique<HelmholtzSolver>(f_.n_r, f_.n_theta, alpha, cfg_.bc);
    fft_ = std::make_unique<ThetaTransform>(f_.n_r, f_.n_theta);
    nl_prev_ = nonlinearity(f_);
    record_state();
    ledger_.times.push_back(0.0);
    ledger_.energy.push_back(ledger_energy());
    ledger_.dissipation.push_back(0.0);
}

double TdglSolver::ledger_energy() const {
    // Discrete Dirichlet form matching apply_laplacian: radial face
    // differences (zero-flux origin face, dirichlet half-cell boundary
    // penalty), exact spectral theta form, pointwise potential. Minus its
    // weighted gradient is exactly the scheme's spatial operator, so the
    // semi-discrete flow decreases this functional monotonically.
    int n_r = f_.n_r, n = f_.n_theta;
    double dr = f_.dr(), dth = f_.dtheta();
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(n) * (3 * n_r + 1));
    for (int i = 1; i < n_r; ++i) {
        double c = 0.5 * (i * dr) * dth / dr;
        for (int k = 0; k < n; ++k)
            terms.push_back(c * std::norm(f_.at(i, k) - f_.at(i - 1, k)));
    }
    if (cfg_.bc == BcKind::dirichlet) {
        double c = dth / dr; // outermost face radius is 1
        for (int k = 0; k < n; ++k)
            terms.push_back(c * std::norm(g_[k] - f_.at(n_r - 1, k)));
    }
    std::vector<Complex> hat = f_.v;
    fft_->forward(hat.data());
    for (int i = 0; i < n_r; ++i) {
        double c = 0.5 * dr * dth / (f_.radius(i) * n);
        for (int m = 0; m < n; ++m) {
            double freq = fft_->frequency(m);
            terms.push_back(c * freq * freq *
                            std::norm(hat[static_cast<std::size_t>(i) * n + m]));
        }
    }
    double inv4e2 = 1.0 / (4.0 * cfg_.epsilon * cfg_.epsilon);
    for (int i = 0; i < n_r; ++i) {
        double w = f_.radius(i) * dr * dth;
        for (int k = 0; k < n; ++k) {
            double s = 1.0 - std::norm(f_.at(i, k));
            terms.push_back(w * inv4e2 * s * s);
        }
    }
    return pairwise_sum(terms);
}

std::vector<Complex> TdglSolver::nonlinearity(const Field& f) const {
    std::vector<Complex> nl(f.v.size());
    double inv_e2 = 1.0 / (f.epsilon * f.epsilon);
    for (std::size_t i = 0; i < f.v.size(); ++i)
        nl[i] = f.v[i] * ((1.0 - std::norm(f.v[i])) * inv_e2);
    return nl;
}

void TdglSolver::record_state() {
    std::vector<Complex> lap = apply_laplacian(f_.v, f_.n_r, f_.n_theta, f_.bc, g_);
    std::vector<Complex> nl = nonlinearity(f_);
    w_.resize(f_.v.size());
    double lf = cfg_.log_factor();
    for (std::size_t i = 0; i < f_.v.size(); ++i) w_[i] = lf * (lap[i] + nl[i]);
    lap_cache_ = std::move(lap);
    nl_cache_ = std::move(nl);
}

void TdglSolver::step() {
    // CNAB2: (alpha - Delta) u^{n+1} = alpha u^n + Delta u^n + 3 f^n - f^{n-1}
    // with alpha = 2/(dt |log eps|); the first step uses f^{n-1} := f^n.
    double alpha = helmholtz_->alpha();
    std::vector<Complex> rhs(f_.v.size());
    for (std::size_t i = 0; i < f_.v.size(); ++i)
        rhs[i] = alpha * f_.v[i] + lap_cache_[i] + 3.0 * nl_cache_[i] - nl_prev_[i];
    nl_prev_ = nl_cache_;

    std::vector<Complex> next = helmholtz_->solve(rhs, g_);
    if (!all_finite(next)) throw TdglBlowup(t_ + cfg_.dt, f_);
    double maxmod = 0.0;
    for (const auto& z : next) maxmod = std::max(maxmod, std::abs(z));
    if (maxmod > 10.0) throw TdglBlowup(t_ + cfg_.dt, f_);

    double d_old = quad_weighted_norm2(w_, f_.n_r, f_.n_theta) / cfg_.log_factor();
    f_.v = std::move(next);
    t_ += cfg_.dt;
    record_state();
    double d_new = quad_weighted_norm2(w_, f_.n_r, f_.n_theta) / cfg_.log_factor();

    ledger_.times.push_back(t_);
    ledger_.energy.push_back(ledger_energy());
    ledger_.dissipation.push_back(ledger_.dissipation.back() +
                                  0.5 * cfg_.dt * (d_old + d_new));
}

TdglRun run_tdgl(const Field& f0, const SolverConfig& cfg, std::vector<double> probes,
                 const std::function<void(int, double, const TdglSolver&)>& observer) {
    std::sort(probes.begin(), probes.end());
    TdglSolver solver(f0, cfg);
    TdglRun out;
    std::size_t next_probe = 0;
    auto snapshot_due = [&](double t) {
        while (next_probe < probes.size() && probes[next_probe] <= t + 0.5 * cfg.dt) {
            out.probe_times.push_back(t);
            out.snapshots.push_back(solver.field());
            ++next_probe;
        }
    };
    if (observer) observer(0, 0.0, solver);
    snapshot_due(0.0);
    int n_steps = static_cast<int>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
    for (int s = 1; s <= n_steps; ++s) {
        solver.step();
        if (observer) observer(s, solver.time(), solver);
        snapshot_due(solver.time());
    }
    out.ledger = solver.ledger();
    return out;
}

IdentityResiduals verify_identities(const std::vector<Field>& snaps,
                                    const std::vector<double>& times,
                                    const std::vector<Complex>& dirichlet_trace) {
    if (snaps.size() < 3 || times.size() != snaps.size())
        throw std::invalid_argument("verify_identities: need >= 3 consecutive snapshots");

    IdentityResiduals worst;
    for (std::size_t c = 1; c + 1 < snaps.size(); ++c) {
        const Field& um = snaps[c - 1];
        const Field& u0 = snaps[c];
        const Field& up = snaps[c + 1];
        double span = times[c + 1] - times[c - 1];
        double lf = std::abs(std::log(u0.epsilon));
        double eps2 = u0.epsilon * u0.epsilon;
        int n_r = u0.n_r, n_theta = u0.n_theta;
        auto idx = [&](int i, int k) { return static_cast<std::size_t>(i) * n_theta + k; };

        std::vector<Complex> ut(u0.v.size());
        for (std::size_t i = 0; i < ut.size(); ++i) ut[i] = (up.v[i] - um.v[i]) / span;

        // Mass identity (sign-corrected product rule of the flow):
        //   [dt/|log eps| - Delta + (2/eps^2)|u|^2](|u|^2 - 1) = -2 |grad u|^2.
        std::vector<Complex> q0(u0.v.size()), qt(u0.v.size());
        for (std::size_t i = 0; i < q0.size(); ++i) {
            q0[i] = std::norm(u0.v[i]) - 1.0;
            qt[i] = (std::norm(up.v[i]) - std::norm(um.v[i])) / span;
        }
        std::vector<Complex> zero_trace;
        if (u0.bc == BcKind::dirichlet) zero_trace.assign(n_theta, Complex(0.0, 0.0));
        std::vector<Complex> lap_q = apply_laplacian(q0, n_r, n_theta, u0.bc, zero_trace);
        std::vector<Complex> lap_u =
            apply_laplacian(u0.v, n_r, n_theta, u0.bc, dirichlet_trace);

        ScalarGrid e0 = energy_density(u0);
        ScalarGrid em = energy_density(um);
        ScalarGrid ep = energy_density(up);

        double mass_num = 0.0, mass_den = 0.0;
        double cur_num = 0.0, cur_den = 0.0;
        std::vector<double> res_e(u0.v.size()), den_e(u0.v.size());
        for (int i = 0; i < n_r; ++i) {
            double w = u0.radius(i) * u0.dr() * u0.dtheta();
            for (int k = 0; k < n_theta; ++k) {
                std::size_t p = idx(i, k);
                double gu2 = 2.0 * e0.at(i, k) -
                    (1.0 - std::norm(u0.v[p])) * (1.0 - std::norm(u0.v[p])) / (2.0 * eps2);
                double m_res = qt[p].real() / lf - lap_q[p].real() +
                               (2.0 / eps2) * std::norm(u0.v[p]) * q0[p].real() + 2.0 * gu2;
                mass_num += w * std::abs(m_res);
                mass_den += w * 2.0 * std::abs(gu2);

                // Supercurrent identity: (iu, u_t)/|log eps| = div j = (iu, Delta u).
                Complex iu(-u0.v[p].imag(), u0.v[p].real());
                auto pairing = [](const Complex& a, const Complex& b) {
                    return a.real() * b.real() + a.imag() * b.imag();
                };
                double lhs = pairing(iu, ut[p]) / lf;
                double rhs = pairing(iu, lap_u[p]);
                cur_num += w * std::abs(lhs - rhs);
                cur_den += w * std::max(std::abs(lhs), std::abs(rhs));
            }
        }

        // Energy identity: dt e = div(u_t, grad u) - |u_t|^2 / |log eps|.
        // Flux components in the polar frame, then a conservative divergence.
        ScalarGrid Vr(n_r, n_theta, u0.radius(0), u0.dr());
        ScalarGrid Vt(n_r, n_theta, u0.radius(0), u0.dr());
        auto pairing = [](const Complex& a, const Complex& b) {
            return a.real() * b.real() + a.imag() * b.imag();
        };
        for (int i = 0; i < n_r; ++i)
            for (int k = 0; k < n_theta; ++k) {
                std::size_t p = idx(i, k);
                Vr.at(i, k) = pairing(ut[p], radial_derivative(u0, i, k));
                Vt.at(i, k) = pairing(ut[p], angular_derivative(u0, i, k) / u0.radius(i));
            }
        for (int i = 0; i < n_r; ++i) {
            double r = u0.radius(i), dr = u0.dr(), dth = u0.dtheta();
            double w = r * dr * dth;
            for (int k = 0; k < n_theta; ++k) {
                std::size_t p = idx(i, k);
                double rVr_p, rVr_m;
                int km = (k + n_theta / 2) % n_theta;
                if (i == 0) {
                    rVr_m = u0.radius(0) * Vr.at(0, km); // antipodal mirror of r V_r
                    rVr_p = u0.radius(1) * Vr.at(1, k);
                } else if (i == n_r - 1) {
                    rVr_m = u0.radius(i - 1) * Vr.at(i - 1, k);
                    rVr_p = 2.0 * r * Vr.at(i, k) - rVr_m; // one-sided extension
                } else {
                    rVr_m = u0.radius(i - 1) * Vr.at(i - 1, k);
                    rVr_p = u0.radius(i + 1) * Vr.at(i + 1, k);
                }
                int kp = (k + 1) % n_theta, kq = (k + n_theta - 1) % n_theta;
                double div = (rVr_p - rVr_m) / (2.0 * dr * r) +
                             (Vt.at(i, kp) - Vt.at(i, kq)) / (2.0 * dth * r);
                double et = (ep.at(i, k) - em.at(i, k)) / span;
                double res = et - div + std::norm(ut[p]) / lf;
                res_e[p] = w * std::abs(res);
                den_e[p] = w * std::abs(et);
            }
        }
        double e_num = pairwise_sum(res_e);
        double e_den = pairwise_sum(den_e);

        worst.mass = std::max(worst.mass, mass_num / std::max(1.0, mass_den));
        worst.supercurrent = std::max(worst.supercurrent, cur_num / std::max(1.0, cur_den));
        worst.energy = std::max(worst.energy, e_num / std::max(1.0, e_den));
    }
    return worst;
}

} // namespace vf
