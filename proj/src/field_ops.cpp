#include "vortexflow/field_ops.hpp"

#include <stdexcept>

namespace vf {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Value just inside the origin: the cell-centered grid mirrors through the
// origin onto the antipodal column.
inline Complex inner_mirror(const Field& f, int k) {
    return f.at(0, (k + f.n_theta / 2) % f.n_theta);
}

inline Complex d_r(const Field& f, int i, int k) { return radial_derivative(f, i, k); }
inline Complex d_theta(const Field& f, int i, int k) { return angular_derivative(f, i, k); }

// (a, b) = Re(conj(a) b).
inline double pairing(const Complex& a, const Complex& b) {
    return a.real() * b.real() + a.imag() * b.imag();
}

// Phase increment from a to b via the principal branch of arg(b conj(a)).
inline double phase_step(const Complex& a, const Complex& b) {
    return std::arg(b * std::conj(a));
}

} // namespace

Complex radial_derivative(const Field& f, int i, int k) {
    double dr = f.dr();
    if (i == 0) return (f.at(1, k) - inner_mirror(f, k)) / (2.0 * dr);
    if (i == f.n_r - 1) return (f.at(i, k) - f.at(i - 1, k)) / dr;
    return (f.at(i + 1, k) - f.at(i - 1, k)) / (2.0 * dr);
}

Complex angular_derivative(const Field& f, int i, int k) {
    int kp = (k + 1) % f.n_theta;
    int km = (k + f.n_theta - 1) % f.n_theta;
    return (f.at(i, kp) - f.at(i, km)) / (2.0 * f.dtheta());
}

ScalarGrid energy_density(const Field& f) {
    f.validate();
    ScalarGrid e(f.n_r, f.n_theta, f.radius(0), f.dr());
    double inv4e2 = 1.0 / (4.0 * f.epsilon * f.epsilon);
    for (int i = 0; i < f.n_r; ++i) {
        double r = f.radius(i);
        for (int k = 0; k < f.n_theta; ++k) {
            Complex ur = d_r(f, i, k);
            Complex ut = d_theta(f, i, k) / r;
            double grad2 = std::norm(ur) + std::norm(ut);
            double s = 1.0 - std::norm(f.at(i, k));
            e.at(i, k) = 0.5 * grad2 + inv4e2 * s * s;
        }
    }
    return e;
}

double total_energy(const Field& f) { return energy_density(f).integrate(); }

VectorGrid supercurrent(const Field& f) {
    f.validate();
    VectorGrid j(f.n_r, f.n_theta, f.radius(0), f.dr());
    for (int i = 0; i < f.n_r; ++i) {
        double r = f.radius(i);
        for (int k = 0; k < f.n_theta; ++k) {
            Complex u = f.at(i, k);
            Complex iu(-u.imag(), u.real());
            double jr = pairing(iu, d_r(f, i, k));
            double jt = pairing(iu, d_theta(f, i, k) / r);
            double c = std::cos(f.theta(k)), s = std::sin(f.theta(k));
            j.at(i, k) = Vec2(jr * c - jt * s, jr * s + jt * c);
        }
    }
    return j;
}

ScalarGrid jacobian(const Field& f) {
    f.validate();
    double dr = f.dr(), dt = f.dtheta();
    ScalarGrid J(f.n_r - 1, f.n_theta, dr, dr);
    for (int i = 0; i + 1 < f.n_r; ++i) {
        double rc = (i + 1) * dr;
        double area = rc * dr * dt;
        for (int k = 0; k < f.n_theta; ++k) {
            int kp = (k + 1) % f.n_theta;
            Complex u00 = f.at(i, k), u10 = f.at(i + 1, k);
            Complex u11 = f.at(i + 1, kp), u01 = f.at(i, kp);
            double mmin = std::min(std::min(std::abs(u00), std::abs(u10)),
                                   std::min(std::abs(u11), std::abs(u01)));
            double plaq;
            if (mmin >= 0.2) {
                plaq = 0.5 * (phase_step(u00, u10) + phase_step(u10, u11) +
                              phase_step(u11, u01) + phase_step(u01, u00));
            } else {
                // det grad u in polar: (1/r)(d_r u1 d_t u2 - d_t u1 d_r u2);
                // times the cell area r dr dtheta this is the bracket * dr dt.
                Complex dur = 0.5 * ((u10 - u00) + (u11 - u01));
                Complex dut = 0.5 * ((u01 - u00) + (u11 - u10));
                plaq = (dur.real() * dut.imag() - dut.real() * dur.imag());
            }
            J.at(i, k) = plaq / area;
        }
    }
    return J;
}

double phase_circulation_half(const Field& f, int i0, int i1, int k0, int k1) {
    if (i0 < 0 || i1 >= f.n_r || i0 >= i1 || k1 <= k0)
        throw std::invalid_argument("phase_circulation_half: bad rectangle");
    auto at = [&](int i, int k) { return f.at(i, ((k % f.n_theta) + f.n_theta) % f.n_theta); };
    double s = 0.0;
    for (int i = i0; i < i1; ++i) s += phase_step(at(i, k0), at(i + 1, k0));
    for (int k = k0; k < k1; ++k) s += phase_step(at(i1, k), at(i1, k + 1));
    for (int i = i1; i > i0; --i) s += phase_step(at(i, k1), at(i - 1, k1));
    for (int k = k1; k > k0; --k) s += phase_step(at(i0, k), at(i0, k - 1));
    return 0.5 * s;
}

double origin_cap_circulation(const Field& f) {
    double s = 0.0;
    for (int k = 0; k < f.n_theta; ++k)
        s += phase_step(f.at(0, k), f.at(0, (k + 1) % f.n_theta));
    return 0.5 * s;
}

Field canonical_harmonic_map(const KernelContext& ctx, const VortexConfiguration& cfg,
                             BcKind bc, int n_r, int n_theta) {
    cfg.validate();
    if (ctx.conformal_map && !ctx.conformal_map->is_identity())
        throw std::invalid_argument("canonical_harmonic_map: disk grids only");
    double dr = 1.0 / n_r;
    for (const auto& a : cfg.positions)
        if (a.norm() > 1.0 - 2.0 * dr)
            throw std::invalid_argument(
                "canonical_harmonic_map: vortex within 2 grid cells of the boundary");
    if (bc == BcKind::dirichlet && cfg.total_degree() != ctx.winding)
        throw std::invalid_argument(
            "canonical_harmonic_map: total degree must equal the boundary winding");

    // Boundary data for the single-valued harmonic correction psi. Writing
    // theta_k for the grid angles and a_j for the vortices:
    //   dirichlet: psi|_{r=1} = phi_star(theta)
    //              + sum_j d_j arg(1 - conj(a_j) e^{i theta}),
    //     which makes the total phase trace winding*theta + phi_star;
    //   neumann:   d_r psi|_{r=1} = -sum_j d_j Im(e^{i theta}/(e^{i theta}-a_j)),
    //     cancelling the normal current of the vortex phases (mean zero).
    std::vector<double> g(n_theta, 0.0);
    double dt = 2.0 * kPi / n_theta;
    for (int k = 0; k < n_theta; ++k) {
        Complex z = std::polar(1.0, k * dt);
        double s = 0.0;
        for (std::size_t j = 0; j < cfg.size(); ++j) {
            Complex a = cfg.positions[j].as_complex();
            if (bc == BcKind::dirichlet)
                s += cfg.degrees[j] * std::arg(1.0 - std::conj(a) * z);
            else
                s -= cfg.degrees[j] * (z / (z - a)).imag();
        }
        if (bc == BcKind::dirichlet)
            for (const auto& mode : ctx.phi_star)
                s += mode.cos_coeff * std::cos(mode.m * k * dt) +
                     mode.sin_coeff * std::sin(mode.m * k * dt);
        g[k] = s;
    }

    // Fourier-analyze the boundary data and extend harmonically: psi(r,theta)
    // = Re sum_{m>=1} gamma_m (r e^{i theta})^m (+ mean for dirichlet).
    // Neumann data has zero mean and gamma_m gains the 1/m of the radial ODE.
    int n_modes = n_theta / 2;
    std::vector<Complex> gamma(n_modes + 1, Complex(0.0, 0.0));
    double mean = 0.0;
    for (int k = 0; k < n_theta; ++k) mean += g[k];
    mean /= n_theta;
    for (int m = 1; m <= n_modes; ++m) {
        Complex c(0.0, 0.0);
        for (int k = 0; k < n_theta; ++k)
            c += g[k] * std::polar(1.0, -m * k * dt);
        c *= 2.0 / n_theta;
        if (m == n_modes && n_theta % 2 == 0) c *= 0.5; // shared Nyquist mode
        gamma[m] = (bc == BcKind::neumann) ? c / static_cast<double>(m) : c;
    }

    Field u(n_r, n_theta, 1.0, bc);
    for (int i = 0; i < n_r; ++i) {
        double r = u.radius(i);
        for (int k = 0; k < n_theta; ++k) {
            Complex z = std::polar(r, k * dt);
            // Horner evaluation of sum gamma_m z^m.
            Complex p(0.0, 0.0);
            for (int m = n_modes; m >= 1; --m) p = (p + gamma[m]) * z;
            double psi = p.real() + (bc == BcKind::dirichlet ? mean : 0.0);
            double phase = psi;
            for (std::size_t j = 0; j < cfg.size(); ++j)
                phase += cfg.degrees[j] *
                         std::arg(z - cfg.positions[j].as_complex());
            u.at(i, k) = std::polar(1.0, phase);
        }
    }
    return u;
}

} // namespace vf
