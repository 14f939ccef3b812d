#include "vortexflow/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vf {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void require_domain(bool cond, const char* msg) {
    if (!cond) throw std::domain_error(msg);
}

// phi_star correction: the flux perturbation (1/winding) d_tau phi_star is
// absorbed by a harmonic P with d_nu P = that flux on |z| = 1, added
// symmetrically as P(x) + P(y). In complex form
//   P(z) = Re[ sum_m ((b_m + i a_m)/winding) z^m ].
Complex phi_star_poly(const KernelContext& ctx, const Complex& z) {
    Complex s = 0.0;
    for (const auto& mode : ctx.phi_star) {
        if (mode.m < 1) continue;
        Complex kappa(mode.sin_coeff, mode.cos_coeff);
        s += kappa / static_cast<double>(ctx.winding) * std::pow(z, mode.m);
    }
    return s;
}

double phi_star_P(const KernelContext& ctx, const Complex& z) {
    return phi_star_poly(ctx, z).real();
}

// d/dz of the analytic function behind P; gradient of P is grad_log-style
// conj of this.
Complex phi_star_poly_deriv(const KernelContext& ctx, const Complex& z) {
    Complex s = 0.0;
    for (const auto& mode : ctx.phi_star) {
        if (mode.m < 1) continue;
        Complex kappa(mode.sin_coeff, mode.cos_coeff);
        s += kappa * static_cast<double>(mode.m) / static_cast<double>(ctx.winding) *
             std::pow(z, mode.m - 1);
    }
    return s;
}

} // namespace

Complex ConformalMap::eval(const Complex& z) const {
    Complex acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
    return acc;
}

Complex ConformalMap::deriv(const Complex& z) const {
    Complex acc = 0.0;
    const int n = static_cast<int>(coeffs.size());
    for (int k = n - 1; k >= 1; --k) acc = acc * z + coeffs[k] * static_cast<double>(k);
    return acc;
}

Complex ConformalMap::deriv2(const Complex& z) const {
    Complex acc = 0.0;
    const int n = static_cast<int>(coeffs.size());
    for (int k = n - 1; k >= 2; --k)
        acc = acc * z + coeffs[k] * static_cast<double>(k) * static_cast<double>(k - 1);
    return acc;
}

bool ConformalMap::is_identity() const {
    if (coeffs.size() != 2) return false;
    return coeffs[0] == Complex(0.0) && coeffs[1] == Complex(1.0);
}

bool KernelContext::has_phi_star() const {
    for (const auto& m : phi_star)
        if (m.m >= 1 && (m.cos_coeff != 0.0 || m.sin_coeff != 0.0)) return true;
    return false;
}

Complex KernelContext::to_disk(const Complex& z) const {
    return conformal_map ? conformal_map->eval(z) : z;
}

bool KernelContext::contains(const Vec2& p, double slack) const {
    return std::abs(to_disk(p.as_complex())) <= 1.0 + slack;
}

void KernelContext::validate() const {
    require(winding >= 1, "KernelContext: winding must be >= 1");
    if (!conformal_map) return;
    // Sample the map on concentric rings: derivative must not vanish and
    // distinct samples must stay distinct (injectivity check by sampling).
    std::vector<Complex> images;
    for (int ir = 1; ir <= 4; ++ir) {
        double r = 0.25 * ir;
        for (int k = 0; k < 64; ++k) {
            double th = 2.0 * kPi * k / 64.0;
            Complex z = std::polar(r, th);
            if (std::abs(conformal_map->deriv(z)) < 1e-12)
                throw std::invalid_argument("conformal map derivative vanishes at a sampled point");
            images.push_back(conformal_map->eval(z));
        }
    }
    for (std::size_t i = 0; i < images.size(); ++i)
        for (std::size_t j = i + 1; j < images.size(); ++j)
            if (std::abs(images[i] - images[j]) < 1e-10)
                throw std::invalid_argument("conformal map fails sampled injectivity check");
}

int VortexConfiguration::total_degree() const {
    int d = 0;
    for (int dj : degrees) d += dj;
    return d;
}

void VortexConfiguration::validate() const {
    require(positions.size() == degrees.size(),
            "VortexConfiguration: positions/degrees size mismatch");
    for (int d : degrees)
        require(d == 1 || d == -1, "VortexConfiguration: degrees must be +-1");
    for (std::size_t i = 0; i < positions.size(); ++i) {
        require(positions[i].norm() < 1.0, "VortexConfiguration: position not strictly interior");
        for (std::size_t j = i + 1; j < positions.size(); ++j)
            require(dist(positions[i], positions[j]) > 0.0,
                    "VortexConfiguration: coincident vortex positions");
    }
}

double neumann_N(const KernelContext& ctx, const Vec2& x, const Vec2& y) {
    require_domain(ctx.contains(x) && ctx.contains(y), "neumann_N: point outside closed domain");
    Complex zx = ctx.to_disk(x.as_complex());
    Complex zy = ctx.to_disk(y.as_complex());
    require_domain(x.x != y.x || x.y != y.y, "neumann_N: coincident points");
    // Full conformal transport of the disk kernel: Delta_x N = 2 pi delta_y
    // and the boundary flux d_tau(arg w) hold exactly in the physical domain.
    // Without a map (or with the identity) zx - zy is bit-equal to x - y and
    // this is the disk closed form.
    double base = std::log(std::abs(zx - zy)) + std::log(std::abs(1.0 - zx * std::conj(zy)));
    if (ctx.has_phi_star()) base += phi_star_P(ctx, zx) + phi_star_P(ctx, zy);
    return base + ctx.debug_bias;
}

double harmonic_part_H(const KernelContext& ctx, const Vec2& x, const Vec2& y) {
    require_domain(ctx.contains(x) && ctx.contains(y),
                   "harmonic_part_H: point outside closed domain");
    Complex zx = ctx.to_disk(x.as_complex());
    Complex zy = ctx.to_disk(y.as_complex());
    double h = std::log(std::abs(1.0 - zx * std::conj(zy)));
    if (ctx.conformal_map && !ctx.conformal_map->is_identity()) {
        // H = N - log|x-y| picks up the conformal distortion of the
        // singularity, log(|w(x)-w(y)|/|x-y|), equal to log|w'(x)| on the
        // diagonal.
        if (x.x == y.x && x.y == y.y)
            h += std::log(std::abs(ctx.conformal_map->deriv(x.as_complex())));
        else
            h += std::log(std::abs(zx - zy)) -
                 std::log(std::abs(x.as_complex() - y.as_complex()));
    }
    if (ctx.has_phi_star()) h += phi_star_P(ctx, zx) + phi_star_P(ctx, zy);
    return h + ctx.debug_bias;
}

double dirichlet_green_G(const KernelContext& ctx, const Vec2& x, const Vec2& y) {
    require_domain(ctx.contains(x) && ctx.contains(y),
                   "dirichlet_green_G: point outside closed domain");
    require_domain(x.x != y.x || x.y != y.y, "dirichlet_green_G: coincident points");
    Complex zx = ctx.to_disk(x.as_complex());
    Complex zy = ctx.to_disk(y.as_complex());
    // log|x-y| - log|1 - x conj(y)|; the image-charge form, equal to the
    // |y|x - y/|y| expression and regular at y = 0.
    return std::log(std::abs(zx - zy)) - std::log(std::abs(1.0 - zx * std::conj(zy)));
}

namespace {

// Gradient in x of the image part log|1 - w(x) conj(w(y))| + P(w(x)).
Vec2 grad_image_part(const KernelContext& ctx, const Vec2& x, const Vec2& y) {
    Complex zx = ctx.to_disk(x.as_complex());
    Complex zy = ctx.to_disk(y.as_complex());
    Complex wprime = ctx.conformal_map ? ctx.conformal_map->deriv(x.as_complex()) : Complex(1.0);
    Complex f_ratio = -std::conj(zy) * wprime / (1.0 - zx * std::conj(zy));
    Vec2 g = grad_log_abs(f_ratio);
    if (ctx.has_phi_star()) g += grad_log_abs(phi_star_poly_deriv(ctx, zx) * wprime);
    return g;
}

bool nontrivial_map(const KernelContext& ctx) {
    return ctx.conformal_map && !ctx.conformal_map->is_identity();
}

} // namespace

Vec2 grad_x_neumann_N(const KernelContext& ctx, const Vec2& x, const Vec2& y) {
    require_domain(x.x != y.x || x.y != y.y, "grad_x_neumann_N: coincident points");
    Vec2 g;
    if (nontrivial_map(ctx)) {
        Complex zx = ctx.to_disk(x.as_complex());
        Complex zy = ctx.to_disk(y.as_complex());
        g = grad_log_abs(ctx.conformal_map->deriv(x.as_complex()) / (zx - zy));
    } else {
        g = (x - y) / (x - y).norm2();
    }
    return g + grad_image_part(ctx, x, y);
}

Vec2 grad_x_harmonic_H(const KernelContext& ctx, const Vec2& x, const Vec2& y) {
    Vec2 g = grad_image_part(ctx, x, y);
    if (nontrivial_map(ctx)) {
        const auto& w = *ctx.conformal_map;
        if (x.x == y.x && x.y == y.y) {
            // grad_x of log(|w(x)-w(y)|/|x-y|) on the diagonal: expanding
            // w(x)-w(y) = w'(y)(x-y)(1 + (w''/2w')(x-y) + ...) gives half of
            // d/da log|w'(a)| to each slot.
            g += 0.5 * grad_log_abs(w.deriv2(x.as_complex()) / w.deriv(x.as_complex()));
        } else {
            Complex zx = ctx.to_disk(x.as_complex());
            Complex zy = ctx.to_disk(y.as_complex());
            g += grad_log_abs(w.deriv(x.as_complex()) / (zx - zy)) -
                 (x - y) / (x - y).norm2();
        }
    }
    return g;
}

double renormalized_W(const KernelContext& ctx, const VortexConfiguration& cfg) {
    cfg.validate();
    require_domain(rho_a(cfg) > 0.0, "renormalized_W: rho_a = 0");
    const std::size_t n = cfg.size();
    double w = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            if (k == j) continue;
            w -= kPi * cfg.degrees[j] * cfg.degrees[k] *
                 neumann_N(ctx, cfg.positions[j], cfg.positions[k]);
        }
        w -= kPi * harmonic_part_H(ctx, cfg.positions[j], cfg.positions[j]);
    }
    return w;
}

std::vector<Vec2> grad_W(const KernelContext& ctx, const VortexConfiguration& cfg) {
    cfg.validate();
    const std::size_t n = cfg.size();
    std::vector<Vec2> g(n);
    for (std::size_t j = 0; j < n; ++j) {
        Vec2 s{0.0, 0.0};
        for (std::size_t k = 0; k < n; ++k) {
            if (k == j) continue;
            s += static_cast<double>(cfg.degrees[j] * cfg.degrees[k]) *
                 grad_x_neumann_N(ctx, cfg.positions[j], cfg.positions[k]);
        }
        // d/da H(a,a) = 2 grad_x H(a,a) by kernel symmetry.
        s += grad_x_harmonic_H(ctx, cfg.positions[j], cfg.positions[j]);
        g[j] = -2.0 * kPi * s;
    }
    return g;
}

double rho_a(const VortexConfiguration& cfg) {
    require_domain(!cfg.positions.empty(), "rho_a: empty configuration");
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cfg.positions.size(); ++i) {
        m = std::min(m, 1.0 - cfg.positions[i].norm());
        for (std::size_t j = i + 1; j < cfg.positions.size(); ++j)
            m = std::min(m, dist(cfg.positions[i], cfg.positions[j]));
    }
    return m;
}

double rho_star(const std::vector<VortexConfiguration>& trajectory) {
    require_domain(!trajectory.empty(), "rho_star: empty trajectory");
    double m = std::numeric_limits<double>::infinity();
    for (const auto& cfg : trajectory) m = std::min(m, rho_a(cfg));
    return 0.25 * m;
}

double conformal_kernel(const KernelContext& ctx, const Vec2& x, const Vec2& y) {
    require(ctx.conformal_map.has_value(), "conformal_kernel: no conformal map in context");
    return neumann_N(ctx, x, y);
}

} // namespace vf
