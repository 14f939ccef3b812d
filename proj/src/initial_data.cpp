#include "vortexflow/initial_data.hpp"

#include <cmath>
#include <stdexcept>

#include "vortexflow/field_ops.hpp"
#include "vortexflow/radial_profile.hpp"

namespace vf {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Midpoint quadrature of the density over an axis-aligned cell, restricted
// to the open unit disk.
double cell_mass(const Density& w, double x0, double y0, double side, int m = 16) {
    double acc = 0.0;
    double d = side / m;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            Vec2 p{x0 + (i + 0.5) * d, y0 + (j + 0.5) * d};
            if (p.norm() < 1.0) acc += w(p);
        }
    return acc * d * d;
}

} // namespace

PlacementReport place_vortices(const Density& omega0, int n) {
    if (n < 1) throw std::invalid_argument("place_vortices: n must be >= 1");
    PlacementReport out;
    out.n_requested = n;
    double h = std::pow(static_cast<double>(n), -0.25);
    out.cell_side = h;
    int cells = static_cast<int>(std::ceil(2.0 / h));
    double scale = n / (2.0 * kPi);

    for (int ix = 0; ix < cells; ++ix) {
        for (int iy = 0; iy < cells; ++iy) {
            double x0 = -1.0 + ix * h, y0 = -1.0 + iy * h;
            // the disk is convex: the square is interior iff all corners are
            double far = 0.0;
            for (int c = 0; c < 4; ++c) {
                Vec2 corner{x0 + (c & 1) * h, y0 + (c >> 1) * h};
                far = std::max(far, corner.norm());
            }
            double mass = cell_mass(omega0, x0, y0, h);
            if (far >= 1.0) { // boundary or exterior cell: emits nothing
                out.boundary_mass += mass;
                continue;
            }
            // guard the floor against roundoff when scale*mass is an
            // exact integer (uniform densities hit this case)
            int count = static_cast<int>(std::floor(scale * mass + 1e-9));
            if (count <= 0) continue;
            bool vertical = ((ix + iy) % 2 == 0); // checkerboard slice parity
            for (int s = 0; s < count; ++s) {
                double along = (s + 0.5) / count;
                Vec2 p = vertical ? Vec2{x0 + along * h, y0 + 0.5 * h}
                                  : Vec2{x0 + 0.5 * h, y0 + along * h};
                out.cfg.positions.push_back(p);
                out.cfg.degrees.push_back(1);
            }
        }
    }
    out.n_emitted = static_cast<int>(out.cfg.positions.size());
    if (out.boundary_mass > 1e-9)
        throw std::invalid_argument(
            "place_vortices: density support reaches the boundary cells (mass " +
            std::to_string(out.boundary_mass) + ")");
    return out;
}

double energy_bound_check(const VortexConfiguration& cfg) {
    const std::size_t n = cfg.size();
    if (n < 2) throw std::invalid_argument("energy_bound_check: need n >= 2");
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k)
            s -= 2.0 * std::log(dist(cfg.positions[j], cfg.positions[k]));
    return s / (static_cast<double>(n) * static_cast<double>(n));
}

PreparedField build_field(const KernelContext& ctx, const VortexConfiguration& cfg,
                          double eps, BcKind bc, int n_r, int n_theta) {
    if (eps < 2.0 / n_r)
        throw std::invalid_argument("build_field: unresolved core (eps < 2 dr)");
    Field u = canonical_harmonic_map(ctx, cfg, bc, n_r, n_theta);
    u.epsilon = eps;
    const RadialProfile& f0 = standard_profile();
    for (int i = 0; i < n_r; ++i)
        for (int k = 0; k < n_theta; ++k) {
            Vec2 p = u.point(i, k);
            double mod = 1.0;
            for (const auto& a : cfg.positions) mod *= f0.value(dist(p, a) / eps);
            u.at(i, k) *= mod;
        }
    PreparedField out{std::move(u)};
    double n = static_cast<double>(cfg.size());
    out.w_value = cfg.size() ? renormalized_W(ctx, cfg) : 0.0;
    double gamma = bbh_gamma(f0);
    out.excess_energy = total_energy(out.field) -
                        n * (kPi * std::abs(std::log(eps)) + gamma) - out.w_value;
    return out;
}

} // namespace vf
