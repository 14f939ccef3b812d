#ifndef VORTEXFLOW_KERNELS_HPP
#define VORTEXFLOW_KERNELS_HPP

#include <optional>
#include <vector>

#include "vortexflow/geometry.hpp"

namespace vf {

enum class KernelKind { neumann, dirichlet_green };

/// One Fourier mode of the boundary phase phi_star(theta)
///   = sum_m (cos_coeff * cos(m theta) + sin_coeff * sin(m theta)).
/// Representing phi_star by modes with m >= 1 makes the zero-mean-derivative
/// boundary constraint structural.
struct PhiStarMode {
    int m = 1;
    double cos_coeff = 0.0;
    double sin_coeff = 0.0;
};

/// Polynomial conformal map w(z) = sum_k coeffs[k] z^k from the domain onto
/// the unit disk, with nonvanishing derivative.
struct ConformalMap {
    std::vector<Complex> coeffs;

    Complex eval(const Complex& z) const;
    Complex deriv(const Complex& z) const;
    Complex deriv2(const Complex& z) const;
    bool is_identity() const;
};

/// Domain plus boundary-flux data determining the Neumann / Dirichlet-Green
/// kernels. Defaults describe the unit disk with phi_star == 0.
struct KernelContext {
    int winding = 1;
    std::vector<PhiStarMode> phi_star;
    std::optional<ConformalMap> conformal_map;
    KernelKind kind = KernelKind::neumann;

    // Test hook used by fault-injection validation; always 0 in real runs.
    double debug_bias = 0.0;

    bool has_phi_star() const;
    /// Maps a point into disk coordinates (identity when no map is present).
    Complex to_disk(const Complex& z) const;
    /// Membership in the closed domain, i.e. |w(z)| <= 1 + slack.
    bool contains(const Vec2& p, double slack = 1e-12) const;
    /// Checks injectivity/boundary-mapping of the conformal map by sampling;
    /// throws std::invalid_argument on violation.
    void validate() const;
};

/// n point vortices in the open unit disk with degrees in {+1, -1}.
struct VortexConfiguration {
    std::vector<Vec2> positions;
    std::vector<int> degrees;

    std::size_t size() const { return positions.size(); }
    int total_degree() const;
    /// Throws std::invalid_argument on duplicate / boundary / bad-degree data.
    void validate() const;
};

/// Neumann function N(x,y) with Delta N = 2 pi delta_y and boundary flux
/// d_nu N = d_tau theta + (1/winding) d_tau phi_star. On the disk with
/// phi_star == 0 this is exactly log|x-y| + log|1 - x conj(y)|.
double neumann_N(const KernelContext& ctx, const Vec2& x, const Vec2& y);

/// Harmonic part H(x,y) = N(x,y) - log|x-y|; finite on the diagonal.
double harmonic_part_H(const KernelContext& ctx, const Vec2& x, const Vec2& y);

/// Dirichlet Green function with G = 0 on the boundary and Delta G = 2 pi delta_y.
double dirichlet_green_G(const KernelContext& ctx, const Vec2& x, const Vec2& y);

/// Gradient in x of N(x, y), x != y.
Vec2 grad_x_neumann_N(const KernelContext& ctx, const Vec2& x, const Vec2& y);

/// Gradient in x of H(x, y); defined on the diagonal.
Vec2 grad_x_harmonic_H(const KernelContext& ctx, const Vec2& x, const Vec2& y);

/// Renormalized (Kirchhoff-Onsager) energy
///   W(a) = -pi sum_{j != k} d_j d_k N(a_j, a_k) - pi sum_j H(a_j, a_j).
/// The d_j d_k interaction weights extend the all-plus-one formula; self
/// terms stay unsigned.
double renormalized_W(const KernelContext& ctx, const VortexConfiguration& cfg);

/// Gradient of renormalized_W with respect to each vortex position.
std::vector<Vec2> grad_W(const KernelContext& ctx, const VortexConfiguration& cfg);

/// Minimum over pairwise distances and distances to the boundary of the unit disk.
double rho_a(const VortexConfiguration& cfg);

/// One quarter of the minimum of rho_a over trajectory samples.
double rho_star(const std::vector<VortexConfiguration>& trajectory);

/// Kernel value through the conformal map; reduces to neumann_N when the map
/// is the identity.
double conformal_kernel(const KernelContext& ctx, const Vec2& x, const Vec2& y);

} // namespace vf

#endif
