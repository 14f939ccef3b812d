#ifndef VORTEXFLOW_FIELD_OPS_HPP
#define VORTEXFLOW_FIELD_OPS_HPP

#include "vortexflow/field.hpp"
#include "vortexflow/kernels.hpp"

namespace vf {

/// Centered finite differences on the cell-centered grid: the origin is
/// handled by the antipodal mirror, the outer ring one-sided.
Complex radial_derivative(const Field& f, int i, int k);
Complex angular_derivative(const Field& f, int i, int k); // d/dtheta

/// e = 1/2 |grad u|^2 + (1 - |u|^2)^2 / (4 eps^2), centered differences in
/// the polar metric (one-sided at the outer ring, origin handled by the
/// antipodal mirror of the cell-centered grid).
ScalarGrid energy_density(const Field& f);

/// Quadrature of energy_density with polar area weights r dr dtheta.
double total_energy(const Field& f);

/// Supercurrent j = (iu, grad u), (a,b) = (conj(a) b + a conj(b))/2,
/// returned in Cartesian components on the cell-centered grid.
VectorGrid supercurrent(const Field& f);

/// Jacobian J = det grad u = (1/2) curl j as a density on the plaquette grid
/// (rows at r = (i+1) dr, i = 0..n_r-2; columns at theta = (k+1/2) dtheta).
/// Plaquette values come from phase winding when all four corner moduli are
/// >= 0.2 and from a determinant of centered differences otherwise, so that
/// integrating the returned grid recovers the discrete Stokes pairing.
ScalarGrid jacobian(const Field& f);

/// Half the phase circulation of u along the closed grid path through the
/// cell centers (i0,k) .. (i1,k) for k in [k0, k1] (theta indices mod n_theta,
/// k1 may exceed n_theta to wrap). Equals the sum of the winding-branch
/// plaquette Jacobian integrals enclosed; used by the Stokes exactness check.
double phase_circulation_half(const Field& f, int i0, int i1, int k0, int k1);

/// Jacobian mass of the disk r < dr/2 that the plaquette lattice of
/// jacobian() does not cover: half the phase circulation around the
/// innermost cell ring. A vortex sitting at the origin carries its winding
/// here, so any Jacobian integral over a region containing the origin must
/// add this value as a point mass at 0.
double origin_cap_circulation(const Field& f);

/// Canonical harmonic map u* = prod_j ((x - a_j)/|x - a_j|)^{d_j} e^{i psi},
/// |u*| = 1. psi is the harmonic function meeting the requested boundary
/// behavior, synthesized spectrally from its boundary data:
///   - dirichlet: trace e^{i(winding theta + phi_star)}; requires
///     total degree == ctx.winding;
///   - neumann: vanishing normal current j(u*).nu = 0.
/// Throws std::invalid_argument for a vortex within 2 grid cells of the
/// boundary, a winding mismatch, or a non-identity conformal map.
Field canonical_harmonic_map(const KernelContext& ctx, const VortexConfiguration& cfg,
                             BcKind bc, int n_r, int n_theta);

} // namespace vf

#endif
