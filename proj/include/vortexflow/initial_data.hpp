#ifndef VORTEXFLOW_INITIAL_DATA_HPP
#define VORTEXFLOW_INITIAL_DATA_HPP

#include <functional>

#include "vortexflow/field.hpp"
#include "vortexflow/kernels.hpp"

namespace vf {

/// Target vorticity density, evaluated pointwise on the closed disk.
using Density = std::function<double(const Vec2&)>;

struct PlacementReport {
    VortexConfiguration cfg; // all degrees +1
    int n_requested = 0;
    int n_emitted = 0;       // sum of floored per-cell counts
    double cell_side = 0.0;  // h = n^{-1/4}
    double boundary_mass = 0.0; // density mass found in boundary-touching cells
};

/// Deterministic vortex placement approximating omega0 (>= 0, total mass
/// 2 pi, supported away from the boundary): square cells of side h = n^{-1/4}
/// anchored at (-1,-1); cells touching the boundary circle emit nothing;
/// each interior cell emits floor((n / 2 pi) * cell mass) unit vortices on
/// equal slices (vertical or horizontal by cell checkerboard parity) with
/// the vortex at each slice midpoint.
PlacementReport place_vortices(const Density& omega0, int n);

/// -(1/n^2) sum_{j != k} log|a_j - a_k| (ordered pairs); bounded sequences
/// of placements keep it O(1).
double energy_bound_check(const VortexConfiguration& cfg);

struct PreparedField {
    Field field;
    double excess_energy = 0.0; // D(a) = E_eps(u0) - n (pi |log eps| + gamma) - W(a)
    double w_value = 0.0;
};

/// Well-prepared initial field u0 = u_star * prod_j f0(|x - a_j| / eps) with
/// f0 the radial core profile; the Dirichlet trace equals the canonical
/// map's exactly. Requires resolved cores: eps >= 2 dr.
PreparedField build_field(const KernelContext& ctx, const VortexConfiguration& cfg,
                          double eps, BcKind bc, int n_r, int n_theta);

} // namespace vf

#endif
