#ifndef VORTEXFLOW_DIAGNOSTICS_HPP
#define VORTEXFLOW_DIAGNOSTICS_HPP

#include <functional>
#include <vector>

#include "vortexflow/field.hpp"
#include "vortexflow/kernels.hpp"
#include "vortexflow/transport_metric.hpp"

namespace vf {

struct TrackedVortex {
    Vec2 position;   // |J|-weighted centroid of the core cluster
    int degree;      // phase winding around the cluster
    double radius;   // localization radius of the cluster
    bool ambiguous;  // |degree| > 1: reported, not split
};

struct TrackingResult {
    std::vector<TrackedVortex> vortices;
    int total_degree = 0; // winding of the outermost ring
};

/// Clusters the cells where |u| < 0.5 and extracts per-cluster positions,
/// degrees (by phase circulation around the cluster), and localization
/// radii. Throws std::invalid_argument if |u| <= 0.5 anywhere on the
/// outermost ring.
TrackingResult locate_vortices(const Field& f);

/// Excess energy D = E_eps(u) - W(cfg) - n (pi |log eps| + gamma). The
/// zero-vortex configuration has W = 0.
double excess_energy(const Field& f, const KernelContext& ctx,
                     const VortexConfiguration& cfg);

struct EtaReport {
    double eta = 0.0;              // sum of per-vortex vector norms
    std::vector<Vec2> per_vortex;  // integral of the localized moment per vortex
};

/// eta = sum_j | integral (e_eps / |log eps|) phi(x - a_j) dx | with
/// phi(x) = x chi(|x| / rho_star) and chi the C-infinity cutoff
/// chi(s) = B(2 - s) / (B(2 - s) + B(s - 1)), B(t) = exp(-1/t) for t > 0:
/// chi = 1 for s <= 1 and 0 for s >= 2.
EtaReport eta_functional(const Field& f, const std::vector<Vec2>& a, double rho_star);

/// Same moment applied to an atomic surrogate of e_eps / |log eps|.
EtaReport eta_atomic(const AtomicSignedMeasure& energy, const std::vector<Vec2>& a,
                     double rho_star);

/// The smooth cutoff used by eta and the kinetic comparison.
double eta_cutoff(double s);

struct Series {
    std::vector<double> t;
    std::vector<double> v;
};

/// Trapezoidal windowed average <h>_delta(t) = (1/delta) integral_{t-delta}^t h,
/// returned at every sample with t >= t.front() + delta. Throws
/// std::invalid_argument if delta <= 0 or no sample admits a full window.
Series time_average(const Series& h, double delta);

struct EquipartitionReport {
    double matrix[2][2] = {{0.0, 0.0}, {0.0, 0.0}}; // (1/2) int (d_i u, d_j u)
    double expected = 0.0;            // (pi/2) log(sigma/eps)
    double frobenius_deviation = 0.0; // |matrix - expected I|_F
    double ratio = 0.0;               // deviation / sqrt(log(sigma/eps))
};

/// Integrates the half Dirichlet stress (1/2)(d_i u, d_j u) over B_sigma(xi)
/// and reports the deviation from (pi/2) log(sigma/eps) times the identity.
EquipartitionReport equipartition_check(const Field& f, const Vec2& xi, double sigma);

/// Radial-oracle constant c0: the sigma-independent part of the diagonal
/// stress of a centered vortex, (pi/2) lim_R [int_0^R (f'^2 + f^2/s^2) s ds
/// - 2 log R] ... evaluated at R = sigma/eps (finite-R value).
double equipartition_oracle_diagonal(double sigma_over_eps);

struct HodgeResult {
    ScalarGrid f1; // curl-free potential, j ~ grad f1
    ScalarGrid f2; // divergence-free potential, j ~ perp-grad f2
    double norm_grad_f1 = 0.0;
    double norm_grad_f2 = 0.0;
    double residual = 0.0; // L2 norm of j - grad f1 - perp grad f2
};

/// Hodge decomposition j = grad f1 + perp-grad f2 on the cell-centered polar
/// grid: solved per theta mode as a banded least-squares problem in the same
/// first-order difference operators used for the reconstruction, so smooth
/// fields reconstruct to near roundoff. bc selects the boundary pair
/// (dirichlet: f1 pinned to 0 at the wall; neumann: f2 pinned).
HodgeResult hodge_decompose(const VectorGrid& j_diff, BcKind bc);

struct KineticReport {
    double ode_side = 0.0; // pi int |a dot|^2 (supplied)
    double pde_side = 0.0; // int int chi |d_t u|^2 / |log eps|
    double difference = 0.0;
};

/// PDE-side kinetic energy: |d_t u|^2 snapshots integrated against the
/// cutoff sum_j chi(|x - a_j(t)| / rho_star), trapezoid in time, divided by
/// |log eps|; compared with the supplied ODE-side value. Empty reference
/// lists make the cutoff (and the PDE side) zero.
KineticReport kinetic_comparison(const std::vector<ScalarGrid>& ut_sq,
                                 const std::vector<std::vector<Vec2>>& refs,
                                 const std::vector<double>& times, double eps,
                                 double rho_star, double ode_kinetic);

/// C^2 test function for the stress-tensor pairing, with its first and
/// second partials; the Hessian must vanish for |x| >= support_radius.
struct C2TestFunction {
    std::function<double(const Vec2&)> dx, dy;    // gradient
    std::function<double(const Vec2&)> dxx, dyy, dxy; // Hessian
    double support_radius = 0.9;
};

struct StressIdentityReport {
    double lhs = 0.0; // int [j x j - |j|^2/2 I] : Hess(phi), tau -> 0
    double rhs = 0.0; // -(1/pi) sum_j d_j grad phi(xi_j) . grad_{xi_j} W
    double residual = 0.0;
};

/// Checks the stress-tensor pairing of the renormalized energy: the left
/// side integrates the traceless stress of the canonical current
/// j(u_star) = sum_k d_k perp-grad Phi_k against Hess(phi) on a lattice with
/// balls of radius tau excluded around the vortices and Richardson
/// extrapolation tau -> 0; the right side uses grad_W.
StressIdentityReport stress_identity_check(const KernelContext& ctx,
                                           const VortexConfiguration& cfg,
                                           const C2TestFunction& phi,
                                           int n_grid = 768, double tau = 0.05);

} // namespace vf

#endif
