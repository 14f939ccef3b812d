#ifndef VORTEXFLOW_MEAN_FIELD_HPP
#define VORTEXFLOW_MEAN_FIELD_HPP

#include <functional>
#include <vector>

#include "vortexflow/kernels.hpp"

namespace vf {

/// Nonnegative atomic vorticity measure advected in rescaled time t_bar.
/// Particles that reach the wall are clamped onto it and frozen; they keep
/// their weight (mass conservation) and keep inducing velocity.
struct VorticityMeasure {
    std::vector<Vec2> positions;
    std::vector<double> weights;
    std::vector<char> frozen; // same length as positions, default 0
    double blob_radius = 0.05;

    std::size_t size() const { return positions.size(); }
    double total_mass() const;
    /// Throws std::invalid_argument on negative weights, non-interior
    /// unfrozen positions, or nonpositive blob radius.
    void validate() const;
};

/// Mean-field velocity sum_k w_k [K_delta(x - y_k) + grad_x H(x, y_k)] with
/// the blob kernel K_delta(z) = z / max(|z|^2, delta_b^2). The H part is
/// exact; a particle at x == y_k contributes only its image (self-H) term.
Vec2 mf_velocity(const KernelContext& ctx, const VorticityMeasure& m, const Vec2& x);

/// Atoms at the configuration's positions with weights 2 pi / n (total mass
/// 2 pi). Throws std::invalid_argument unless every degree is +1.
VorticityMeasure empirical_measure(const VortexConfiguration& cfg,
                                   double blob_radius = 0.05);

struct StepLog {
    int clamped = 0; // particles that hit the wall during this step
};

/// One RK4 step of size dt_bar in rescaled time, advecting particles with
/// mf_velocity / pi (for weights 2 pi / n this is exactly the n-body
/// gradient flow in time t_bar = n t). Weights are untouched; positions
/// leaving the closed disk are clamped to the wall and frozen, with the
/// event counted in the log.
VorticityMeasure step_particles(const KernelContext& ctx, const VorticityMeasure& m,
                                double dt_bar, StepLog* log = nullptr);

/// C^2 test function chi(x, t_bar) for the interior weak formulation,
/// supported in |x| <= support_radius.
struct TestFunction {
    std::function<double(const Vec2&, double)> dt;  // time derivative
    std::function<double(const Vec2&, double)> dxx; // second space partials
    std::function<double(const Vec2&, double)> dyy;
    std::function<double(const Vec2&, double)> dxy;
    double support_radius = 1.0;
};

struct WeakResidualReport {
    double transport_term = 0.0; // -integral of omega d_t chi
    double diagonal_term = 0.0;  // ((dxx - dyy)/2)(v1^2 - v2^2)
    double offdiag_term = 0.0;   // 2 dxy v1 v2
    double total = 0.0;
};

/// Quadrature of the three integrals of the interior weak formulation over
/// the time window covered by the trajectory snapshots: the transport term
/// by particle sums, the velocity-quadratic terms on an n_grid x n_grid
/// Cartesian lattice restricted to the support of chi, trapezoid in time.
/// The velocity entering the quadratic terms is the advection field divided
/// by sqrt(2); with that normalization the three-term sum vanishes exactly
/// for transported mass-2 pi solutions and chi vanishing at the window ends.
/// Throws std::invalid_argument if chi's support reaches within 2 blob radii
/// of the wall.
WeakResidualReport weak_residual(const KernelContext& ctx,
                                 const std::vector<VorticityMeasure>& traj,
                                 const std::vector<double>& times,
                                 const TestFunction& chi, int n_grid = 96);

/// Maximal vorticity M_r: the largest ball mass sup_c m(B_r(c)) with centers
/// searched on a lattice of spacing r/4 around the atoms. Requires
/// 0 < r <= 1/2.
double maximal_vorticity(const VorticityMeasure& m, double r);

} // namespace vf

#endif
