#ifndef VORTEXFLOW_POINT_VORTEX_HPP
#define VORTEXFLOW_POINT_VORTEX_HPP

#include <vector>

#include "vortexflow/geometry.hpp"
#include "vortexflow/kernels.hpp"

namespace vf {

enum class StopReason { reached_t_end, rho_breach };

/// Sampled gradient-flow trajectory with its dissipation ledger. Samples sit
/// at the accepted integrator steps plus any requested probe times, in
/// increasing time order. kinetic holds the cumulative integral of |da/dt|^2
/// up to each sample (Simpson quadrature on the integrator's dense output).
/// Because da/dt = -(1/pi) grad W, the exact dissipation identity is
/// W[i] + pi * kinetic[i] = W[0]; ledger_residual reports its defect.
struct OdeTrajectory {
    std::vector<double> times;
    std::vector<VortexConfiguration> states;
    std::vector<double> W;
    std::vector<double> kinetic;
    StopReason stop_reason = StopReason::reached_t_end;
    double t_stop = 0.0;

    // Soft monitors (maxima over samples, for logging): |grad_j W| rho_a / n
    // and W / (n^3 + n^2 / rho_a^2).
    double grad_bound_ratio = 0.0;
    double w_scale_ratio = 0.0;

    double ledger_residual(std::size_t idx) const;
    double max_ledger_residual() const;
};

/// Gradient-flow velocities da_j/dt = -(1/pi) grad_{a_j} W.
std::vector<Vec2> pv_rhs(const KernelContext& ctx, const VortexConfiguration& cfg);

/// Adaptive Dormand-Prince 5(4) integration of the gradient flow with
/// per-step tolerance 1e-9, cubic-Hermite dense output at the probe times,
/// and a hard stop (bisected in time to 1e-9) at the first rho_a < rho_stop.
/// Step-size underflow near collision also stops with rho_breach.
OdeTrajectory integrate_gradient_flow(const KernelContext& ctx,
                                      const VortexConfiguration& cfg0, double t_end,
                                      double rho_stop,
                                      const std::vector<double>& probes = {});

/// Relabel sample times t -> n t (the hydrodynamic time change); everything
/// else is untouched.
OdeTrajectory rescale_to_meanfield_time(OdeTrajectory traj, double n);

} // namespace vf

#endif
