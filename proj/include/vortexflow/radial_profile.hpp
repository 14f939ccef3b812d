#ifndef VORTEXFLOW_RADIAL_PROFILE_HPP
#define VORTEXFLOW_RADIAL_PROFILE_HPP

#include <vector>

namespace vf {

/// Radial modulus profile of the degree-one vortex in core units (eps = 1):
///   f'' + f'/r - f/r^2 + f (1 - f^2) = 0,  f(0) = 0,  f(inf) = 1,
/// tabulated on a uniform grid of [0, r_switch] and continued by the
/// far-field asymptote f = 1 - 1/(2 r^2) - 9/(8 r^4) beyond r_switch.
struct RadialProfile {
    double dr = 0.0;
    double r_switch = 0.0;
    std::vector<double> f;  // f(i * dr), i = 0 .. n
    std::vector<double> fp; // f'(i * dr)
    double slope_origin = 0.0;

    double value(double r) const;
    double slope(double r) const;
};

/// Shooting solve (adaptive bisection of the origin slope, RK4 march).
/// r_switch stays at 8 by default: past that point the exp(sqrt(2) r)
/// separatrix instability contaminates the shot faster than the asymptote
/// error decays, and gamma is first-order insensitive to the tail anyway.
RadialProfile solve_radial_profile(double r_switch = 8.0, double dr = 2e-4);

/// Independent oracle: damped-Newton relaxation of the two-point boundary
/// value problem on [0, R] with the asymptote as the right boundary value.
RadialProfile solve_radial_profile_relaxation(double r_switch = 12.0, double dr = 2e-3);

/// Energy of the degree-one core up to radius R (includes the analytic
/// asymptote region when R > profile.r_switch):
///   I(f, R) = pi * int_0^R (f'^2 + f^2/r^2 + (1 - f^2)^2 / 2) r dr.
double profile_energy(const RadialProfile& p, double R);

/// Core constant gamma = lim_R [I(f, R) - pi log R], evaluated with the
/// O(1/R^2) tail of the asymptote removed analytically.
double bbh_gamma(const RadialProfile& p, double R = 50.0);

/// Cached standard profile (shooting solve, computed once).
const RadialProfile& standard_profile();

} // namespace vf

#endif
