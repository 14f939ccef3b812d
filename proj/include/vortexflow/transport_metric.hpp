#ifndef VORTEXFLOW_TRANSPORT_METRIC_HPP
#define VORTEXFLOW_TRANSPORT_METRIC_HPP

#include <vector>

#include "vortexflow/field.hpp"

namespace vf {

/// Finite sum of weighted Dirac masses on the closed unit disk. Weights are
/// signed and nonzero; atoms need not be distinct.
struct AtomicSignedMeasure {
    std::vector<Vec2> points;
    std::vector<double> weights;

    std::size_t size() const { return points.size(); }
    void add(const Vec2& p, double w);
    double total() const;
};

/// Minimal-connection norm of mu - nu: the dual-Lipschitz norm with
/// zero-boundary test functions,
///   sup { integral of phi d(mu - nu) : |grad phi| <= 1, phi = 0 on |x|=1 }.
/// For atomic measures this is an exact min-cost transport where any unit of
/// mass may instead be paid to its nearest boundary point at cost
/// 1 - |x| (boundary disposal), so mismatched total masses are legal.
/// Solved by successive shortest augmenting paths; exact up to roundoff.
double w_minus_one_one(const AtomicSignedMeasure& mu, const AtomicSignedMeasure& nu);

/// Atomizes a plaquette-grid density (mass = value * r dr dtheta per cell)
/// into point masses at cell centers, dropping cells with |mass| < cutoff.
AtomicSignedMeasure atomize(const ScalarGrid& g, double cutoff = 1e-14);

/// Exhaustive-search oracle for w_minus_one_one: branch-and-bound over all
/// forest-structured transport plans (every step saturates a source or a
/// sink). Exact; intended for measures with at most ~6 atoms each.
double w_minus_one_one_exhaustive(const AtomicSignedMeasure& mu,
                                  const AtomicSignedMeasure& nu);

/// Dual grid-LP oracle: maximizes the pairing over test functions defined on
/// an n x n Cartesian lattice of spacing 2/n covering the disk, with phi = 0
/// off the open disk and the Lipschitz constraint imposed on 8-neighbor
/// edges. By LP duality this equals a min-cost flow with graph distances, so
/// it is computed that way; it overestimates Euclidean lengths by at most
/// the 8-neighbor metric stretch plus one cell of snapping error per atom.
double w_minus_one_one_grid_dual(const AtomicSignedMeasure& mu,
                                 const AtomicSignedMeasure& nu, int n);

} // namespace vf

#endif
