#ifndef VORTEXFLOW_POISSON_HPP
#define VORTEXFLOW_POISSON_HPP

#include <memory>
#include <vector>

#include "vortexflow/field.hpp"

namespace vf {

/// In-place FFT along the theta index of row-major (n_r x n_theta) complex
/// data. forward() is unnormalized; backward() divides by n_theta.
class ThetaTransform {
public:
    ThetaTransform(int n_r, int n_theta);
    ~ThetaTransform();
    ThetaTransform(const ThetaTransform&) = delete;
    ThetaTransform& operator=(const ThetaTransform&) = delete;

    void forward(Complex* data) const;
    void backward(Complex* data) const;

    int n_r() const { return n_r_; }
    int n_theta() const { return n_theta_; }
    /// Signed integer frequency of FFT bin k.
    int frequency(int k) const { return k <= n_theta_ / 2 ? k : k - n_theta_; }

private:
    int n_r_;
    int n_theta_;
    void* plan_fwd_;
    void* plan_bwd_;
};

/// Second-order conservative finite-difference Laplacian on the cell-centered
/// polar grid (r_i = (i+1/2) dr, dr = 1/n_r), spectral in theta. The r = 0
/// face carries zero flux, so no origin condition is needed. Boundary ghosts:
/// dirichlet u_ghost = 2 g - u_last, neumann u_ghost = u_last.
std::vector<Complex> apply_laplacian(const std::vector<Complex>& u, int n_r, int n_theta,
                                     BcKind bc, const std::vector<Complex>& g);

/// Solves (alpha - Delta) v = rhs with the discretization of apply_laplacian.
/// g holds the boundary trace samples for dirichlet (empty means 0) and is
/// ignored (homogeneous) for neumann. For alpha == 0 with neumann data the
/// rhs is projected onto mean zero and the zero-mean solution is returned.
class HelmholtzSolver {
public:
    HelmholtzSolver(int n_r, int n_theta, double alpha, BcKind bc);

    std::vector<Complex> solve(const std::vector<Complex>& rhs,
                               const std::vector<Complex>& g) const;

    double alpha() const { return alpha_; }

private:
    int n_r_;
    int n_theta_;
    double alpha_;
    BcKind bc_;
    std::shared_ptr<ThetaTransform> fft_;
    // Per-mode Thomas factorization of the tridiagonal (alpha - Delta_m).
    std::vector<double> diag_;  // n_theta * n_r, factored pivots
    std::vector<double> lower_; // subdiagonal / pivot
    std::vector<double> upper_; // raw superdiagonal
    std::vector<double> bscale_; // boundary-ghost rhs coefficient per mode
};

} // namespace vf

#endif
