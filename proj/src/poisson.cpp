#include "vortexflow/poisson.hpp"

#include <stdexcept>

#include <fftw3.h>

namespace vf {

ThetaTransform::ThetaTransform(int n_r, int n_theta) : n_r_(n_r), n_theta_(n_theta) {
    if (n_r < 1 || n_theta < 2)
        throw std::invalid_argument("ThetaTransform: bad grid shape");
    std::vector<Complex> scratch(static_cast<std::size_t>(n_r) * n_theta);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    int n[] = {n_theta};
    plan_fwd_ = fftw_plan_many_dft(1, n, n_r, buf, nullptr, 1, n_theta, buf, nullptr, 1,
                                   n_theta, FFTW_FORWARD, FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_many_dft(1, n, n_r, buf, nullptr, 1, n_theta, buf, nullptr, 1,
                                   n_theta, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("ThetaTransform: fftw plan failed");
}

ThetaTransform::~ThetaTransform() {
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void ThetaTransform::forward(Complex* data) const {
    fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_), reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
}

void ThetaTransform::backward(Complex* data) const {
    fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_), reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
    double s = 1.0 / n_theta_;
    std::size_t total = static_cast<std::size_t>(n_r_) * n_theta_;
    for (std::size_t i = 0; i < total; ++i) data[i] *= s;
}

namespace {

// Radial stencil pieces for cell i, frequency m: the conservative flux form
//   (Delta v)_i = (f_i (v_{i-1}-v_i) + f_{i+1} (v_{i+1}-v_i)) / (r_i dr^2)
//                 - m^2 v_i / r_i^2
// with faces f_i = i dr, centers r_i = (i+1/2) dr.
struct RadialStencil {
    int n_r;
    double dr;
    double face(int i) const { return i * dr; }
    double center(int i) const { return (i + 0.5) * dr; }
    double inv_cell(int i) const { return 1.0 / (center(i) * dr * dr); }
};

} // namespace

std::vector<Complex> apply_laplacian(const std::vector<Complex>& u, int n_r, int n_theta,
                                     BcKind bc, const std::vector<Complex>& g) {
    if (u.size() != static_cast<std::size_t>(n_r) * n_theta)
        throw std::invalid_argument("apply_laplacian: size mismatch");
    if (!g.empty() && g.size() != static_cast<std::size_t>(n_theta))
        throw std::invalid_argument("apply_laplacian: boundary trace size mismatch");

    ThetaTransform fft(n_r, n_theta);
    std::vector<Complex> hat = u;
    fft.forward(hat.data());
    std::vector<Complex> ghat(n_theta, Complex(0.0, 0.0));
    if (bc == BcKind::dirichlet && !g.empty()) {
        ghat = g;
        ThetaTransform bfft(1, n_theta);
        bfft.forward(ghat.data());
    }

    RadialStencil st{n_r, 1.0 / n_r};
    std::vector<Complex> out(hat.size());
    for (int k = 0; k < n_theta; ++k) {
        double m = fft.frequency(k);
        double mu = m * m;
        for (int i = 0; i < n_r; ++i) {
            double ic = st.inv_cell(i);
            Complex v = hat[static_cast<std::size_t>(i) * n_theta + k];
            Complex acc = -mu / (st.center(i) * st.center(i)) * v;
            if (i > 0)
                acc += st.face(i) * ic *
                       (hat[static_cast<std::size_t>(i - 1) * n_theta + k] - v);
            if (i + 1 < n_r) {
                acc += st.face(i + 1) * ic *
                       (hat[static_cast<std::size_t>(i + 1) * n_theta + k] - v);
            } else {
                // outer face: ghost = 2g - v (dirichlet) or v (neumann)
                if (bc == BcKind::dirichlet)
                    acc += st.face(n_r) * ic * (2.0 * ghat[k] - 2.0 * v);
            }
            out[static_cast<std::size_t>(i) * n_theta + k] = acc;
        }
    }
    fft.backward(out.data());
    return out;
}

HelmholtzSolver::HelmholtzSolver(int n_r, int n_theta, double alpha, BcKind bc)
    : n_r_(n_r), n_theta_(n_theta), alpha_(alpha), bc_(bc),
      fft_(std::make_shared<ThetaTransform>(n_r, n_theta)),
      diag_(static_cast<std::size_t>(n_theta) * n_r),
      lower_(static_cast<std::size_t>(n_theta) * n_r),
      upper_(static_cast<std::size_t>(n_theta) * n_r),
      bscale_(n_theta) {
    if (alpha < 0.0) throw std::invalid_argument("HelmholtzSolver: alpha must be >= 0");
    RadialStencil st{n_r, 1.0 / n_r};
    for (int k = 0; k < n_theta; ++k) {
        double m = fft_->frequency(k);
        double mu = m * m;
        bool singular = alpha == 0.0 && bc == BcKind::neumann && m == 0.0;
        auto* D = &diag_[static_cast<std::size_t>(k) * n_r];
        auto* L = &lower_[static_cast<std::size_t>(k) * n_r];
        auto* U = &upper_[static_cast<std::size_t>(k) * n_r];
        for (int i = 0; i < n_r; ++i) {
            double ic = st.inv_cell(i);
            double d = alpha + mu / (st.center(i) * st.center(i)) +
                       (st.face(i) + st.face(i + 1)) * ic;
            L[i] = -st.face(i) * ic;
            U[i] = -st.face(i + 1) * ic;
            if (i + 1 == n_r) {
                if (bc == BcKind::dirichlet)
                    d = alpha + mu / (st.center(i) * st.center(i)) +
                        (st.face(i) + 2.0 * st.face(n_r)) * ic;
                else
                    d = alpha + mu / (st.center(i) * st.center(i)) + st.face(i) * ic;
                U[i] = 0.0;
            }
            D[i] = d;
        }
        // Pin the constant nullspace of the pure-Neumann mean mode; with the
        // rhs projected to mean zero the pinned row is consistent and forces
        // the i = 0 entry to 0 (the mean is removed again after the solve).
        if (singular) D[0] += 1.0;
        bscale_[k] = bc == BcKind::dirichlet ? 2.0 * st.face(n_r) * st.inv_cell(n_r - 1) : 0.0;
        // Thomas LU factorization in place.
        for (int i = 1; i < n_r; ++i) {
            double w = L[i] / D[i - 1];
            L[i] = w;
            D[i] -= w * U[i - 1];
        }
    }
}

std::vector<Complex> HelmholtzSolver::solve(const std::vector<Complex>& rhs,
                                            const std::vector<Complex>& g) const {
    if (rhs.size() != static_cast<std::size_t>(n_r_) * n_theta_)
        throw std::invalid_argument("HelmholtzSolver: rhs size mismatch");
    if (!g.empty() && g.size() != static_cast<std::size_t>(n_theta_))
        throw std::invalid_argument("HelmholtzSolver: boundary trace size mismatch");

    std::vector<Complex> hat = rhs;
    fft_->forward(hat.data());
    std::vector<Complex> ghat(n_theta_, Complex(0.0, 0.0));
    if (bc_ == BcKind::dirichlet && !g.empty()) {
        ghat = g;
        ThetaTransform bfft(1, n_theta_);
        bfft.forward(ghat.data());
    }

    RadialStencil st{n_r_, 1.0 / n_r_};
    bool neumann_mean = alpha_ == 0.0 && bc_ == BcKind::neumann;
    std::vector<Complex> x(hat.size());
    std::vector<Complex> y(n_r_);
    for (int k = 0; k < n_theta_; ++k) {
        const auto* D = &diag_[static_cast<std::size_t>(k) * n_r_];
        const auto* L = &lower_[static_cast<std::size_t>(k) * n_r_];
        const auto* U = &upper_[static_cast<std::size_t>(k) * n_r_];
        auto b = [&](int i) { return hat[static_cast<std::size_t>(i) * n_theta_ + k]; };
        if (neumann_mean && fft_->frequency(k) == 0) {
            // Project the mean mode's rhs onto the solvable (mean-zero) part.
            Complex num(0.0, 0.0);
            double den = 0.0;
            for (int i = 0; i < n_r_; ++i) {
                num += st.center(i) * b(i);
                den += st.center(i);
            }
            Complex shift = num / den;
            for (int i = 0; i < n_r_; ++i)
                hat[static_cast<std::size_t>(i) * n_theta_ + k] -= shift;
        }
        // Forward sweep.
        y[0] = b(0);
        for (int i = 1; i < n_r_; ++i) y[i] = b(i) - L[i] * y[i - 1];
        if (bc_ == BcKind::dirichlet) y[n_r_ - 1] += bscale_[k] * ghat[k];
        // Note the ghost-term rhs contribution lands on the last row before
        // back substitution; it is unaffected by the forward sweep because
        // it enters only that row.
        Complex xi = y[n_r_ - 1] / D[n_r_ - 1];
        x[static_cast<std::size_t>(n_r_ - 1) * n_theta_ + k] = xi;
        for (int i = n_r_ - 2; i >= 0; --i) {
            xi = (y[i] - U[i] * xi) / D[i];
            x[static_cast<std::size_t>(i) * n_theta_ + k] = xi;
        }
        if (neumann_mean && fft_->frequency(k) == 0) {
            Complex num(0.0, 0.0);
            double den = 0.0;
            for (int i = 0; i < n_r_; ++i) {
                num += st.center(i) * x[static_cast<std::size_t>(i) * n_theta_ + k];
                den += st.center(i);
            }
            Complex mean = num / den;
            for (int i = 0; i < n_r_; ++i)
                x[static_cast<std::size_t>(i) * n_theta_ + k] -= mean;
        }
    }
    fft_->backward(x.data());
    return x;
}

} // namespace vf
