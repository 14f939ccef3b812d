#ifndef VORTEXFLOW_GEOMETRY_HPP
#define VORTEXFLOW_GEOMETRY_HPP

#include <cmath>
#include <complex>
#include <vector>

namespace vf {

using Complex = std::complex<double>;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}
    explicit Vec2(const Complex& z) : x(z.real()), y(z.imag()) {}

    Complex as_complex() const { return {x, y}; }

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::hypot(x, y); }
    // 90-degree counterclockwise rotation.
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

/// Gradient of log|f(z)| for analytic f, given f'(z)/f(z).
inline Vec2 grad_log_abs(const Complex& f_prime_over_f) {
    return {f_prime_over_f.real(), -f_prime_over_f.imag()};
}

// Deterministic pairwise tree sum; result is independent of how callers
// might partition work later.
inline double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(v.data(), v.size());
}

} // namespace vf

#endif
