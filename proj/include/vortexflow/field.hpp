#ifndef VORTEXFLOW_FIELD_HPP
#define VORTEXFLOW_FIELD_HPP

#include <string>
#include <vector>

#include "vortexflow/geometry.hpp"

namespace vf {

enum class BcKind { dirichlet, neumann };

std::string to_string(BcKind bc);
BcKind bc_kind_from_string(const std::string& s);

/// Real-valued samples on a polar grid over the unit disk. Rows are radial
/// (radius r0 + i*dr), columns angular (theta = k*dtheta, periodic).
struct ScalarGrid {
    int n_r = 0;
    int n_theta = 0;
    double r0 = 0.0;
    double dr = 0.0;
    double dtheta = 0.0;
    std::vector<double> v;

    ScalarGrid() = default;
    ScalarGrid(int nr, int nt, double r0_, double dr_);

    double& at(int i, int k) { return v[static_cast<std::size_t>(i) * n_theta + k]; }
    double at(int i, int k) const { return v[static_cast<std::size_t>(i) * n_theta + k]; }
    double radius(int i) const { return r0 + i * dr; }
    double theta(int k) const { return k * dtheta; }
    Vec2 point(int i, int k) const {
        double r = radius(i), t = theta(k);
        return {r * std::cos(t), r * std::sin(t)};
    }
    /// Quadrature with polar area weights r dr dtheta (pairwise tree sum).
    double integrate() const;
};

/// 2-vector samples, components in the Cartesian frame.
struct VectorGrid {
    int n_r = 0;
    int n_theta = 0;
    double r0 = 0.0;
    double dr = 0.0;
    double dtheta = 0.0;
    std::vector<Vec2> v;

    VectorGrid() = default;
    VectorGrid(int nr, int nt, double r0_, double dr_);

    Vec2& at(int i, int k) { return v[static_cast<std::size_t>(i) * n_theta + k]; }
    const Vec2& at(int i, int k) const { return v[static_cast<std::size_t>(i) * n_theta + k]; }
    double radius(int i) const { return r0 + i * dr; }
    double theta(int k) const { return k * dtheta; }
    Vec2 point(int i, int k) const {
        double r = radius(i), t = theta(k);
        return {r * std::cos(t), r * std::sin(t)};
    }
};

/// Discretized complex order parameter on a cell-centered polar grid over the
/// unit disk: r_i = (i + 1/2)/n_r, theta_k = 2 pi k / n_theta.
struct Field {
    int n_r = 0;
    int n_theta = 0;
    double epsilon = 0.0;
    BcKind bc = BcKind::neumann;
    std::vector<Complex> v;

    Field() = default;
    Field(int nr, int nt, double eps, BcKind bc_kind);

    Complex& at(int i, int k) { return v[static_cast<std::size_t>(i) * n_theta + k]; }
    Complex at(int i, int k) const { return v[static_cast<std::size_t>(i) * n_theta + k]; }

    double dr() const { return 1.0 / n_r; }
    double dtheta() const { return 2.0 * 3.14159265358979323846 / n_theta; }
    double radius(int i) const { return (i + 0.5) * dr(); }
    double theta(int k) const { return k * dtheta(); }
    Vec2 point(int i, int k) const {
        double r = radius(i), t = theta(k);
        return {r * std::cos(t), r * std::sin(t)};
    }
    double max_modulus() const;

    /// Throws std::invalid_argument if grid contract (n_theta even >= 8,
    /// n_r >= 4, value count) is violated.
    void validate() const;
};

/// Flat binary snapshot (little-endian doubles, row-major complex pairs)
/// plus a JSON sidecar at path + ".json".
void save_field(const Field& f, const std::string& path);
Field load_field(const std::string& path);

void save_scalar_csv(const ScalarGrid& g, const std::string& path);

} // namespace vf

#endif
