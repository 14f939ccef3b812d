#include "vortexflow/field.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace vf {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr std::uint32_t kFieldMagic = 0x564c4446; // "VFLD"
} // namespace

std::string to_string(BcKind bc) {
    return bc == BcKind::dirichlet ? "dirichlet" : "neumann";
}

BcKind bc_kind_from_string(const std::string& s) {
    if (s == "dirichlet") return BcKind::dirichlet;
    if (s == "neumann") return BcKind::neumann;
    throw std::invalid_argument("unknown bc kind: " + s);
}

ScalarGrid::ScalarGrid(int nr, int nt, double r0_, double dr_)
    : n_r(nr), n_theta(nt), r0(r0_), dr(dr_), dtheta(2.0 * kPi / nt),
      v(static_cast<std::size_t>(nr) * nt, 0.0) {}

double ScalarGrid::integrate() const {
    std::vector<double> contrib(v.size());
    for (int i = 0; i < n_r; ++i) {
        double w = radius(i) * dr * dtheta;
        for (int k = 0; k < n_theta; ++k)
            contrib[static_cast<std::size_t>(i) * n_theta + k] = w * at(i, k);
    }
    return pairwise_sum(contrib);
}

VectorGrid::VectorGrid(int nr, int nt, double r0_, double dr_)
    : n_r(nr), n_theta(nt), r0(r0_), dr(dr_), dtheta(2.0 * kPi / nt),
      v(static_cast<std::size_t>(nr) * nt) {}

Field::Field(int nr, int nt, double eps, BcKind bc_kind)
    : n_r(nr), n_theta(nt), epsilon(eps), bc(bc_kind),
      v(static_cast<std::size_t>(nr) * nt, Complex(1.0, 0.0)) {
    validate();
}

double Field::max_modulus() const {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
}

void Field::validate() const {
    if (n_r < 4) throw std::invalid_argument("Field: n_r must be >= 4");
    if (n_theta < 8 || n_theta % 2 != 0)
        throw std::invalid_argument("Field: n_theta must be even and >= 8");
    if (epsilon <= 0.0) throw std::invalid_argument("Field: epsilon must be > 0");
    if (v.size() != static_cast<std::size_t>(n_r) * n_theta)
        throw std::invalid_argument("Field: value count mismatch");
}

void save_field(const Field& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_field: cannot open " + path);
    std::uint32_t magic = kFieldMagic;
    std::int32_t nr = f.n_r, nt = f.n_theta;
    std::int32_t bc = f.bc == BcKind::dirichlet ? 0 : 1;
    double eps = f.epsilon;
    out.write(reinterpret_cast<const char*>(&magic), 4);
    out.write(reinterpret_cast<const char*>(&nr), 4);
    out.write(reinterpret_cast<const char*>(&nt), 4);
    out.write(reinterpret_cast<const char*>(&bc), 4);
    out.write(reinterpret_cast<const char*>(&eps), 8);
    out.write(reinterpret_cast<const char*>(f.v.data()),
              static_cast<std::streamsize>(f.v.size() * sizeof(Complex)));
    if (!out) throw std::runtime_error("save_field: write failed for " + path);

    nlohmann::json sidecar = {
        {"format", "vortexflow-field-v1"},
        {"n_r", f.n_r},
        {"n_theta", f.n_theta},
        {"epsilon", f.epsilon},
        {"bc_kind", to_string(f.bc)},
        {"layout", "row-major complex<double> pairs, little-endian"},
    };
    std::ofstream side(path + ".json");
    side << sidecar.dump(2) << "\n";
}

Field load_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_field: cannot open " + path);
    std::uint32_t magic = 0;
    std::int32_t nr = 0, nt = 0, bc = 0;
    double eps = 0.0;
    in.read(reinterpret_cast<char*>(&magic), 4);
    in.read(reinterpret_cast<char*>(&nr), 4);
    in.read(reinterpret_cast<char*>(&nt), 4);
    in.read(reinterpret_cast<char*>(&bc), 4);
    in.read(reinterpret_cast<char*>(&eps), 8);
    if (!in || magic != kFieldMagic)
        throw std::runtime_error("load_field: bad header in " + path);
    Field f(nr, nt, eps, bc == 0 ? BcKind::dirichlet : BcKind::neumann);
    in.read(reinterpret_cast<char*>(f.v.data()),
            static_cast<std::streamsize>(f.v.size() * sizeof(Complex)));
    if (!in) throw std::runtime_error("load_field: truncated body in " + path);
    return f;
}

void save_scalar_csv(const ScalarGrid& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_scalar_csv: cannot open " + path);
    out << "r,theta,x,y,value\n";
    char buf[160];
    for (int i = 0; i < g.n_r; ++i)
        for (int k = 0; k < g.n_theta; ++k) {
            Vec2 p = g.point(i, k);
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                          g.radius(i), g.theta(k), p.x, p.y, g.at(i, k));
            out << buf;
        }
}

} // namespace vf
