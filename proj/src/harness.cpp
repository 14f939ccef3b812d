#include "vortexflow/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "vortexflow/diagnostics.hpp"
#include "vortexflow/field_ops.hpp"
#include "vortexflow/initial_data.hpp"
#include "vortexflow/kernels.hpp"
#include "vortexflow/mean_field.hpp"
#include "vortexflow/point_vortex.hpp"
#include "vortexflow/poisson.hpp"
#include "vortexflow/radial_profile.hpp"
#include "vortexflow/tdgl.hpp"
#include "vortexflow/transport_metric.hpp"

namespace vf {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Deterministic shortest-roundtrip rendering shared by defaults and tables.
std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (trim(v.substr(pos)).empty()) return x;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config key '" + key + "': cannot parse number '" + v + "'");
}

} // namespace

Config Config::parse(const std::string& text) {
    Config c;
    for (const std::string& raw_line : split(text, '\n')) {
        std::string line = raw_line;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line without '=': " + line);
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw std::invalid_argument("config line with empty key: " + line);
        c.set(key, trim(line.substr(eq + 1)));
    }
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void Config::set(const std::string& key, const std::string& value) {
    raw_[key] = value;
    effective_[key] = value;
}

bool Config::has(const std::string& key) const { return raw_.count(key) != 0; }

std::string Config::get_string(const std::string& key, const std::string& def) const {
    auto it = raw_.find(key);
    std::string v = it != raw_.end() ? it->second : def;
    effective_[key] = v;
    return v;
}

double Config::get_double(const std::string& key, double def) const {
    auto it = raw_.find(key);
    if (it == raw_.end()) {
        effective_[key] = fmt(def);
        return def;
    }
    effective_[key] = it->second;
    return parse_double(key, it->second);
}

int Config::get_int(const std::string& key, int def) const {
    double x = get_double(key, def);
    int i = static_cast<int>(std::llround(x));
    if (std::abs(x - i) > 1e-12)
        throw std::invalid_argument("config key '" + key + "' must be an integer");
    return i;
}

bool Config::get_bool(const std::string& key, bool def) const {
    auto it = raw_.find(key);
    std::string v = it != raw_.end() ? it->second : std::string(def ? "true" : "false");
    effective_[key] = v;
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("config key '" + key + "' must be true/false");
}

std::vector<double> Config::get_list(const std::string& key,
                                     const std::vector<double>& def) const {
    auto it = raw_.find(key);
    if (it == raw_.end()) {
        std::string r;
        for (std::size_t i = 0; i < def.size(); ++i) r += (i ? "," : "") + fmt(def[i]);
        effective_[key] = r;
        return def;
    }
    effective_[key] = it->second;
    std::vector<double> out;
    for (const std::string& part : split(it->second, ','))
        if (!trim(part).empty()) out.push_back(parse_double(key, trim(part)));
    return out;
}

std::vector<Vec2> Config::get_points(const std::string& key,
                                     const std::vector<Vec2>& def) const {
    auto it = raw_.find(key);
    if (it == raw_.end()) {
        std::string r;
        for (std::size_t i = 0; i < def.size(); ++i)
            r += (i ? ";" : "") + fmt(def[i].x) + "," + fmt(def[i].y);
        effective_[key] = r;
        return def;
    }
    effective_[key] = it->second;
    std::vector<Vec2> out;
    for (const std::string& part : split(it->second, ';')) {
        if (trim(part).empty()) continue;
        std::vector<std::string> xy = split(part, ',');
        if (xy.size() != 2)
            throw std::invalid_argument("config key '" + key + "': expected 'x,y' pairs");
        out.push_back({parse_double(key, trim(xy[0])), parse_double(key, trim(xy[1]))});
    }
    return out;
}

std::string Config::echo() const {
    // effective_ holds every exercised key (defaults included) plus every
    // explicit key from set()/parse(); a std::map keeps it sorted.
    std::string out;
    for (const auto& [k, v] : effective_) out += k + "=" + v + "\n";
    return out;
}

std::uint64_t Config::fnv_hash() const {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : echo()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string Config::provenance() const {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "cfg-%016llx",
                  static_cast<unsigned long long>(fnv_hash()));
    return buf;
}

std::string Table::to_csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
    out += "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
        out += "\n";
    }
    return out;
}

void Table::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << to_csv();
}

namespace {

// Sample of the ODE trajectory nearest to t (probe times are exact samples).
const VortexConfiguration& state_at(const OdeTrajectory& traj, double t) {
    std::size_t best = 0;
    double d = std::abs(traj.times[0] - t);
    for (std::size_t i = 1; i < traj.times.size(); ++i)
        if (std::abs(traj.times[i] - t) < d) {
            d = std::abs(traj.times[i] - t);
            best = i;
        }
    return traj.states[best];
}

AtomicSignedMeasure vortex_atoms(const std::vector<Vec2>& pos, const std::vector<int>& deg,
                                 double unit) {
    AtomicSignedMeasure m;
    for (std::size_t j = 0; j < pos.size(); ++j) m.add(pos[j], unit * deg[j]);
    return m;
}

BcKind parse_bc(const std::string& s) {
    if (s == "neumann") return BcKind::neumann;
    if (s == "dirichlet") return BcKind::dirichlet;
    throw std::invalid_argument("bc must be 'neumann' or 'dirichlet', got '" + s + "'");
}

} // namespace

PdeOdeResult run_pde_vs_ode(const Config& cfg) {
    std::vector<double> eps_list = cfg.get_list("eps_list", {0.08, 0.04, 0.02});
    int n_r = cfg.get_int("grid_nr", 256);
    int n_t = cfg.get_int("grid_nt", 512);
    BcKind bc = parse_bc(cfg.get_string("bc", "neumann"));
    std::vector<Vec2> positions = cfg.get_points("positions", {{0.3, 0.0}, {-0.3, 0.0}});
    std::vector<double> deg_list =
        cfg.get_list("degrees", std::vector<double>(positions.size(), 1.0));
    double t_end = cfg.get_double("t_end", 0.04);
    int n_probes = cfg.get_int("probes", 8);
    double dt_base = cfg.get_double("dt", 1e-4);
    double rho_stop = cfg.get_double("rho_stop", 0.1);
    std::string prov = cfg.provenance();

    VortexConfiguration vc;
    vc.positions = positions;
    for (double d : deg_list) vc.degrees.push_back(static_cast<int>(std::llround(d)));
    vc.validate();

    KernelContext ctx;
    ctx.winding = bc == BcKind::dirichlet ? vc.total_degree() : 0;

    std::vector<double> probes;
    for (int i = 1; i <= n_probes; ++i) probes.push_back(t_end * i / n_probes);

    OdeTrajectory traj = integrate_gradient_flow(ctx, vc, t_end, rho_stop, probes);
    double covered = traj.t_stop;
    double rho_sc = rho_star(traj.states);
    std::string base_flag =
        traj.stop_reason == StopReason::rho_breach ? std::string("rho_breach") : std::string();

    PdeOdeResult out;
    out.table.columns = {"eps",        "t_end",         "sup_distance", "max_eta",
                         "rho_star",   "excess_initial", "excess_final", "pde_ledger",
                         "ode_ledger", "flag",           "provenance"};

    for (double eps : eps_list) {
        PdeOdeRow row;
        row.eps = eps;
        row.flag = base_flag;
        row.rho_star = rho_sc;
        row.ode_ledger_residual = traj.max_ledger_residual();

        SolverConfig sc;
        sc.epsilon = eps;
        // Explicit Adams-Bashforth reaction term: the linearized decay rate
        // around |u| = 1 is 2 |log eps| / eps^2, so stability needs
        // dt < ~0.5 eps^2 / |log eps|; 0.1 leaves a 5x margin.
        sc.dt = std::min(dt_base, 0.1 * eps * eps / std::abs(std::log(eps)));
        sc.t_end = covered;
        sc.bc = bc;
        sc.winding = ctx.winding;

        PreparedField pf = build_field(ctx, vc, eps, bc, n_r, n_t);
        row.excess_initial = pf.excess_energy;

        TdglSolver solver(pf.field, sc);
        std::size_t next_probe = 0;
        try {
            while (solver.time() < covered - 0.5 * sc.dt) {
                solver.step();
                while (next_probe < probes.size() && probes[next_probe] <= covered + 1e-12 &&
                       solver.time() >= probes[next_probe] - 0.5 * sc.dt) {
                    double tp = probes[next_probe];
                    const VortexConfiguration& a = state_at(traj, tp);
                    // eta localizes the energy around the PDE's own vortices
                    // (the well-preparedness monitor); the distance column
                    // carries the xi-vs-a discrepancy itself.
                    std::vector<Vec2> eta_centers = a.positions;
                    try {
                        TrackingResult tr = locate_vortices(solver.field());
                        std::vector<Vec2> xi;
                        std::vector<int> xd;
                        for (const TrackedVortex& v : tr.vortices) {
                            xi.push_back(v.position);
                            xd.push_back(v.degree);
                        }
                        double d = w_minus_one_one(vortex_atoms(xi, xd, kPi),
                                                   vortex_atoms(a.positions, a.degrees, kPi));
                        row.sup_distance = std::max(row.sup_distance, d);
                        if (xi.size() == a.positions.size()) eta_centers = xi;
                    } catch (const std::exception&) {
                        if (row.flag.empty()) row.flag = "tracking_failure";
                    }
                    row.max_eta = std::max(
                        row.max_eta, eta_functional(solver.field(), eta_centers, rho_sc).eta);
                    row.t_end = tp;
                    if (next_probe + 1 == probes.size() || probes[next_probe + 1] > covered + 1e-12)
                        row.excess_final = excess_energy(solver.field(), ctx, a);
                    ++next_probe;
                }
            }
        } catch (const TdglBlowup& b) {
            row.flag = "blowup";
            row.t_end = b.t_blowup;
        }
        row.pde_ledger_residual = solver.ledger().max_residual();

        out.table.rows.push_back({fmt(row.eps), fmt(row.t_end), fmt(row.sup_distance),
                                  fmt(row.max_eta), fmt(row.rho_star), fmt(row.excess_initial),
                                  fmt(row.excess_final), fmt(row.pde_ledger_residual),
                                  fmt(row.ode_ledger_residual), row.flag, prov});
        if (!row.flag.empty()) out.table.flagged = true;
        out.rows.push_back(std::move(row));
    }
    return out;
}

Table experiment_pde_vs_ode(const Config& cfg) { return run_pde_vs_ode(cfg).table; }

namespace {

// chi(x, t_bar) = bump(|x|^2 / s^2) * sin^2(pi t_bar / T): compactly
// supported in space, vanishing at both window ends so a transported
// mass-conserving solution makes the weak form vanish exactly.
TestFunction standard_chi(double support, double T) {
    double s2 = support * support;
    auto bump = [s2](double r2) {
        return r2 >= s2 ? 0.0 : std::exp(-s2 / (s2 - r2)) * std::exp(1.0);
    };
    auto d_bump = [s2, bump](double r2) { // d/d(r^2)
        if (r2 >= s2) return 0.0;
        double d = s2 - r2;
        return -bump(r2) * s2 / (d * d);
    };
    auto dd_bump = [s2, bump](double r2) {
        if (r2 >= s2) return 0.0;
        double d = s2 - r2;
        return bump(r2) * (s2 * s2 / (d * d * d * d) - 2.0 * s2 / (d * d * d));
    };
    auto s_t = [T](double t) {
        double v = std::sin(kPi * t / T);
        return v * v;
    };
    auto ds_t = [T](double t) {
        return 2.0 * std::sin(kPi * t / T) * std::cos(kPi * t / T) * kPi / T;
    };
    TestFunction chi;
    chi.support_radius = support;
    chi.dt = [bump, ds_t](const Vec2& p, double t) { return bump(p.norm2()) * ds_t(t); };
    chi.dxx = [d_bump, dd_bump, s_t](const Vec2& p, double t) {
        double r2 = p.norm2();
        return (2.0 * d_bump(r2) + 4.0 * p.x * p.x * dd_bump(r2)) * s_t(t);
    };
    chi.dyy = [d_bump, dd_bump, s_t](const Vec2& p, double t) {
        double r2 = p.norm2();
        return (2.0 * d_bump(r2) + 4.0 * p.y * p.y * dd_bump(r2)) * s_t(t);
    };
    chi.dxy = [dd_bump, s_t](const Vec2& p, double t) {
        return 4.0 * p.x * p.y * dd_bump(p.norm2()) * s_t(t);
    };
    return chi;
}

AtomicSignedMeasure measure_atoms(const VorticityMeasure& m) {
    AtomicSignedMeasure out;
    for (std::size_t i = 0; i < m.size(); ++i) out.add(m.positions[i], m.weights[i]);
    return out;
}

// Aggregates a nonnegative atomic measure onto a square lattice of side h,
// one atom per occupied cell at the mass-weighted centroid. The W^{-1,1}
// perturbation is at most h/sqrt(2) per unit of mass; it makes the exact
// transport solve against a many-thousand-atom reference tractable (the
// augmenting-path count scales with the atom count).
AtomicSignedMeasure aggregate_to_lattice(const AtomicSignedMeasure& m, double h) {
    if (h <= 0.0) return m;
    std::map<std::pair<long, long>, std::pair<Vec2, double>> cells;
    for (std::size_t i = 0; i < m.size(); ++i) {
        std::pair<long, long> key{static_cast<long>(std::floor(m.points[i].x / h)),
                                  static_cast<long>(std::floor(m.points[i].y / h))};
        auto& [sum, w] = cells[key];
        sum += m.points[i] * m.weights[i];
        w += m.weights[i];
    }
    AtomicSignedMeasure out;
    for (const auto& [key, cw] : cells)
        if (cw.second > 0.0) out.add(cw.first / cw.second, cw.second);
    return out;
}

} // namespace

MeanFieldResult run_ode_vs_meanfield(const Config& cfg) {
    std::vector<double> n_list = cfg.get_list("n_list", {16, 64, 256});
    int n_ref = cfg.get_int("n_ref", 4096);
    double r0 = cfg.get_double("patch_radius", 0.48);
    double t_bar_end = cfg.get_double("t_bar_end", 0.2);
    double mr_t_bar = cfg.get_double("mr_t_bar", t_bar_end);
    double dt_bar_ref = cfg.get_double("dt_bar_ref", 5e-3);
    double ref_bin = cfg.get_double("ref_bin", 1.0 / 32.0);
    int n_dist_probes = cfg.get_int("dist_probes", 2);
    int n_weak_probes = cfg.get_int("weak_probes", 128);
    int n_mr_probes = cfg.get_int("mr_probes", 8);
    double rho_stop = cfg.get_double("rho_stop", 1e-4);
    double blob = cfg.get_double("blob_radius", 0.05);
    double chi_support = cfg.get_double("chi_support", 0.6);
    int weak_grid = cfg.get_int("weak_grid", 96);
    double weak_blob_coef = cfg.get_double("weak_blob_coef", 0.5);
    std::vector<double> radii =
        cfg.get_list("mr_radii", {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128});
    std::string prov = cfg.provenance();

    Density omega0 = [r0](const Vec2& p) { return p.norm() <= r0 ? 2.0 / (r0 * r0) : 0.0; };
    KernelContext ctx;
    ctx.winding = 0;

    std::vector<double> dist_probes;
    for (int i = 1; i <= n_dist_probes; ++i) dist_probes.push_back(t_bar_end * i / n_dist_probes);
    std::vector<double> weak_probes;
    for (int i = 0; i <= n_weak_probes; ++i) weak_probes.push_back(t_bar_end * i / n_weak_probes);
    std::vector<double> mr_probes;
    for (int i = 0; i <= n_mr_probes; ++i) mr_probes.push_back(mr_t_bar * i / n_mr_probes);

    // Reference mean-field particle run, snapshotted at the distance probes.
    PlacementReport ref_pl = place_vortices(omega0, n_ref);
    VorticityMeasure ref = empirical_measure(ref_pl.cfg, blob);
    std::vector<AtomicSignedMeasure> ref_snaps;
    {
        int steps = static_cast<int>(std::ceil(t_bar_end / dt_bar_ref - 1e-12));
        double h = t_bar_end / steps;
        std::size_t next = 0;
        for (int s = 0; s < steps; ++s) {
            ref = step_particles(ctx, ref, h);
            double t = (s + 1) * h;
            while (next < dist_probes.size() && t >= dist_probes[next] - 0.5 * h) {
                ref_snaps.push_back(aggregate_to_lattice(measure_atoms(ref), ref_bin));
                ++next;
            }
        }
        while (ref_snaps.size() < dist_probes.size())
            ref_snaps.push_back(aggregate_to_lattice(measure_atoms(ref), ref_bin));
    }

    TestFunction chi = standard_chi(chi_support, t_bar_end);

    MeanFieldResult out;
    out.radii = radii;
    out.table.columns = {"n_requested", "n", "t_bar_end", "dist_final", "dist_sup",
                         "weak_residual"};
    for (double r : radii) out.table.columns.push_back("m_r_" + fmt(r));
    out.table.columns.insert(out.table.columns.end(),
                             {"fit_a", "fit_b", "fit_r2", "flag", "provenance"});

    for (double n_req : n_list) {
        MeanFieldRow row;
        row.n_requested = static_cast<int>(std::llround(n_req));
        PlacementReport pl = place_vortices(omega0, row.n_requested);
        row.n = static_cast<int>(pl.cfg.size());
        double n_eff = static_cast<double>(row.n);

        std::set<double> probe_set(weak_probes.begin(), weak_probes.end());
        probe_set.insert(dist_probes.begin(), dist_probes.end());
        probe_set.insert(mr_probes.begin(), mr_probes.end());
        std::vector<double> ode_probes;
        for (double tb : probe_set)
            if (tb > 0.0) ode_probes.push_back(tb / n_eff);

        double t_bar_run = std::max(t_bar_end, mr_t_bar);
        OdeTrajectory traj =
            integrate_gradient_flow(ctx, pl.cfg, t_bar_run / n_eff, rho_stop, ode_probes);
        traj = rescale_to_meanfield_time(traj, n_eff);
        double covered = traj.t_stop; // rescaled
        row.t_bar_end = covered;
        if (traj.stop_reason == StopReason::rho_breach) row.flag = "rho_breach";

        for (std::size_t p = 0; p < dist_probes.size(); ++p) {
            if (dist_probes[p] > covered + 1e-9) break;
            const VortexConfiguration& st = state_at(traj, dist_probes[p]);
            double d = w_minus_one_one(measure_atoms(empirical_measure(st, blob)),
                                       ref_snaps[p]);
            row.sup_distance = std::max(row.sup_distance, d);
            row.final_distance = d;
        }

        // The blob radius of the weak-form velocity shrinks with n at the
        // interparticle-spacing rate: a fixed blob leaves an O(blob^2)
        // regularization error that would floor the residual in n.
        double weak_blob = weak_blob_coef * r0 / std::sqrt(n_eff);
        std::vector<VorticityMeasure> mtraj;
        std::vector<double> mtimes;
        for (double tb : weak_probes) {
            if (tb > covered + 1e-9) break;
            mtraj.push_back(empirical_measure(state_at(traj, tb), weak_blob));
            mtimes.push_back(tb);
        }
        if (mtimes.size() >= 3) {
            WeakResidualReport wr = weak_residual(ctx, mtraj, mtimes, chi, weak_grid);
            double scale = std::abs(wr.transport_term) + std::abs(wr.diagonal_term) +
                           std::abs(wr.offdiag_term);
            row.weak_residual_ratio = scale > 0.0 ? std::abs(wr.total) / scale : 0.0;
        }

        // M_r takes the supremum of the ball masses over the probe times in
        // [0, mr_t_bar] (clamped to the covered window), matching the
        // time-uniform non-concentration bound it is meant to exhibit.
        row.m_r.assign(radii.size(), 0.0);
        for (double tb : mr_probes) {
            if (tb > covered + 1e-9) break;
            VorticityMeasure mr_m = empirical_measure(state_at(traj, tb), blob);
            for (std::size_t i = 0; i < radii.size(); ++i)
                row.m_r[i] = std::max(row.m_r[i], maximal_vorticity(mr_m, radii[i]));
        }

        if (!row.flag.empty()) out.table.flagged = true;
        out.rows.push_back(std::move(row));
    }

    // Least squares M_r ~ A / sqrt(|log r|) + B / sqrt(n) on the largest-n
    // row, the regime the decay law addresses: the smaller rows are dominated
    // by the per-atom mass floor 2 pi / n that the model cannot bend around.
    if (!out.rows.empty()) {
        const MeanFieldRow* largest = &out.rows.front();
        for (const MeanFieldRow& r : out.rows)
            if (r.n > largest->n) largest = &r;
        const MeanFieldRow& row = *largest;
        double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0, sum = 0, sum2 = 0;
        int count = 0;
        double v = 1.0 / std::sqrt(static_cast<double>(row.n));
        for (std::size_t i = 0; i < radii.size(); ++i) {
            double u = 1.0 / std::sqrt(std::abs(std::log(radii[i])));
            double y = row.m_r[i];
            s11 += u * u;
            s12 += u * v;
            s22 += v * v;
            b1 += u * y;
            b2 += v * y;
            sum += y;
            sum2 += y * y;
            ++count;
        }
        double det = s11 * s22 - s12 * s12;
        if (count >= 3 && std::abs(det) > 1e-14 * s11 * s22) {
            out.fit_a = (b1 * s22 - b2 * s12) / det;
            out.fit_b = (s11 * b2 - s12 * b1) / det;
            double ss_res = 0.0;
            for (std::size_t i = 0; i < radii.size(); ++i) {
                double u = 1.0 / std::sqrt(std::abs(std::log(radii[i])));
                double e = row.m_r[i] - out.fit_a * u - out.fit_b * v;
                ss_res += e * e;
            }
            double mean = sum / count;
            double ss_tot = sum2 - count * mean * mean;
            out.fit_r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
        }
    }

    for (const MeanFieldRow& row : out.rows) {
        std::vector<std::string> cells = {std::to_string(row.n_requested), std::to_string(row.n),
                                          fmt(row.t_bar_end), fmt(row.final_distance),
                                          fmt(row.sup_distance), fmt(row.weak_residual_ratio)};
        for (double m : row.m_r) cells.push_back(fmt(m));
        cells.insert(cells.end(), {fmt(out.fit_a), fmt(out.fit_b), fmt(out.fit_r_squared),
                                   row.flag, prov});
        out.table.rows.push_back(std::move(cells));
    }
    return out;
}

Table experiment_ode_vs_meanfield(const Config& cfg) { return run_ode_vs_meanfield(cfg).table; }

bool ValidationReport::all_pass() const {
    for (const CheckResult& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string ValidationReport::to_json() const {
    nlohmann::json j;
    j["all_pass"] = all_pass();
    j["provenance"] = provenance;
    j["checks"] = nlohmann::json::array();
    for (const CheckResult& c : checks) {
        nlohmann::json item;
        item["name"] = c.name;
        item["pass"] = c.pass;
        item["measured"] = c.measured;
        item["tolerance"] = c.tolerance;
        item["detail"] = c.detail;
        j["checks"].push_back(item);
    }
    return j.dump(2);
}

namespace {

Vec2 random_interior(std::mt19937& rng, double rmax) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double r = rmax * std::sqrt(u(rng));
    double th = 2.0 * kPi * u(rng);
    return {r * std::cos(th), r * std::sin(th)};
}

VortexConfiguration random_config(std::mt19937& rng, int n, double rho_min, bool signed_degrees) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        VortexConfiguration c;
        for (int j = 0; j < n; ++j) {
            c.positions.push_back(random_interior(rng, 1.0 - rho_min));
            c.degrees.push_back(signed_degrees && u(rng) < 0.5 ? -1 : 1);
        }
        if (rho_a(c) >= rho_min) return c;
    }
    throw std::runtime_error("random_config: rejection sampling failed");
}

AtomicSignedMeasure random_measure(std::mt19937& rng, int max_atoms, bool signed_weights) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int n = 1 + static_cast<int>(u(rng) * max_atoms);
    AtomicSignedMeasure m;
    for (int i = 0; i < n; ++i) {
        double w = 0.1 + u(rng);
        if (signed_weights && u(rng) < 0.5) w = -w;
        m.add(random_interior(rng, 0.98), w);
    }
    return m;
}

// Bias-free closed-form assembly of W on the unit disk (identity map, no
// phi_star), used to anchor the kernel-based value: a constant additive
// kernel bias is invisible to position derivatives, so the gradient check
// alone cannot catch it.
double direct_W(const VortexConfiguration& c) {
    double w = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        Complex zj = c.positions[j].as_complex();
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (j == k) continue;
            Complex zk = c.positions[k].as_complex();
            double n = std::log(std::abs(zj - zk)) + std::log(std::abs(1.0 - zj * std::conj(zk)));
            w -= kPi * c.degrees[j] * c.degrees[k] * n;
        }
        w -= kPi * std::log(1.0 - std::norm(zj));
    }
    return w;
}

} // namespace

ValidationReport validate_all(const Config& cfg) {
    int grid = cfg.get_int("grid", 128);
    double bias = cfg.get_double("kernel_bias", 0.0);
    unsigned seed = static_cast<unsigned>(cfg.get_int("seed", 20240817));
    if (grid < 16) throw std::invalid_argument("validate_all: grid must be >= 16");

    ValidationReport rep;
    rep.provenance = cfg.provenance();
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    KernelContext ctx;
    ctx.winding = 0;
    ctx.debug_bias = bias;

    auto add = [&rep](const std::string& name, double measured, double tol,
                      const std::string& detail = "") {
        rep.checks.push_back({name, measured <= tol, measured, tol, detail});
    };

    { // kernel symmetry N(x,y) == N(y,x)
        double worst = 0.0;
        for (int i = 0; i < 64; ++i) {
            Vec2 x = random_interior(rng, 0.98), y = random_interior(rng, 0.98);
            worst = std::max(worst, std::abs(neumann_N(ctx, x, y) - neumann_N(ctx, y, x)));
        }
        add("kernel_symmetry", worst, 1e-12);
    }

    { // boundary flux of grad_x N equals 2 pi for interior sources
        double worst = 0.0;
        const int m = 4096;
        for (int trial = 0; trial < 8; ++trial) {
            Vec2 y = random_interior(rng, 0.9);
            double flux = 0.0;
            for (int k = 0; k < m; ++k) {
                double th = 2.0 * kPi * k / m;
                Vec2 x{std::cos(th), std::sin(th)};
                flux += grad_x_neumann_N(ctx, x, y).dot(x) * (2.0 * kPi / m);
            }
            worst = std::max(worst, std::abs(flux - 2.0 * kPi));
        }
        add("kernel_flux", worst, 1e-6);
    }

    { // Dirichlet Green function vanishes on the boundary
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            double th = 2.0 * kPi * u01(rng);
            Vec2 x{std::cos(th), std::sin(th)};
            worst = std::max(worst, std::abs(dirichlet_green_G(ctx, x, random_interior(rng, 0.9))));
        }
        add("green_boundary", worst, 1e-12);
    }

    { // gradient consistency: analytic grad_W vs central differences, plus
      // the value anchor against the closed-form assembly
        double worst = 0.0;
        std::string detail;
        for (int trial = 0; trial < 20; ++trial) {
            VortexConfiguration c = random_config(rng, 2 + trial % 4, 0.08, true);
            double w = renormalized_W(ctx, c);
            double anchor = std::abs(w - direct_W(c)) / (1.0 + std::abs(direct_W(c)));
            std::vector<Vec2> g = grad_W(ctx, c);
            double gerr = 0.0, gscale = 1.0;
            const double h = 1e-6;
            for (std::size_t j = 0; j < c.size(); ++j) {
                for (int axis = 0; axis < 2; ++axis) {
                    VortexConfiguration cp = c, cm = c;
                    double& xp = axis == 0 ? cp.positions[j].x : cp.positions[j].y;
                    double& xm = axis == 0 ? cm.positions[j].x : cm.positions[j].y;
                    xp += h;
                    xm -= h;
                    double fd = (renormalized_W(ctx, cp) - renormalized_W(ctx, cm)) / (2.0 * h);
                    double an = axis == 0 ? g[j].x : g[j].y;
                    gerr = std::max(gerr, std::abs(fd - an));
                    gscale = std::max(gscale, std::abs(an));
                }
            }
            double err = std::max(anchor, gerr / gscale);
            if (err > worst) {
                worst = err;
                detail = "config " + std::to_string(trial) + " (n=" + std::to_string(c.size()) +
                         "), anchor=" + fmt(anchor) + ", grad=" + fmt(gerr / gscale);
            }
        }
        add("gradient_consistency", worst, 1e-6, detail);
    }

    { // ODE dissipation ledger on the repelling pair
        VortexConfiguration c;
        c.positions = {{0.3, 0.0}, {-0.3, 0.0}};
        c.degrees = {1, 1};
        OdeTrajectory traj = integrate_gradient_flow(ctx, c, 0.05, 0.05);
        double tol = 1e-6 * (1.0 + std::abs(traj.W.front()));
        add("ode_ledger", traj.max_ledger_residual(), tol);
    }

    { // transport metric: axioms and exhaustive-oracle agreement
        double worst = 0.0;
        std::string detail;
        for (int trial = 0; trial < 30; ++trial) {
            AtomicSignedMeasure a = random_measure(rng, 4, true);
            AtomicSignedMeasure b = random_measure(rng, 4, true);
            double dab = w_minus_one_one(a, b);
            double e = std::abs(dab - w_minus_one_one_exhaustive(a, b));
            e = std::max(e, std::abs(dab - w_minus_one_one(b, a)));   // symmetry
            e = std::max(e, std::abs(w_minus_one_one(a, a)));         // identity
            if (trial < 15) {                                         // triangle
                AtomicSignedMeasure c = random_measure(rng, 4, true);
                double viol = dab - w_minus_one_one(a, c) - w_minus_one_one(c, b);
                e = std::max(e, std::max(0.0, viol));
            }
            if (e > worst) {
                worst = e;
                detail = "instance " + std::to_string(trial);
            }
        }
        add("metric_axioms", worst, 1e-9, detail);
    }

    { // Poisson/Helmholtz round trip: (alpha - Delta) solve == identity
        int nr = grid, nt = 2 * grid;
        std::vector<Complex> v(static_cast<std::size_t>(nr) * nt);
        Field shape(nr, nt, 0.1, BcKind::neumann); // geometry helper only
        for (int i = 0; i < nr; ++i)
            for (int k = 0; k < nt; ++k) {
                double r = shape.radius(i), th = shape.theta(k);
                v[static_cast<std::size_t>(i) * nt + k] =
                    std::polar((1.0 - r * r) * r * r, 2.0 * th);
            }
        const double alpha = 1.7;
        std::vector<Complex> lap = apply_laplacian(v, nr, nt, BcKind::neumann, {});
        std::vector<Complex> rhs(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) rhs[i] = alpha * v[i] - lap[i];
        HelmholtzSolver hs(nr, nt, alpha, BcKind::neumann);
        std::vector<Complex> back = hs.solve(rhs, {});
        double worst = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            worst = std::max(worst, std::abs(back[i] - v[i]));
        add("poisson_roundtrip", worst, 1e-10);
    }

    { // PDE dissipation ledger and conservation-law residuals on a smooth
      // modulus/phase relaxation. Refinement study (dt and dr halved
      // together, grids 64 -> 128 -> 256): every residual shrinks ~4x per
      // halving, so tolerances scale as (128/grid)^2 off the measured
      // 128-grid baseline with a 3x margin. Reduced grids (e.g. 64) pass
      // automatically at their documented, loosened values.
        SolverConfig sc;
        sc.epsilon = 0.1;
        sc.bc = BcKind::neumann;
        sc.dt = 2e-4 * 48.0 / grid;
        sc.t_end = 4e-3;
        int nr = grid, nt = 2 * grid;
        Field f0(nr, nt, sc.epsilon, sc.bc);
        for (int i = 0; i < nr; ++i)
            for (int k = 0; k < nt; ++k) {
                double r = f0.radius(i), th = f0.theta(k);
                double q = 2.0 * r * r - r * r * r * r; // q'(1) = 0
                f0.at(i, k) = std::polar(0.9 + 0.05 * q * std::cos(th), 0.2 * q * std::sin(th));
            }
        double t0 = 2e-3;
        TdglRun out = run_tdgl(f0, sc, {t0 - sc.dt, t0, t0 + sc.dt});
        double mono = 0.0;
        for (std::size_t i = 1; i < out.ledger.energy.size(); ++i)
            mono = std::max(mono, out.ledger.energy[i] - out.ledger.energy[i - 1]);
        double scale = (128.0 / grid) * (128.0 / grid);
        add("pde_energy_monotone", mono, 1e-12 * out.ledger.energy.front());
        add("pde_ledger", out.ledger.max_residual(), 6e-3 * scale);
        IdentityResiduals res = verify_identities(out.snapshots, out.probe_times);
        add("identity_mass", res.mass, 3e-2 * scale);
        add("identity_supercurrent", res.supercurrent, 6e-5 * scale);
        add("identity_energy", res.energy, 2.5e-3 * scale);
    }

    { // gamma constant: shooting vs damped-Newton relaxation
        RadialProfile p1 = solve_radial_profile();
        RadialProfile p2 = solve_radial_profile_relaxation();
        add("gamma_methods", std::abs(bbh_gamma(p1) - bbh_gamma(p2)), 1e-4);
    }

    return rep;
}

} // namespace vf
