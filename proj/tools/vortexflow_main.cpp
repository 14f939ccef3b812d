#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "vortexflow/diagnostics.hpp"
#include "vortexflow/field_ops.hpp"
#include "vortexflow/harness.hpp"
#include "vortexflow/initial_data.hpp"
#include "vortexflow/mean_field.hpp"
#include "vortexflow/point_vortex.hpp"
#include "vortexflow/tdgl.hpp"
#include "vortexflow/transport_metric.hpp"

using namespace vf;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

Config load_config(const std::string& path) {
    return path.empty() ? Config{} : Config::load(path);
}

std::string ensure_out(const std::string& out) {
    std::filesystem::create_directories(out);
    return out;
}

VortexConfiguration config_vortices(const Config& cfg, const char* pos_key = "positions",
                                    const char* deg_key = "degrees") {
    std::vector<Vec2> pos = cfg.get_points(pos_key, {{0.3, 0.0}, {-0.3, 0.0}});
    std::vector<double> deg = cfg.get_list(deg_key, std::vector<double>(pos.size(), 1.0));
    VortexConfiguration vc;
    vc.positions = pos;
    for (double d : deg) vc.degrees.push_back(static_cast<int>(std::llround(d)));
    if (vc.degrees.size() != vc.positions.size())
        throw std::invalid_argument("positions/degrees length mismatch");
    return vc;
}

AtomicSignedMeasure vortex_atoms(const VortexConfiguration& vc, double unit = kPi) {
    AtomicSignedMeasure m;
    for (std::size_t j = 0; j < vc.positions.size(); ++j)
        m.add(vc.positions[j], unit * vc.degrees[j]);
    return m;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

json report_header(const Config& cfg) {
    return json{{"provenance", cfg.provenance()}};
}

void emit_report(const json& rep, const std::string& out_dir, const std::string& name) {
    std::string text = rep.dump(2) + "\n";
    std::cout << text;
    if (!out_dir.empty()) write_text(ensure_out(out_dir) + "/" + name, text);
}

// ---------------------------------------------------------------- kernels

int cmd_kernels(const Config& cfg, const std::string& out_dir) {
    int side = cfg.get_int("kernel_points", 4);
    double radius = cfg.get_double("kernel_radius", 0.8);
    KernelContext ctx;
    std::vector<Vec2> pts;
    for (int i = 0; i < side; ++i)
        for (int k = 0; k < side; ++k) {
            Vec2 p(-radius + 2.0 * radius * i / (side - 1),
                   -radius + 2.0 * radius * k / (side - 1));
            if (p.norm() <= radius + 1e-12) pts.push_back(p);
        }
    Table t;
    t.columns = {"x1", "x2", "y1", "y2", "N", "H", "G", "provenance"};
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (const Vec2& x : pts)
        for (const Vec2& y : pts) {
            if (dist(x, y) < 1e-12) continue;
            t.rows.push_back({num(x.x), num(x.y), num(y.x), num(y.y),
                              num(neumann_N(ctx, x, y)), num(harmonic_part_H(ctx, x, y)),
                              num(dirichlet_green_G(ctx, x, y)), cfg.provenance()});
        }
    t.write_csv(ensure_out(out_dir) + "/kernels.csv");
    return 0;
}

// ---------------------------------------------------------------- tdgl run

int cmd_tdgl_run(const Config& cfg, const std::string& out_dir) {
    double eps = cfg.get_double("eps", 0.08);
    int n_r = cfg.get_int("grid_nr", 128);
    int n_t = cfg.get_int("grid_nt", 256);
    BcKind bc = bc_kind_from_string(cfg.get_string("bc", "neumann"));
    VortexConfiguration vc = config_vortices(cfg);
    double t_end = cfg.get_double("t_end", 0.02);
    int n_snap = cfg.get_int("snapshots", 5);

    KernelContext ctx;
    ctx.winding = bc == BcKind::dirichlet ? vc.total_degree() : 0;
    PreparedField prep = build_field(ctx, vc, eps, bc, n_r, n_t);

    SolverConfig sc;
    sc.epsilon = eps;
    sc.bc = bc;
    sc.winding = ctx.winding;
    sc.t_end = t_end;
    double log_eps = std::abs(std::log(eps));
    sc.dt = cfg.get_double("dt", std::min(1e-4, 0.1 * eps * eps / log_eps));

    std::vector<double> probes;
    for (int i = 0; i <= n_snap; ++i) probes.push_back(t_end * i / std::max(1, n_snap));

    std::string dir = ensure_out(out_dir);
    std::string flag;
    DissipationLedger ledger;
    try {
        TdglRun run = run_tdgl(prep.field, sc, probes);
        ledger = run.ledger;
        char name[64];
        for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
            std::snprintf(name, sizeof(name), "/snapshot_%04zu.bin", i);
            save_field(run.snapshots[i], dir + name);
        }
    } catch (const TdglBlowup& b) {
        flag = "blowup";
        save_field(b.last_state, dir + "/snapshot_last.bin");
    }

    Table t;
    t.columns = {"t", "E", "dissipation", "residual", "flag", "provenance"};
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    for (std::size_t i = 0; i < ledger.times.size(); ++i)
        t.rows.push_back({num(ledger.times[i]), num(ledger.energy[i]),
                          num(ledger.dissipation[i]), num(ledger.residual(i)), flag,
                          cfg.provenance()});
    t.write_csv(dir + "/ledger.csv");
    return flag.empty() ? 0 : 1;
}

// -------------------------------------------------------------- pvortex run

int cmd_pvortex_run(const Config& cfg, const std::string& out_dir) {
    VortexConfiguration vc = config_vortices(cfg);
    double t_end = cfg.get_double("t_end", 0.1);
    double rho_stop = cfg.get_double("rho_stop", 0.05);
    int n_probes = cfg.get_int("probes", 32);
    BcKind bc = bc_kind_from_string(cfg.get_string("bc", "neumann"));

    KernelContext ctx;
    ctx.winding = bc == BcKind::dirichlet ? vc.total_degree() : 0;
    std::vector<double> probes;
    for (int i = 1; i <= n_probes; ++i) probes.push_back(t_end * i / n_probes);
    OdeTrajectory traj = integrate_gradient_flow(ctx, vc, t_end, rho_stop, probes);
    std::string flag = traj.stop_reason == StopReason::rho_breach ? "rho_breach" : "";

    Table t;
    t.columns = {"t"};
    for (std::size_t j = 0; j < vc.positions.size(); ++j) {
        t.columns.push_back("a_" + std::to_string(j + 1) + "x");
        t.columns.push_back("a_" + std::to_string(j + 1) + "y");
    }
    t.columns.insert(t.columns.end(), {"W", "kinetic_cum", "rho_a", "flag", "provenance"});
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        std::vector<std::string> row = {num(traj.times[i])};
        for (const Vec2& a : traj.states[i].positions) {
            row.push_back(num(a.x));
            row.push_back(num(a.y));
        }
        row.insert(row.end(), {num(traj.W[i]), num(traj.kinetic[i]),
                               num(rho_a(traj.states[i])), flag, cfg.provenance()});
        t.rows.push_back(std::move(row));
    }
    t.write_csv(ensure_out(out_dir) + "/trajectory.csv");
    return flag.empty() ? 0 : 1;
}

// ------------------------------------------------------------------ mkdata

Density density_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open density grid: " + path);
    auto rows = std::make_shared<std::vector<std::vector<double>>>();
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows->push_back(std::move(row));
    }
    if (rows->empty()) throw std::runtime_error("empty density grid: " + path);
    // Piecewise-constant samples over [-1,1]^2, row index = y, column = x,
    // normalized to total mass 2 pi over the disk.
    int nr = static_cast<int>(rows->size());
    int nc = static_cast<int>(rows->front().size());
    Density raw = [rows, nr, nc](const Vec2& p) {
        int i = std::min(nr - 1, std::max(0, static_cast<int>((p.y + 1.0) / 2.0 * nr)));
        int k = std::min(nc - 1, std::max(0, static_cast<int>((p.x + 1.0) / 2.0 * nc)));
        const std::vector<double>& row = (*rows)[static_cast<std::size_t>(i)];
        if (static_cast<int>(row.size()) != nc)
            throw std::runtime_error("ragged density grid");
        return std::max(0.0, row[static_cast<std::size_t>(k)]);
    };
    int quad = 400;
    double mass = 0.0, h = 2.0 / quad;
    for (int i = 0; i < quad; ++i)
        for (int k = 0; k < quad; ++k) {
            Vec2 p(-1.0 + (k + 0.5) * h, -1.0 + (i + 0.5) * h);
            if (p.norm() <= 1.0) mass += raw(p) * h * h;
        }
    if (mass <= 0.0) throw std::runtime_error("density grid has no mass on the disk");
    double scale = 2.0 * kPi / mass;
    return [raw, scale](const Vec2& p) { return scale * raw(p); };
}

int cmd_mkdata(const Config& cfg, const std::string& out_dir) {
    int n = cfg.get_int("n", 64);
    double eps = cfg.get_double("eps", 0.08);
    int n_r = cfg.get_int("grid_nr", 128);
    int n_t = cfg.get_int("grid_nt", 256);
    BcKind bc = bc_kind_from_string(cfg.get_string("bc", "neumann"));

    Density omega0;
    if (cfg.has("density_csv")) {
        omega0 = density_from_csv(cfg.get_string("density_csv", ""));
    } else {
        double r0 = cfg.get_double("patch_radius", 0.48);
        omega0 = [r0](const Vec2& p) { return p.norm() <= r0 ? 2.0 / (r0 * r0) : 0.0; };
    }

    PlacementReport pl = place_vortices(omega0, n);
    std::string dir = ensure_out(out_dir);

    Table t;
    t.columns = {"x", "y", "degree", "n_requested", "n_emitted", "cell_side", "provenance"};
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (std::size_t j = 0; j < pl.cfg.positions.size(); ++j)
        t.rows.push_back({num(pl.cfg.positions[j].x), num(pl.cfg.positions[j].y),
                          std::to_string(pl.cfg.degrees[j]), std::to_string(pl.n_requested),
                          std::to_string(pl.n_emitted), num(pl.cell_side), cfg.provenance()});
    t.write_csv(dir + "/configuration.csv");

    KernelContext ctx;
    ctx.winding = bc == BcKind::dirichlet ? pl.cfg.total_degree() : 0;
    PreparedField prep = build_field(ctx, pl.cfg, eps, bc, n_r, n_t);
    save_field(prep.field, dir + "/initial_field.bin");

    json rep = report_header(cfg);
    rep["n_requested"] = pl.n_requested;
    rep["n_emitted"] = pl.n_emitted;
    rep["cell_side"] = pl.cell_side;
    rep["boundary_mass"] = pl.boundary_mass;
    rep["energy_bound"] = energy_bound_check(pl.cfg);
    rep["excess_energy"] = prep.excess_energy;
    rep["w_value"] = prep.w_value;
    emit_report(rep, dir, "mkdata.json");
    return 0;
}

// -------------------------------------------------------------------- diag

Field load_diag_field(const Config& cfg) {
    std::string path = cfg.get_string("field", "");
    if (path.empty()) throw std::runtime_error("diag requires config key 'field' (snapshot path)");
    return load_field(path);
}

int cmd_diag(const std::string& which, const Config& cfg, const std::string& out_dir) {
    json rep = report_header(cfg);
    rep["report"] = which;

    if (which == "track") {
        Field f = load_diag_field(cfg);
        TrackingResult tr = locate_vortices(f);
        rep["total_degree"] = tr.total_degree;
        rep["vortices"] = json::array();
        for (const TrackedVortex& v : tr.vortices)
            rep["vortices"].push_back({{"x", v.position.x},
                                       {"y", v.position.y},
                                       {"degree", v.degree},
                                       {"radius", v.radius},
                                       {"ambiguous", v.ambiguous}});
    } else if (which == "dist") {
        VortexConfiguration a = config_vortices(cfg, "positions_a", "degrees_a");
        VortexConfiguration b = config_vortices(cfg, "positions_b", "degrees_b");
        rep["w_minus_one_one"] = w_minus_one_one(vortex_atoms(a), vortex_atoms(b));
    } else if (which == "excess") {
        Field f = load_diag_field(cfg);
        VortexConfiguration vc = config_vortices(cfg);
        KernelContext ctx;
        ctx.winding = f.bc == BcKind::dirichlet ? vc.total_degree() : 0;
        rep["excess_energy"] = excess_energy(f, ctx, vc);
        rep["total_energy"] = total_energy(f);
    } else if (which == "eta") {
        Field f = load_diag_field(cfg);
        VortexConfiguration vc = config_vortices(cfg);
        double rs = cfg.get_double("rho_star", 0.25 * rho_a(vc));
        EtaReport er = eta_functional(f, vc.positions, rs);
        rep["eta"] = er.eta;
        rep["rho_star"] = rs;
        rep["per_vortex"] = json::array();
        for (const Vec2& m : er.per_vortex) rep["per_vortex"].push_back({{"x", m.x}, {"y", m.y}});
    } else if (which == "equip") {
        Field f = load_diag_field(cfg);
        std::vector<Vec2> c = cfg.get_points("center", {{0.0, 0.0}});
        double sigma = cfg.get_double("sigma", 0.4);
        EquipartitionReport er = equipartition_check(f, c.front(), sigma);
        rep["matrix"] = {{er.matrix[0][0], er.matrix[0][1]}, {er.matrix[1][0], er.matrix[1][1]}};
        rep["expected"] = er.expected;
        rep["frobenius_deviation"] = er.frobenius_deviation;
        rep["ratio"] = er.ratio;
        rep["oracle_diagonal"] = equipartition_oracle_diagonal(sigma / f.epsilon);
    } else if (which == "hodge") {
        Field f = load_diag_field(cfg);
        VectorGrid j = supercurrent(f);
        if (cfg.has("positions")) {
            // subtract the canonical current of the given configuration
            VortexConfiguration vc = config_vortices(cfg);
            KernelContext ctx;
            ctx.winding = f.bc == BcKind::dirichlet ? vc.total_degree() : 0;
            VectorGrid jstar = supercurrent(canonical_harmonic_map(ctx, vc, f.bc, f.n_r, f.n_theta));
            for (std::size_t i = 0; i < j.v.size(); ++i) j.v[i] -= jstar.v[i];
        }
        HodgeResult h = hodge_decompose(j, f.bc);
        rep["norm_grad_f1"] = h.norm_grad_f1;
        rep["norm_grad_f2"] = h.norm_grad_f2;
        rep["residual"] = h.residual;
    } else if (which == "kinetic") {
        // Short TDGL run vs the matching ODE run on the same layout.
        double eps = cfg.get_double("eps", 0.08);
        int n_r = cfg.get_int("grid_nr", 128);
        int n_t = cfg.get_int("grid_nt", 256);
        BcKind bc = bc_kind_from_string(cfg.get_string("bc", "neumann"));
        VortexConfiguration vc = config_vortices(cfg);
        double t_end = cfg.get_double("t_end", 0.01);
        int n_probes = cfg.get_int("probes", 8);

        KernelContext ctx;
        ctx.winding = bc == BcKind::dirichlet ? vc.total_degree() : 0;
        std::vector<double> probes;
        for (int i = 1; i <= n_probes; ++i) probes.push_back(t_end * i / n_probes);
        OdeTrajectory traj = integrate_gradient_flow(ctx, vc, t_end, 1e-3, probes);
        double rs = rho_star(traj.states);

        PreparedField prep = build_field(ctx, vc, eps, bc, n_r, n_t);
        SolverConfig sc;
        sc.epsilon = eps;
        sc.bc = bc;
        sc.winding = ctx.winding;
        sc.t_end = t_end;
        double log_eps = std::abs(std::log(eps));
        sc.dt = cfg.get_double("dt", std::min(1e-4, 0.1 * eps * eps / log_eps));

        std::vector<ScalarGrid> ut_sq;
        std::vector<std::vector<Vec2>> refs;
        std::vector<double> times;
        TdglSolver solver(prep.field, sc);
        std::size_t next = 0;
        while (solver.time() < t_end - 1e-12 && next < probes.size()) {
            solver.step();
            if (solver.time() + 1e-12 < probes[next]) continue;
            const Field& f = solver.field();
            ScalarGrid g(f.n_r, f.n_theta, f.radius(0), f.dr());
            const std::vector<Complex>& w = solver.time_derivative();
            for (std::size_t i = 0; i < w.size(); ++i) g.v[i] = std::norm(w[i]);
            ut_sq.push_back(std::move(g));
            // evaluate the ODE path at the snapshot time
            std::size_t best = 0;
            double d = 1e300;
            for (std::size_t i = 0; i < traj.times.size(); ++i)
                if (std::abs(traj.times[i] - solver.time()) < d) {
                    d = std::abs(traj.times[i] - solver.time());
                    best = i;
                }
            refs.push_back(traj.states[best].positions);
            times.push_back(solver.time());
            ++next;
        }
        double ode_kin = kPi * traj.kinetic.back();
        KineticReport kr = kinetic_comparison(ut_sq, refs, times, eps, rs, ode_kin);
        rep["ode_side"] = kr.ode_side;
        rep["pde_side"] = kr.pde_side;
        rep["difference"] = kr.difference;
        rep["rho_star"] = rs;
    } else {
        throw std::runtime_error("unknown diag report: " + which);
    }

    emit_report(rep, out_dir, "diag_" + which + ".json");
    return 0;
}

// ------------------------------------------------------------- experiments

int cmd_experiment(const std::string& which, const Config& cfg, const std::string& out_dir) {
    Table t = which == "pde_vs_ode" ? experiment_pde_vs_ode(cfg)
                                    : experiment_ode_vs_meanfield(cfg);
    t.write_csv(ensure_out(out_dir) + "/" + which + ".csv");
    std::cout << t.to_csv();
    return t.flagged ? 1 : 0;
}

// ---------------------------------------------------------------- validate

int cmd_validate(Config cfg, const std::string& out_dir, double inject_bias) {
    if (inject_bias != 0.0) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", inject_bias);
        cfg.set("kernel_bias", buf);
    }
    ValidationReport rep = validate_all(cfg);
    std::string text = rep.to_json() + "\n";
    std::cout << text;
    if (!out_dir.empty()) write_text(ensure_out(out_dir) + "/validation.json", text);
    return rep.all_pass() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vortexflow: Ginzburg-Landau vortex dynamics laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key=value configuration file");
        sub->add_option("--out", out_dir, "output directory");
    };

    CLI::App* kernels = app.add_subcommand("kernels", "dump kernel table CSV");
    add_common(kernels);

    CLI::App* tdgl = app.add_subcommand("tdgl", "Ginzburg-Landau PDE solver");
    CLI::App* tdgl_run = tdgl->add_subcommand("run", "march the PDE, write snapshots + ledger");
    add_common(tdgl_run);

    CLI::App* pvortex = app.add_subcommand("pvortex", "point-vortex gradient flow");
    CLI::App* pvortex_run = pvortex->add_subcommand("run", "integrate the ODE, write trajectory");
    add_common(pvortex_run);

    CLI::App* mkdata = app.add_subcommand("mkdata", "vortex placement + prepared initial field");
    add_common(mkdata);

    CLI::App* diag = app.add_subcommand("diag", "diagnostic JSON reports");
    std::vector<CLI::App*> diag_subs;
    for (const char* name : {"track", "dist", "excess", "eta", "equip", "hodge", "kinetic"}) {
        CLI::App* s = diag->add_subcommand(name);
        add_common(s);
        diag_subs.push_back(s);
    }
    diag->require_subcommand(1);

    CLI::App* exp = app.add_subcommand("exp", "convergence experiments");
    CLI::App* exp_pde = exp->add_subcommand("pde_vs_ode", "TDGL vs point-vortex ladder");
    CLI::App* exp_mf = exp->add_subcommand("ode_vs_meanfield", "empirical vs mean-field");
    add_common(exp_pde);
    add_common(exp_mf);
    exp->require_subcommand(1);

    double inject_bias = 0.0;
    CLI::App* validate = app.add_subcommand("validate", "run the invariant suite");
    add_common(validate);
    validate->add_option("--inject-kernel-bias", inject_bias,
                         "test mode: add a constant bias to the kernel values");

    CLI11_PARSE(app, argc, argv);

    try {
        Config cfg = load_config(config_path);
        if (kernels->parsed()) return cmd_kernels(cfg, out_dir);
        if (tdgl_run->parsed()) return cmd_tdgl_run(cfg, out_dir);
        if (pvortex_run->parsed()) return cmd_pvortex_run(cfg, out_dir);
        if (mkdata->parsed()) return cmd_mkdata(cfg, out_dir);
        for (CLI::App* s : diag_subs)
            if (s->parsed()) return cmd_diag(s->get_name(), cfg, out_dir);
        if (exp_pde->parsed()) return cmd_experiment("pde_vs_ode", cfg, out_dir);
        if (exp_mf->parsed()) return cmd_experiment("ode_vs_meanfield", cfg, out_dir);
        if (validate->parsed()) return cmd_validate(cfg, out_dir, inject_bias);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cerr << "error: no subcommand\n";
    return 2;
}
