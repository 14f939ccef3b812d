#ifndef VORTEXFLOW_HARNESS_HPP
#define VORTEXFLOW_HARNESS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vortexflow/geometry.hpp"

namespace vf {

/// Plain-text key=value experiment configuration. '#' starts a comment,
/// blank lines are ignored, keys are unique (later lines win). There are no
/// hidden defaults: every typed getter records the value actually used, so
/// echo() reproduces the complete effective configuration (explicit keys
/// plus exercised defaults) and fnv_hash() fingerprints it for provenance.
class Config {
public:
    Config() = default;
    static Config parse(const std::string& text);
    static Config load(const std::string& path); // throws std::runtime_error

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& def) const;
    double get_double(const std::string& key, double def) const;
    int get_int(const std::string& key, int def) const;
    bool get_bool(const std::string& key, bool def) const;
    /// Comma-separated list of numbers.
    std::vector<double> get_list(const std::string& key, const std::vector<double>& def) const;
    /// Semicolon-separated list of "x,y" pairs.
    std::vector<Vec2> get_points(const std::string& key, const std::vector<Vec2>& def) const;

    /// Canonical sorted key=value document of every effective entry.
    std::string echo() const;
    /// FNV-1a (64 bit) of echo().
    std::uint64_t fnv_hash() const;
    /// "cfg-" + 16 hex digits of fnv_hash(); stamped on every output row.
    std::string provenance() const;

private:
    std::map<std::string, std::string> raw_;
    mutable std::map<std::string, std::string> effective_;
};

/// Rectangular CSV table. Every row carries the config provenance tag in the
/// trailing "provenance" column; `flagged` is true if any row was emitted
/// with a nonempty flag (partial/failed experiment).
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    bool flagged = false;

    std::string to_csv() const;
    void write_csv(const std::string& path) const;
};

/// One epsilon rung of the PDE-vs-ODE comparison.
struct PdeOdeRow {
    double eps = 0.0;
    double t_end = 0.0;            // window actually covered
    double sup_distance = 0.0;     // sup_t W^{-1,1}(pi sum delta_xi, pi sum delta_a)
    double max_eta = 0.0;          // sup_t eta(t)
    double rho_star = 0.0;         // min_t rho_a along the ODE path
    double excess_initial = 0.0;   // D(a(0))
    double excess_final = 0.0;     // D(a(t_end))
    double pde_ledger_residual = 0.0;
    double ode_ledger_residual = 0.0;
    std::string flag;              // "" clean, else "blowup"/"rho_breach"
};

struct PdeOdeResult {
    std::vector<PdeOdeRow> rows;
    Table table;
};

/// Tracks the TDGL vortices against the point-vortex flow for each epsilon
/// in the config list (keys: eps_list, grid_nr, grid_nt, bc, positions,
/// degrees, t_end, probes, dt, rho_stop, eta_rho_star, seed).
PdeOdeResult run_pde_vs_ode(const Config& cfg);
Table experiment_pde_vs_ode(const Config& cfg);

/// One n rung of the ODE-vs-mean-field comparison.
struct MeanFieldRow {
    int n = 0;                       // vortices actually emitted by placement
    int n_requested = 0;
    double t_bar_end = 0.0;          // rescaled window actually covered
    double final_distance = 0.0;     // W^{-1,1} to the reference at the last probe
    double sup_distance = 0.0;       // max over probe times
    double weak_residual_ratio = 0.0; // |total| / (sum of |term| magnitudes)
    std::vector<double> m_r;         // maximal vorticity at the configured radii
    std::string flag;                // "" clean, else "rho_breach"
};

struct MeanFieldResult {
    std::vector<MeanFieldRow> rows;
    std::vector<double> radii;   // M_r radii (shared by all rows)
    double fit_a = 0.0;          // least-squares fit M_r ~ A/sqrt(|log r|) + B/sqrt(n)
    double fit_b = 0.0;
    double fit_r_squared = 0.0;
    Table table;
};

/// Compares rescaled n-body empirical measures against a large-N mean-field
/// particle reference for each n in the config list (keys: n_list, n_ref,
/// patch_radius, t_bar_end, dt_bar_ref, probes, rho_stop, mr_radii, seed).
MeanFieldResult run_ode_vs_meanfield(const Config& cfg);
Table experiment_ode_vs_meanfield(const Config& cfg);

struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail; // inputs / context for a failure
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    std::string provenance;

    bool all_pass() const;
    std::string to_json() const;
};

/// Full invariant suite: kernel identities, gradient consistency (analytic
/// gradient vs central differences, anchored to the closed-form kernel
/// values so an injected bias is caught), ODE/PDE dissipation ledgers,
/// conservation-law residuals, transport-metric axioms and oracle
/// agreement, Poisson round-trip, and the gamma cross-method check.
/// Keys: grid (64 loosens the PDE tolerances per the documented table),
/// kernel_bias (fault injection), seed.
ValidationReport validate_all(const Config& cfg = Config());

} // namespace vf

#endif
