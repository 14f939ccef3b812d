#include "vortexflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "vortexflow/field_ops.hpp"
#include "vortexflow/poisson.hpp"
#include "vortexflow/radial_profile.hpp"

namespace vf {

namespace {

constexpr double kPi = 3.14159265358979323846;

int find_root(std::vector<int>& parent, int a) {
    while (parent[a] != a) {
        parent[a] = parent[parent[a]];
        a = parent[a];
    }
    return a;
}

void unite(std::vector<int>& parent, int a, int b) {
    a = find_root(parent, a);
    b = find_root(parent, b);
    if (a != b) parent[b] = a;
}

struct Cluster {
    std::vector<int> cells; // flat i * n_theta + k
    int i_min = 1 << 30, i_max = -1;
    bool full_ring = false; // occupies every theta column of some row
    int k_lo = 0, k_len = 0; // circular theta interval when not a full ring
};

// Smallest circular interval [k_lo, k_lo + k_len) covering the marked
// columns; k_len == n_theta means no gap exists.
void theta_interval(const std::vector<char>& col, int nt, int& k_lo, int& k_len) {
    int best_gap = -1, gap_start = 0;
    int run = 0, run_start = 0;
    for (int k = 0; k < 2 * nt; ++k) {
        if (!col[k % nt]) {
            if (run == 0) run_start = k;
            ++run;
            if (run > best_gap && run <= nt) {
                best_gap = run;
                gap_start = run_start;
            }
        } else {
            run = 0;
        }
    }
    if (best_gap <= 0) {
        k_lo = 0;
        k_len = nt;
        return;
    }
    k_lo = (gap_start + best_gap) % nt;
    k_len = nt - best_gap;
}

// Half the phase circulation along the closed ring of cell centers at row i.
double ring_half_circulation(const Field& f, int i) {
    double s = 0.0;
    for (int k = 0; k < f.n_theta; ++k) {
        const Complex a = f.at(i, k), b = f.at(i, (k + 1) % f.n_theta);
        s += std::arg(b * std::conj(a));
    }
    return 0.5 * s;
}

} // namespace

TrackingResult locate_vortices(const Field& f) {
    f.validate();
    const int nr = f.n_r, nt = f.n_theta;
    for (int k = 0; k < nt; ++k) {
        if (std::abs(f.at(nr - 1, k)) <= 0.5)
            throw std::invalid_argument("locate_vortices: core touches the outer ring");
    }

    std::vector<char> mark(static_cast<std::size_t>(nr) * nt, 0);
    for (int i = 0; i < nr; ++i)
        for (int k = 0; k < nt; ++k)
            if (std::abs(f.at(i, k)) < 0.5) mark[static_cast<std::size_t>(i) * nt + k] = 1;

    std::vector<int> parent(mark.size());
    std::iota(parent.begin(), parent.end(), 0);
    for (int i = 0; i < nr; ++i) {
        for (int k = 0; k < nt; ++k) {
            const int id = i * nt + k;
            if (!mark[id]) continue;
            const int kn = (k + 1) % nt;
            if (mark[i * nt + kn]) unite(parent, id, i * nt + kn);
            if (i + 1 < nr && mark[(i + 1) * nt + k]) unite(parent, id, (i + 1) * nt + k);
        }
    }

    std::vector<int> root_of(mark.size(), -1);
    std::vector<Cluster> clusters;
    for (int i = 0; i < nr; ++i) {
        for (int k = 0; k < nt; ++k) {
            const int id = i * nt + k;
            if (!mark[id]) continue;
            const int r = find_root(parent, id);
            if (root_of[r] < 0) {
                root_of[r] = static_cast<int>(clusters.size());
                clusters.push_back({});
            }
            Cluster& c = clusters[root_of[r]];
            c.cells.push_back(id);
            c.i_min = std::min(c.i_min, i);
            c.i_max = std::max(c.i_max, i);
        }
    }
    for (Cluster& c : clusters) {
        std::vector<char> col(nt, 0);
        for (int id : c.cells) col[id % nt] = 1;
        theta_interval(col, nt, c.k_lo, c.k_len);
        c.full_ring = (c.k_len == nt);
    }

    const ScalarGrid jac = jacobian(f);
    const double dr = f.dr(), dth = f.dtheta();

    TrackingResult out;
    // Innermost-outward order so that full-ring degrees can be peeled off
    // ring circulations.
    std::vector<int> order(clusters.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return clusters[a].i_max < clusters[b].i_max;
    });

    std::vector<int> degree(clusters.size(), 0);
    std::vector<int> emitted; // cluster indices already carrying a degree
    for (int ci : order) {
        const Cluster& c = clusters[ci];
        int d = 0;
        if (c.full_ring || c.i_min < 2 || c.k_len > nt - 5) {
            // Enclose the cluster with a full ring just outside its radial
            // extent and subtract the inner clusters already counted.
            const int ring = std::min(nr - 1, c.i_max + 2);
            const double circ = ring_half_circulation(f, ring);
            int enclosed = static_cast<int>(std::llround(circ / kPi));
            for (int cj : emitted)
                if (clusters[cj].i_max + 2 <= ring) enclosed -= degree[cj];
            d = enclosed;
        } else {
            const int i0 = c.i_min - 2;
            const int i1 = std::min(nr - 1, c.i_max + 2);
            const int k0 = (c.k_lo - 2 + nt) % nt;
            const int k1 = k0 + c.k_len + 3; // inclusive, wrapped
            const double circ = phase_circulation_half(f, i0, i1, k0, k1);
            d = static_cast<int>(std::llround(circ / kPi));
        }
        degree[ci] = d;
        emitted.push_back(ci);
    }

    for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
        const Cluster& c = clusters[ci];
        // |J|-weighted centroid over the plaquettes touching the cluster.
        double wsum = 0.0;
        Vec2 centroid{0.0, 0.0};
        for (int id : c.cells) {
            const int i = id / nt, k = id % nt;
            for (int di = -1; di <= 0; ++di) {
                const int pi_ = i + di;
                if (pi_ < 0 || pi_ > nr - 2) continue;
                for (int dk = -1; dk <= 0; ++dk) {
                    const int pk = (k + dk + nt) % nt;
                    const double w = std::abs(jac.at(pi_, pk)) * jac.radius(pi_) * dr * dth;
                    if (w <= 0.0) continue;
                    centroid += jac.point(pi_, pk) * w;
                    wsum += w;
                }
            }
        }
        if (wsum > 0.0) {
            centroid = centroid / wsum;
        } else {
            for (int id : c.cells) centroid += f.point(id / nt, id % nt);
            centroid = centroid / static_cast<double>(c.cells.size());
        }
        double rad = 0.0;
        for (int id : c.cells)
            rad = std::max(rad, dist(f.point(id / nt, id % nt), centroid));
        TrackedVortex tv;
        tv.position = centroid;
        tv.degree = degree[ci];
        tv.radius = rad + dr;
        tv.ambiguous = std::abs(degree[ci]) > 1;
        out.vortices.push_back(tv);
    }

    out.total_degree =
        static_cast<int>(std::llround(ring_half_circulation(f, nr - 1) / kPi));
    return out;
}

double excess_energy(const Field& f, const KernelContext& ctx,
                     const VortexConfiguration& cfg) {
    if (f.epsilon <= 0.0)
        throw std::invalid_argument("excess_energy: field carries no epsilon");
    const double w = cfg.size() ? renormalized_W(ctx, cfg) : 0.0;
    const double n = static_cast<double>(cfg.size());
    const double gamma = bbh_gamma(standard_profile());
    return total_energy(f) - w - n * (kPi * std::abs(std::log(f.epsilon)) + gamma);
}

double eta_cutoff(double s) {
    auto bump = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
    if (s <= 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    const double a = bump(2.0 - s), b = bump(s - 1.0);
    return a / (a + b);
}

EtaReport eta_functional(const Field& f, const std::vector<Vec2>& a, double rho_star) {
    if (rho_star <= 0.0) throw std::invalid_argument("eta_functional: rho_star <= 0");
    if (f.epsilon <= 0.0 || f.epsilon >= 1.0)
        throw std::invalid_argument("eta_functional: need 0 < eps < 1");
    const ScalarGrid e = energy_density(f);
    const double scale = 1.0 / std::abs(std::log(f.epsilon));
    EtaReport rep;
    for (const Vec2& aj : a) {
        Vec2 m{0.0, 0.0};
        for (int i = 0; i < e.n_r; ++i) {
            const double w_r = e.radius(i) * e.dr * e.dtheta;
            for (int k = 0; k < e.n_theta; ++k) {
                const Vec2 d = e.point(i, k) - aj;
                const double chi = eta_cutoff(d.norm() / rho_star);
                if (chi == 0.0) continue;
                m += d * (chi * e.at(i, k) * scale * w_r);
            }
        }
        rep.per_vortex.push_back(m);
        rep.eta += m.norm();
    }
    return rep;
}

EtaReport eta_atomic(const AtomicSignedMeasure& energy, const std::vector<Vec2>& a,
                     double rho_star) {
    if (rho_star <= 0.0) throw std::invalid_argument("eta_atomic: rho_star <= 0");
    EtaReport rep;
    for (const Vec2& aj : a) {
        Vec2 m{0.0, 0.0};
        for (std::size_t q = 0; q < energy.points.size(); ++q) {
            const Vec2 d = energy.points[q] - aj;
            m += d * (eta_cutoff(d.norm() / rho_star) * energy.weights[q]);
        }
        rep.per_vortex.push_back(m);
        rep.eta += m.norm();
    }
    return rep;
}

Series time_average(const Series& h, double delta) {
    if (delta <= 0.0) throw std::invalid_argument("time_average: delta <= 0");
    if (h.t.size() != h.v.size() || h.t.size() < 2)
        throw std::invalid_argument("time_average: malformed series");
    for (std::size_t i = 1; i < h.t.size(); ++i)
        if (h.t[i] <= h.t[i - 1])
            throw std::invalid_argument("time_average: times not increasing");
    Series out;
    for (std::size_t i = 0; i < h.t.size(); ++i) {
        const double t1 = h.t[i], t0 = t1 - delta;
        if (t0 < h.t.front() - 1e-12) continue;
        // Trapezoid over [t0, t1] with a linearly interpolated left endpoint.
        std::size_t j = 0;
        while (h.t[j + 1] < t0) ++j;
        const double lam = (t0 - h.t[j]) / (h.t[j + 1] - h.t[j]);
        double tl = t0, vl = h.v[j] + lam * (h.v[j + 1] - h.v[j]);
        double acc = 0.0;
        for (std::size_t q = j + 1; q <= i; ++q) {
            acc += 0.5 * (vl + h.v[q]) * (h.t[q] - tl);
            tl = h.t[q];
            vl = h.v[q];
        }
        out.t.push_back(t1);
        out.v.push_back(acc / delta);
    }
    if (out.t.empty())
        throw std::invalid_argument("time_average: no sample admits a full window");
    return out;
}

EquipartitionReport equipartition_check(const Field& f, const Vec2& xi, double sigma) {
    if (sigma <= 0.0) throw std::invalid_argument("equipartition_check: sigma <= 0");
    if (f.epsilon <= 0.0 || sigma <= f.epsilon)
        throw std::invalid_argument("equipartition_check: need sigma > eps > 0");
    EquipartitionReport rep;
    const double dr = f.dr(), dth = f.dtheta();
    for (int i = 0; i < f.n_r; ++i) {
        const double r = f.radius(i);
        const double w_r = r * dr * dth;
        for (int k = 0; k < f.n_theta; ++k) {
            if (dist(f.point(i, k), xi) >= sigma) continue;
            const double th = f.theta(k);
            const Complex ur = radial_derivative(f, i, k);
            const Complex ut = angular_derivative(f, i, k) / r;
            const Complex ux = std::cos(th) * ur - std::sin(th) * ut;
            const Complex uy = std::sin(th) * ur + std::cos(th) * ut;
            auto pair = [](const Complex& a, const Complex& b) {
                return 0.5 * (std::conj(a) * b + a * std::conj(b)).real();
            };
            rep.matrix[0][0] += 0.5 * pair(ux, ux) * w_r;
            rep.matrix[1][1] += 0.5 * pair(uy, uy) * w_r;
            rep.matrix[0][1] += 0.5 * pair(ux, uy) * w_r;
        }
    }
    rep.matrix[1][0] = rep.matrix[0][1];
    const double lg = std::log(sigma / f.epsilon);
    rep.expected = 0.5 * kPi * lg;
    const double d00 = rep.matrix[0][0] - rep.expected;
    const double d11 = rep.matrix[1][1] - rep.expected;
    rep.frobenius_deviation =
        std::sqrt(d00 * d00 + d11 * d11 + 2.0 * rep.matrix[0][1] * rep.matrix[0][1]);
    rep.ratio = rep.frobenius_deviation / std::sqrt(lg);
    return rep;
}

double equipartition_oracle_diagonal(double sigma_over_eps) {
    if (sigma_over_eps <= 0.0)
        throw std::invalid_argument("equipartition_oracle_diagonal: bad radius");
    const RadialProfile& p = standard_profile();
    // Composite Simpson of (f'^2 + f^2/s^2) s ds; the integrand vanishes
    // linearly at 0 (f ~ c s), so the open left endpoint is harmless.
    const int n = 40000;
    const double h = sigma_over_eps / n;
    auto g = [&](double s) {
        if (s == 0.0) return 0.0;
        const double fv = p.value(s), fs = p.slope(s);
        return (fs * fs + fv * fv / (s * s)) * s;
    };
    double acc = g(0.0) + g(sigma_over_eps);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * g(i * h);
    return 0.5 * kPi * acc * h / 3.0;
}

namespace {

// Complex banded Hermitian positive-definite Cholesky, half-bandwidth p.
// m(i, j) stored for j in [i, i + p] at band[i * (p + 1) + (j - i)].
class BandedHermitian {
public:
    BandedHermitian(int n, int p) : n_(n), p_(p), band_(static_cast<std::size_t>(n) * (p + 1)) {}

    Complex& at(int i, int j) { return band_[static_cast<std::size_t>(i) * (p_ + 1) + (j - i)]; }
    Complex at(int i, int j) const {
        return band_[static_cast<std::size_t>(i) * (p_ + 1) + (j - i)];
    }

    // In-place LDL^H factorization.
    void factor() {
        for (int j = 0; j < n_; ++j) {
            for (int i = std::max(0, j - p_); i < j; ++i) {
                // column update: m(j, j..j+p) -= m(i, j)^H d_i m(i, j..)
                const Complex lij = at(i, j); // = conj(L(j,i)) * d_i
                const double di = at(i, i).real();
                if (di == 0.0) continue;
                const Complex scaled = std::conj(lij) / di;
                for (int k = j; k <= std::min(n_ - 1, i + p_); ++k)
                    at(j, k) -= scaled * at(i, k);
            }
        }
    }

    std::vector<Complex> solve(std::vector<Complex> b) const {
        for (int i = 0; i < n_; ++i) {
            const double di = at(i, i).real();
            for (int j = i + 1; j <= std::min(n_ - 1, i + p_); ++j)
                b[j] -= std::conj(at(i, j)) / di * b[i];
        }
        for (int i = 0; i < n_; ++i) b[i] /= at(i, i).real();
        for (int i = n_ - 1; i >= 0; --i)
            for (int j = i + 1; j <= std::min(n_ - 1, i + p_); ++j)
                b[i] -= at(i, j) / at(i, i).real() * b[j];
        return b;
    }

private:
    int n_, p_;
    std::vector<Complex> band_;
};

// One sparse least-squares row: sum coef[q] x[idx[q]] = rhs.
struct LsRow {
    std::vector<int> idx;
    std::vector<Complex> coef;
    Complex rhs;
};

} // namespace

HodgeResult hodge_decompose(const VectorGrid& j_diff, BcKind bc) {
    const int nr = j_diff.n_r, nt = j_diff.n_theta;
    if (nr < 4 || nt < 8) throw std::invalid_argument("hodge_decompose: grid too small");
    const double dr = j_diff.dr;

    // Polar components, then theta modes.
    std::vector<Complex> vr(static_cast<std::size_t>(nr) * nt), vt(vr.size());
    for (int i = 0; i < nr; ++i) {
        for (int k = 0; k < nt; ++k) {
            const double th = j_diff.theta(k);
            const Vec2& w = j_diff.at(i, k);
            vr[static_cast<std::size_t>(i) * nt + k] = w.x * std::cos(th) + w.y * std::sin(th);
            vt[static_cast<std::size_t>(i) * nt + k] = -w.x * std::sin(th) + w.y * std::cos(th);
        }
    }
    ThetaTransform fft(nr, nt);
    fft.forward(vr.data());
    fft.forward(vt.data());

    // Reconstruction in mode space, filled mode by mode.
    std::vector<Complex> f1m(vr.size()), f2m(vr.size());
    std::vector<Complex> g1r(vr.size()), g1t(vr.size()); // grad f1
    std::vector<Complex> g2r(vr.size()), g2t(vr.size()); // perp grad f2

    // Wall ghosts bake the boundary pair into the operator: the traced
    // potential gets the dirichlet ghost 2*0 - f_last, the partner the
    // neumann ghost f_last.
    const int trace_comp = (bc == BcKind::dirichlet) ? 0 : 1;

    for (int kk = 0; kk < nt; ++kk) {
        const int m = fft.frequency(kk);
        const double sgn_mirror = (m % 2 == 0) ? 1.0 : -1.0;
        // Unknowns x = [f1_0, f2_0, f1_1, f2_1, ...], n = 2 nr.
        const int n = 2 * nr;
        std::vector<LsRow> rows;
        auto d_row = [&](int i, int comp) {
            // Centered radial derivative acting on component comp (0: f1,
            // 1: f2) at row i, with the antipodal mirror across the origin
            // and the boundary ghost at the wall.
            LsRow r;
            if (i == 0) {
                r.idx = {2 * 1 + comp, 2 * 0 + comp};
                r.coef = {1.0 / (2.0 * dr), -sgn_mirror / (2.0 * dr)};
            } else if (i == nr - 1) {
                const double ghost = (comp == trace_comp) ? -1.0 : 1.0;
                r.idx = {2 * (nr - 1) + comp, 2 * (nr - 2) + comp};
                r.coef = {ghost / (2.0 * dr), -1.0 / (2.0 * dr)};
            } else {
                r.idx = {2 * (i + 1) + comp, 2 * (i - 1) + comp};
                r.coef = {1.0 / (2.0 * dr), -1.0 / (2.0 * dr)};
            }
            return r;
        };
        for (int i = 0; i < nr; ++i) {
            const double ri = j_diff.radius(i);
            const Complex im_over_r(0.0, m / ri);
            LsRow a = d_row(i, 0); // v_r = d_r f1 - (i m / r) f2
            a.idx.push_back(2 * i + 1);
            a.coef.push_back(-im_over_r);
            a.rhs = vr[static_cast<std::size_t>(i) * nt + kk];
            rows.push_back(std::move(a));
            LsRow b = d_row(i, 1); // v_theta = (i m / r) f1 + d_r f2
            b.idx.push_back(2 * i + 0);
            b.coef.push_back(im_over_r);
            b.rhs = vt[static_cast<std::size_t>(i) * nt + kk];
            rows.push_back(std::move(b));
        }

        // Normal equations, half-bandwidth 4 in the interleaved ordering.
        const int p = 4;
        BandedHermitian M(n, p);
        std::vector<Complex> rhs(n, Complex(0.0, 0.0));
        double diag_max = 0.0;
        for (const LsRow& r : rows) {
            for (std::size_t a = 0; a < r.idx.size(); ++a) {
                rhs[r.idx[a]] += std::conj(r.coef[a]) * r.rhs;
                for (std::size_t b = 0; b < r.idx.size(); ++b) {
                    if (r.idx[b] < r.idx[a]) continue;
                    M.at(r.idx[a], r.idx[b]) += std::conj(r.coef[a]) * r.coef[b];
                }
            }
        }
        for (int i = 0; i < n; ++i) diag_max = std::max(diag_max, M.at(i, i).real());
        const double lambda = 1e-12 * diag_max;
        for (int i = 0; i < n; ++i) M.at(i, i) += lambda;
        M.factor();
        const std::vector<Complex> x = M.solve(rhs);

        for (int i = 0; i < nr; ++i) {
            f1m[static_cast<std::size_t>(i) * nt + kk] = x[2 * i];
            f2m[static_cast<std::size_t>(i) * nt + kk] = x[2 * i + 1];
        }
        // Polar components of the two reconstructed pieces.
        auto d_apply = [&](int i, int comp) {
            const LsRow r = d_row(i, comp);
            Complex s(0.0, 0.0);
            for (std::size_t a = 0; a < r.idx.size(); ++a) s += r.coef[a] * x[r.idx[a]];
            return s;
        };
        for (int i = 0; i < nr; ++i) {
            const double ri = j_diff.radius(i);
            const Complex im_over_r(0.0, m / ri);
            const std::size_t id = static_cast<std::size_t>(i) * nt + kk;
            g1r[id] = d_apply(i, 0);
            g1t[id] = im_over_r * x[2 * i];
            g2r[id] = -im_over_r * x[2 * i + 1];
            g2t[id] = d_apply(i, 1);
        }
    }

    fft.backward(f1m.data());
    fft.backward(f2m.data());
    fft.backward(g1r.data());
    fft.backward(g1t.data());
    fft.backward(g2r.data());
    fft.backward(g2t.data());

    HodgeResult out;
    out.f1 = ScalarGrid(nr, nt, j_diff.r0, dr);
    out.f2 = ScalarGrid(nr, nt, j_diff.r0, dr);
    double res2 = 0.0, n1 = 0.0, n2 = 0.0;
    const double dth = j_diff.dtheta;
    for (int i = 0; i < nr; ++i) {
        const double w_r = j_diff.radius(i) * dr * dth;
        for (int k = 0; k < nt; ++k) {
            const std::size_t id = static_cast<std::size_t>(i) * nt + k;
            out.f1.at(i, k) = f1m[id].real();
            out.f2.at(i, k) = f2m[id].real();
            const double th = j_diff.theta(k);
            const Vec2& w = j_diff.at(i, k);
            const double wr_in = w.x * std::cos(th) + w.y * std::sin(th);
            const double wt_in = -w.x * std::sin(th) + w.y * std::cos(th);
            const double er = wr_in - g1r[id].real() - g2r[id].real();
            const double et = wt_in - g1t[id].real() - g2t[id].real();
            res2 += (er * er + et * et) * w_r;
            n1 += (g1r[id].real() * g1r[id].real() + g1t[id].real() * g1t[id].real()) * w_r;
            n2 += (g2r[id].real() * g2r[id].real() + g2t[id].real() * g2t[id].real()) * w_r;
        }
    }
    out.residual = std::sqrt(res2);
    out.norm_grad_f1 = std::sqrt(n1);
    out.norm_grad_f2 = std::sqrt(n2);
    return out;
}

KineticReport kinetic_comparison(const std::vector<ScalarGrid>& ut_sq,
                                 const std::vector<std::vector<Vec2>>& refs,
                                 const std::vector<double>& times, double eps,
                                 double rho_star, double ode_kinetic) {
    if (ut_sq.size() != refs.size() || ut_sq.size() != times.size() || ut_sq.size() < 2)
        throw std::invalid_argument("kinetic_comparison: snapshot counts disagree");
    if (eps <= 0.0 || eps >= 1.0 || rho_star <= 0.0)
        throw std::invalid_argument("kinetic_comparison: bad eps or rho_star");
    std::vector<double> loc(times.size(), 0.0);
    for (std::size_t s = 0; s < ut_sq.size(); ++s) {
        const ScalarGrid& g = ut_sq[s];
        double acc = 0.0;
        for (int i = 0; i < g.n_r; ++i) {
            const double w_r = g.radius(i) * g.dr * g.dtheta;
            for (int k = 0; k < g.n_theta; ++k) {
                double chi = 0.0;
                for (const Vec2& a : refs[s])
                    chi += eta_cutoff(dist(g.point(i, k), a) / rho_star);
                if (chi == 0.0) continue;
                acc += chi * g.at(i, k) * w_r;
            }
        }
        loc[s] = acc;
    }
    KineticReport rep;
    rep.ode_side = ode_kinetic;
    double t_int = 0.0;
    for (std::size_t s = 1; s < times.size(); ++s)
        t_int += 0.5 * (loc[s] + loc[s - 1]) * (times[s] - times[s - 1]);
    rep.pde_side = t_int / std::abs(std::log(eps));
    rep.difference = std::abs(rep.ode_side - rep.pde_side);
    return rep;
}

StressIdentityReport stress_identity_check(const KernelContext& ctx,
                                           const VortexConfiguration& cfg,
                                           const C2TestFunction& phi, int n_grid,
                                           double tau) {
    cfg.validate();
    if (ctx.has_phi_star() || (ctx.conformal_map && !ctx.conformal_map->is_identity()))
        throw std::invalid_argument(
            "stress_identity_check: plain disk kernels only");
    if (tau <= 0.0 || n_grid < 16)
        throw std::invalid_argument("stress_identity_check: bad quadrature parameters");
    const double s = (ctx.kind == KernelKind::neumann) ? -1.0 : 1.0;

    auto current = [&](const Vec2& x) {
        // j(u*) = sum_k d_k perp-grad Phi_k with Phi_k = log|x - a_k|
        // + s log|1 - x conj(a_k)|; perp-grad Re F = (Im F', Re F').
        const Complex z = x.as_complex();
        Complex fp(0.0, 0.0);
        for (std::size_t k = 0; k < cfg.size(); ++k) {
            const Complex a = cfg.positions[k].as_complex();
            const Complex c = std::conj(a);
            fp += static_cast<double>(cfg.degrees[k]) *
                  (1.0 / (z - a) - s * c / (1.0 - z * c));
        }
        return Vec2{fp.imag(), fp.real()};
    };

    auto integrand = [&](const Vec2& pt) {
        const Vec2 j = current(pt);
        const double t11 = 0.5 * (j.x * j.x - j.y * j.y);
        return t11 * (phi.dxx(pt) - phi.dyy(pt)) + 2.0 * j.x * j.y * phi.dxy(pt);
    };

    // Hybrid quadrature: a smooth radial partition isolates each core, where
    // the integral is taken on an exactly circular polar annulus [tau, cut],
    // leaving a bounded smooth integrand for the Cartesian far field. This
    // keeps the excluded hole circular: a jagged lattice hole breaks the
    // angular cancellation of the 1/r^2 stress and dominates the error.
    double cut = 0.2;
    for (const Vec2& a : cfg.positions) cut = std::min(cut, 0.9 * (1.0 - a.norm()));
    if (cfg.size() > 1) cut = std::min(cut, 0.45 * rho_a(cfg));
    if (tau >= 0.5 * cut)
        throw std::invalid_argument("stress_identity_check: tau too large for this layout");
    auto window = [&](double r) { return eta_cutoff(2.0 * r / cut); };

    auto near_field = [&](double rin) {
        const int n_ang = 512;
        const int n_rad = std::max(200, static_cast<int>(std::ceil((cut - rin) / (cut / 600.0))));
        const double hr = (cut - rin) / n_rad;
        double acc = 0.0;
        for (const Vec2& a : cfg.positions) {
            for (int i = 0; i < n_rad; ++i) {
                const double r = rin + (i + 0.5) * hr;
                const double w = window(r);
                if (w == 0.0) continue;
                double ring = 0.0;
                for (int k = 0; k < n_ang; ++k) {
                    const double th = (k + 0.5) * 2.0 * kPi / n_ang;
                    ring += integrand({a.x + r * std::cos(th), a.y + r * std::sin(th)});
                }
                acc += ring * w * r * hr * 2.0 * kPi / n_ang;
            }
        }
        return acc;
    };

    const double R = std::min(phi.support_radius, 1.0 - 1e-9);
    const double h = 2.0 * R / n_grid;
    double far = 0.0;
    for (int p = 0; p < n_grid; ++p) {
        const double x = -R + (p + 0.5) * h;
        for (int q = 0; q < n_grid; ++q) {
            const Vec2 pt{x, -R + (q + 0.5) * h};
            if (pt.norm() >= R) continue;
            double w = 1.0;
            for (const Vec2& a : cfg.positions) w -= window(dist(pt, a));
            if (w <= 0.0) continue;
            far += integrand(pt) * w;
        }
    }
    far *= h * h;

    StressIdentityReport rep;
    const double i1 = far + near_field(tau);
    const double i2 = far + near_field(0.5 * tau);
    rep.lhs = (4.0 * i2 - i1) / 3.0; // O(tau^2) Richardson extrapolation

    const std::vector<Vec2> gw = grad_W(ctx, cfg);
    for (std::size_t k = 0; k < cfg.size(); ++k) {
        const Vec2 gphi{phi.dx(cfg.positions[k]), phi.dy(cfg.positions[k])};
        rep.rhs -= cfg.degrees[k] * gphi.dot(gw[k]) / kPi;
    }
    rep.residual = std::abs(rep.lhs - rep.rhs);
    return rep;
}

} // namespace vf
