#include "vortexflow/transport_metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <unordered_map>
#include <stdexcept>

namespace vf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassTol = 1e-12;

double boundary_dist(const Vec2& p) { return std::max(0.0, 1.0 - p.norm()); }

/// Successive-shortest-path min-cost flow with real-valued capacities and
/// nonnegative costs (Dijkstra with Johnson potentials).
class MinCostFlow {
public:
    explicit MinCostFlow(int n) : head_(n, -1), potential_(n, 0.0) {}

    void add_edge(int a, int b, double cap, double cost) {
        edges_.push_back({b, head_[a], cap, cost});
        head_[a] = static_cast<int>(edges_.size()) - 1;
        edges_.push_back({a, head_[b], 0.0, -cost});
        head_[b] = static_cast<int>(edges_.size()) - 1;
    }

    /// Pushes flow from s to t until no augmenting path remains; returns
    /// (flow, cost).
    std::pair<double, double> run(int s, int t) {
        double flow = 0.0, cost = 0.0;
        const int n = static_cast<int>(head_.size());
        std::vector<double> dist(n);
        std::vector<int> prev_edge(n);
        using Item = std::pair<double, int>;
        for (;;) {
            std::fill(dist.begin(), dist.end(), kInf);
            std::fill(prev_edge.begin(), prev_edge.end(), -1);
            dist[s] = 0.0;
            std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
            pq.push({0.0, s});
            while (!pq.empty()) {
                auto [d, v] = pq.top();
                pq.pop();
                if (d > dist[v]) continue;
                for (int e = head_[v]; e != -1; e = edges_[e].next) {
                    if (edges_[e].cap <= kMassTol) continue;
                    int w = edges_[e].to;
                    double nd = d + edges_[e].cost + potential_[v] - potential_[w];
                    if (nd < dist[w] - 1e-15) {
                        dist[w] = nd;
                        prev_edge[w] = e;
                        pq.push({nd, w});
                    }
                }
            }
            if (prev_edge[t] == -1) break;
            for (int v = 0; v < n; ++v)
                if (dist[v] < kInf) potential_[v] += dist[v];
            double push = kInf;
            for (int v = t; v != s; v = edges_[prev_edge[v] ^ 1].to)
                push = std::min(push, edges_[prev_edge[v]].cap);
            for (int v = t; v != s; v = edges_[prev_edge[v] ^ 1].to) {
                Edge& e = edges_[prev_edge[v]];
                e.cap -= push;
                edges_[prev_edge[v] ^ 1].cap += push;
                cost += push * e.cost;
            }
            flow += push;
        }
        return {flow, cost};
    }

private:
    struct Edge {
        int to;
        int next;
        double cap;
        double cost;
    };
    std::vector<Edge> edges_;
    std::vector<int> head_;
    std::vector<double> potential_;
};

/// Splits mu - nu into positive atoms (sources) and negative atoms (sinks,
/// weights stored positive).
void split_difference(const AtomicSignedMeasure& mu, const AtomicSignedMeasure& nu,
                      std::vector<Vec2>& src_p, std::vector<double>& src_w,
                      std::vector<Vec2>& snk_p, std::vector<double>& snk_w) {
    auto take = [&](const Vec2& p, double w) {
        if (w > kMassTol) {
            src_p.push_back(p);
            src_w.push_back(w);
        } else if (w < -kMassTol) {
            snk_p.push_back(p);
            snk_w.push_back(-w);
        }
    };
    for (std::size_t i = 0; i < mu.size(); ++i) take(mu.points[i], mu.weights[i]);
    for (std::size_t i = 0; i < nu.size(); ++i) take(nu.points[i], -nu.weights[i]);
}

} // namespace

void AtomicSignedMeasure::add(const Vec2& p, double w) {
    if (w == 0.0) throw std::invalid_argument("AtomicSignedMeasure: zero weight");
    points.push_back(p);
    weights.push_back(w);
}

double AtomicSignedMeasure::total() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

double w_minus_one_one(const AtomicSignedMeasure& mu, const AtomicSignedMeasure& nu) {
    std::vector<Vec2> sp, tp;
    std::vector<double> sw, tw;
    split_difference(mu, nu, sp, sw, tp, tw);
    const int m = static_cast<int>(sp.size()), n = static_cast<int>(tp.size());
    if (m == 0 && n == 0) return 0.0;
    double supply = 0.0, demand = 0.0;
    for (double w : sw) supply += w;
    for (double w : tw) demand += w;

    // nodes: 0 = S, 1 = T, 2 = boundary, 3.. sources, 3+m.. sinks
    MinCostFlow g(3 + m + n);
    g.add_edge(0, 2, demand, 0.0);
    g.add_edge(2, 1, supply, 0.0);
    for (int i = 0; i < m; ++i) {
        g.add_edge(0, 3 + i, sw[i], 0.0);
        g.add_edge(3 + i, 2, kInf, boundary_dist(sp[i]));
        for (int j = 0; j < n; ++j)
            g.add_edge(3 + i, 3 + m + j, kInf, dist(sp[i], tp[j]));
    }
    for (int j = 0; j < n; ++j) {
        g.add_edge(3 + m + j, 1, tw[j], 0.0);
        g.add_edge(2, 3 + m + j, kInf, boundary_dist(tp[j]));
    }
    auto [flow, cost] = g.run(0, 1);
    if (flow < supply + demand - 1e-9)
        throw std::runtime_error("w_minus_one_one: transport network infeasible");
    return cost;
}

AtomicSignedMeasure atomize(const ScalarGrid& g, double cutoff) {
    AtomicSignedMeasure out;
    for (int i = 0; i < g.n_r; ++i)
        for (int k = 0; k < g.n_theta; ++k) {
            double mass = g.at(i, k) * g.radius(i) * g.dr * g.dtheta;
            if (std::abs(mass) >= cutoff) out.add(g.point(i, k), mass);
        }
    return out;
}

namespace {

struct ExhaustiveState {
    const std::vector<Vec2>* sp;
    const std::vector<Vec2>* tp;
    std::vector<double> sw;
    std::vector<double> tw;
    double best = kInf;
    // Transposition table: best accumulated cost seen for each vector of
    // remaining masses, so permuted move orders are explored once.
    std::unordered_map<std::string, double> seen;

    bool revisit(double cost) {
        std::string key;
        key.reserve(8 * (sw.size() + tw.size()));
        auto push = [&key](double w) {
            long long q = llround(w * 1e10);
            key.append(reinterpret_cast<const char*>(&q), sizeof q);
        };
        for (double w : sw) push(w);
        for (double w : tw) push(w);
        auto [it, fresh] = seen.try_emplace(std::move(key), cost);
        if (!fresh && cost >= it->second - 1e-15) return true;
        it->second = std::min(it->second, cost);
        return false;
    }

    // Admissible lower bound on the remaining cost: every open source unit
    // must travel at least to its cheapest destination (any open sink or
    // the wall), and symmetrically every open sink unit must be fed from
    // its cheapest origin; the larger of the two sums is a valid bound.
    double remaining_bound() const {
        double src_side = 0.0, snk_side = 0.0;
        for (std::size_t i = 0; i < sw.size(); ++i) {
            if (sw[i] <= kMassTol) continue;
            double c = boundary_dist((*sp)[i]);
            for (std::size_t j = 0; j < tw.size(); ++j)
                if (tw[j] > kMassTol) c = std::min(c, dist((*sp)[i], (*tp)[j]));
            src_side += sw[i] * c;
        }
        for (std::size_t j = 0; j < tw.size(); ++j) {
            if (tw[j] <= kMassTol) continue;
            double c = boundary_dist((*tp)[j]);
            for (std::size_t i = 0; i < sw.size(); ++i)
                if (sw[i] > kMassTol) c = std::min(c, dist((*sp)[i], (*tp)[j]));
            snk_side += tw[j] * c;
        }
        return std::max(src_side, snk_side);
    }

    // Every optimal plan has a forest support, so its shipments can be
    // ordered leaf-first: each ships min(open supply, open demand) and
    // saturates one endpoint. Branching over every (source, sink or wall)
    // pair at each step enumerates all such orders; the incumbent plus the
    // admissible bound prunes.
    void search(double cost) {
        if (cost + remaining_bound() >= best - 1e-15) return;
        if (revisit(cost)) return;
        // moves: (unit cost, source, sink or -1 for the wall), cheapest first
        std::vector<std::tuple<double, int, int>> moves;
        for (std::size_t i = 0; i < sw.size(); ++i) {
            if (sw[i] <= kMassTol) continue;
            moves.emplace_back(boundary_dist((*sp)[i]), static_cast<int>(i), -1);
            for (std::size_t j = 0; j < tw.size(); ++j)
                if (tw[j] > kMassTol)
                    moves.emplace_back(dist((*sp)[i], (*tp)[j]), static_cast<int>(i),
                                       static_cast<int>(j));
        }
        std::sort(moves.begin(), moves.end());
        for (const auto& [c, i, j] : moves) {
            double q = j < 0 ? sw[i] : std::min(sw[i], tw[j]);
            sw[i] -= q;
            if (j >= 0) tw[j] -= q;
            search(cost + q * c);
            sw[i] += q;
            if (j >= 0) tw[j] += q;
        }
        if (moves.empty()) {
            for (std::size_t j = 0; j < tw.size(); ++j)
                if (tw[j] > kMassTol) cost += tw[j] * boundary_dist((*tp)[j]);
            best = std::min(best, cost);
        }
    }

    // Greedy incumbent (cheapest open route first) to seed the pruning.
    void seed() {
        std::vector<double> s = sw, t = tw;
        double cost = 0.0;
        for (;;) {
            int bi = -1, bj = -1;
            double bc = kInf;
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (s[i] <= kMassTol) continue;
                if (boundary_dist((*sp)[i]) < bc) {
                    bc = boundary_dist((*sp)[i]);
                    bi = static_cast<int>(i);
                    bj = -1;
                }
                for (std::size_t j = 0; j < t.size(); ++j) {
                    if (t[j] <= kMassTol) continue;
                    double c = dist((*sp)[i], (*tp)[j]);
                    if (c < bc) {
                        bc = c;
                        bi = static_cast<int>(i);
                        bj = static_cast<int>(j);
                    }
                }
            }
            if (bi < 0) break;
            if (bj < 0) {
                cost += s[bi] * bc;
                s[bi] = 0.0;
            } else {
                double q = std::min(s[bi], t[bj]);
                cost += q * bc;
                s[bi] -= q;
                t[bj] -= q;
            }
        }
        for (std::size_t j = 0; j < t.size(); ++j)
            if (t[j] > kMassTol) cost += t[j] * boundary_dist((*tp)[j]);
        best = cost;
    }
};

} // namespace

double w_minus_one_one_exhaustive(const AtomicSignedMeasure& mu,
                                  const AtomicSignedMeasure& nu) {
    std::vector<Vec2> sp, tp;
    ExhaustiveState st;
    split_difference(mu, nu, sp, st.sw, tp, st.tw);
    st.sp = &sp;
    st.tp = &tp;
    st.seed();
    st.search(0.0);
    return st.best;
}

double w_minus_one_one_grid_dual(const AtomicSignedMeasure& mu,
                                 const AtomicSignedMeasure& nu, int n) {
    std::vector<Vec2> sp, tp;
    std::vector<double> sw, tw;
    split_difference(mu, nu, sp, sw, tp, tw);
    if (sp.empty() && tp.empty()) return 0.0;

    double h = 2.0 / n;
    auto node_pos = [&](int i, int j) {
        return Vec2{-1.0 + (i + 0.5) * h, -1.0 + (j + 0.5) * h};
    };
    auto inside = [&](int i, int j) {
        return i >= 0 && j >= 0 && i < n && j < n && node_pos(i, j).norm() < 1.0;
    };
    // nodes: 0 = S, 1 = T, 2 = boundary (phi = 0), 3.. lattice
    auto id = [&](int i, int j) { return 3 + i * n + j; };
    MinCostFlow g(3 + n * n);

    // 16-neighborhood (rook/diagonal/knight) keeps the graph-metric stretch
    // over Euclidean lengths under 3%
    const int moves[8][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1},
                             {2, 1}, {1, 2}, {2, -1}, {1, -2}};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (!inside(i, j)) continue;
            for (const auto& mv : moves) {
                int i2 = i + mv[0], j2 = j + mv[1];
                double len = h * std::hypot(mv[0], mv[1]);
                int to = inside(i2, j2) ? id(i2, j2)
                         : (i2 >= 0 && j2 >= 0 && i2 < n && j2 < n) ? 2
                                                                    : -1;
                if (to < 0) continue;
                g.add_edge(id(i, j), to, kInf, len);
                g.add_edge(to, id(i, j), kInf, len);
            }
        }
    auto snap = [&](const Vec2& p) {
        int i = std::clamp(static_cast<int>(std::floor((p.x + 1.0) / h)), 0, n - 1);
        int j = std::clamp(static_cast<int>(std::floor((p.y + 1.0) / h)), 0, n - 1);
        if (!inside(i, j)) throw std::invalid_argument("grid dual: atom snaps outside");
        return id(i, j);
    };
    double supply = 0.0, demand = 0.0;
    for (std::size_t k = 0; k < sp.size(); ++k) {
        g.add_edge(0, snap(sp[k]), sw[k], 0.0);
        supply += sw[k];
    }
    for (std::size_t k = 0; k < tp.size(); ++k) {
        g.add_edge(snap(tp[k]), 1, tw[k], 0.0);
        demand += tw[k];
    }
    g.add_edge(0, 2, demand, 0.0);
    g.add_edge(2, 1, supply, 0.0);
    auto [flow, cost] = g.run(0, 1);
    if (flow < supply + demand - 1e-9)
        throw std::runtime_error("grid dual: transport network infeasible");
    return cost;
}

} // namespace vf
