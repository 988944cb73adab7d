#include "stm/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <sstream>
#include <thread>

#include "stm/rng.hpp"

namespace stm::discretize {

using models::ModelPoint;
using models::SpacetimeModel;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double spatial_cell(const SpacetimeModel& m, int nx) {
    double fmax = 0.0;
    // Warp maximum over the window bounds plus interior sinusoid extrema.
    for (double t : {m.t_lo, m.t_hi}) fmax = std::max(fmax, m.warp(t));
    if (m.warp.family == models::WarpFamily::sinusoidal)
        fmax = std::max(fmax, 1.0 + std::fabs(m.warp.a));
    switch (m.spatial.kind) {
        case models::SpatialKind::circle:
            return fmax * m.spatial.L1 / nx;
        case models::SpatialKind::flat_torus:
            return fmax * std::max(m.spatial.L1, m.spatial.L2) / nx;
        case models::SpatialKind::euclidean: {
            // Region models carry their own spatial extent.
            double extent = 1.0;
            switch (m.region.kind) {
                case models::RegionKind::strip: extent = 2.0 * m.region.half_extent; break;
                case models::RegionKind::past_of_point: extent = 2.0 * (m.region.t_p - m.t_lo); break;
                case models::RegionKind::past_of_ring: extent = 2.0 * (m.region.R + 3.0 * m.t_hi); break;
                case models::RegionKind::none: break;
            }
            return fmax * extent / nx;
        }
    }
    return 1.0;
}

} // namespace

double grid_spacing(const SpacetimeModel& m, int nt, int nx) {
    double lo = m.open_at_zero() ? m.t_hi / nt : m.t_lo;
    double dt = (m.t_hi - lo) / std::max(1, nt - 1);
    return std::max(dt, spatial_cell(m, nx));
}

std::vector<ModelPoint> sample_grid(const SpacetimeModel& m, int nt, int nx,
                                    std::optional<int> nx2, const SampleOptions& opts) {
    m.check();
    if (nt < 2 || nx < 2) throw argument_error("sample_grid: nt, nx must be >= 2");
    if (!(m.t_hi > m.t_lo)) throw argument_error("sample_grid: degenerate window");

    std::vector<double> ts(nt);
    double dt_cell;
    if (m.open_at_zero()) {
        // Never sample the singular slice at t = 0.
        dt_cell = m.t_hi / nt;
        for (int i = 0; i < nt; ++i) ts[i] = (i + 1) * dt_cell;
    } else {
        dt_cell = (m.t_hi - m.t_lo) / (nt - 1);
        for (int i = 0; i < nt; ++i) ts[i] = m.t_lo + i * dt_cell;
    }

    std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ull);
    auto jit = [&](double cell) {
        return opts.jitter > 0.0 ? opts.jitter * cell * (2.0 * uniform01(rng) - 1.0) : 0.0;
    };

    std::vector<ModelPoint> out;
    auto push_spatial = [&](double t) {
        ModelPoint p;
        p.t = t;
        switch (m.spatial.kind) {
            case models::SpatialKind::circle: {
                double dx = m.spatial.L1 / nx;
                for (int j = 0; j < nx; ++j) {
                    p.x = {std::fmod(j * dx + jit(dx) + m.spatial.L1, m.spatial.L1), 0, 0};
                    out.push_back(p);
                }
                break;
            }
            case models::SpatialKind::flat_torus: {
                int n2 = nx2.value_or(nx);
                double dx = m.spatial.L1 / nx, dy = m.spatial.L2 / n2;
                for (int j = 0; j < nx; ++j)
                    for (int k = 0; k < n2; ++k) {
                        p.x = {std::fmod(j * dx + jit(dx) + m.spatial.L1, m.spatial.L1),
                               std::fmod(k * dy + jit(dy) + m.spatial.L2, m.spatial.L2), 0};
                        out.push_back(p);
                    }
                break;
            }
            case models::SpatialKind::euclidean: {
                // Bounding box from the region, then containment filter.
                double lo1 = 0, hi1 = 0, lo2 = 0, hi2 = 0, lo3 = 0, hi3 = 0;
                switch (m.region.kind) {
                    case models::RegionKind::strip:
                        lo1 = -m.region.half_extent; hi1 = m.region.half_extent;
                        lo2 = lo1; hi2 = hi1; lo3 = lo1; hi3 = hi1;
                        break;
                    case models::RegionKind::past_of_point: {
                        double r = m.region.t_p - m.t_lo;
                        lo1 = m.region.x_p[0] - r; hi1 = m.region.x_p[0] + r;
                        lo2 = m.region.x_p[1] - r; hi2 = m.region.x_p[1] + r;
                        lo3 = m.region.x_p[2] - r; hi3 = m.region.x_p[2] + r;
                        break;
                    }
                    case models::RegionKind::past_of_ring: {
                        double r = m.region.R + 3.0 * m.t_hi;
                        lo1 = -r; hi1 = r; lo2 = -r; hi2 = r; lo3 = -r; hi3 = r;
                        break;
                    }
                    case models::RegionKind::none:
                        lo1 = 0; hi1 = 1; lo2 = 0; hi2 = 1; lo3 = 0; hi3 = 1;
                        break;
                }
                int d = m.spatial.dim;
                int n2 = nx2.value_or(nx);
                int counts[3] = {nx, d >= 2 ? n2 : 1, d >= 3 ? n2 : 1};
                double los[3] = {lo1, lo2, lo3}, his[3] = {hi1, hi2, hi3};
                for (int j = 0; j < counts[0]; ++j)
                    for (int k = 0; k < counts[1]; ++k)
                        for (int l = 0; l < counts[2]; ++l) {
                            int idx[3] = {j, k, l};
                            for (int c = 0; c < 3; ++c) {
                                double cell = (his[c] - los[c]) / std::max(1, counts[c] - 1);
                                p.x[c] = counts[c] == 1
                                             ? 0.0
                                             : los[c] + idx[c] * cell + jit(cell);
                            }
                            if (region_contains(m, p)) out.push_back(p);
                        }
                break;
            }
        }
    };

    for (double t0 : ts) {
        double t = t0;
        if (opts.jitter > 0.0) {
            t += jit(dt_cell);
            t = std::clamp(t, m.open_at_zero() ? dt_cell * 0.5 : m.t_lo, m.t_hi);
        }
        push_spatial(t);
    }
    return out;
}

CausalGraph build_causal_graph(const SpacetimeModel& m, const std::vector<ModelPoint>& pts,
                               double window_radius, int n_quad) {
    CausalGraph g;
    g.model = m;
    g.window_radius = window_radius;
    g.n_quad = n_quad;
    g.nodes.reserve(pts.size());
    for (const auto& p : pts) g.nodes.push_back({p, models::eval_tau(m, p)});

    const int n = int(g.nodes.size());

    // Sort node order by t for the window sweep.
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return g.nodes[a].pt.t < g.nodes[b].pt.t; });

    double fmax = 0.0;
    for (double t : {m.t_lo, m.t_hi}) fmax = std::max(fmax, m.warp(t));
    if (m.warp.family == models::WarpFamily::sinusoidal)
        fmax = std::max(fmax, 1.0 + std::fabs(m.warp.a));
    if (m.kind == models::ModelKind::minkowski_region) fmax = 1.0;
    double spatial_window = window_radius / std::max(fmax, 1e-300);

    // Candidate pairs: |dt| <= window_radius and base spatial distance within
    // spatial_window; edge q -> p iff is_causal(p, q).
    int lo_idx = 0;
    for (int oi = 0; oi < n; ++oi) {
        int p = order[oi];
        double tp = g.nodes[p].pt.t;
        while (lo_idx < oi && tp - g.nodes[order[lo_idx]].pt.t > window_radius) ++lo_idx;
        for (int oj = lo_idx; oj < oi; ++oj) {
            int q = order[oj];
            if (m.spatial.base_dist(g.nodes[p].pt.x, g.nodes[q].pt.x) > spatial_window) continue;
            if (!models::is_causal(m, g.nodes[p].pt, g.nodes[q].pt)) continue;
            g.from.push_back(q);
            g.to.push_back(p);
            g.w_null.push_back(g.nodes[p].tau - g.nodes[q].tau);
            g.w_proper.push_back(models::proper_time_segment(m, g.nodes[p].pt, g.nodes[q].pt, n_quad));
        }
        // Same-slice pairs: causal only if spatially coincident; grid nodes
        // are distinct, so nothing to add.
    }

    const int e = int(g.from.size());
    g.out_off.assign(n + 1, 0);
    g.in_off.assign(n + 1, 0);
    for (int i = 0; i < e; ++i) {
        ++g.out_off[g.from[i] + 1];
        ++g.in_off[g.to[i] + 1];
    }
    for (int i = 0; i < n; ++i) {
        g.out_off[i + 1] += g.out_off[i];
        g.in_off[i + 1] += g.in_off[i];
    }
    g.out_edge.resize(e);
    g.in_edge.resize(e);
    std::vector<int> oc(n, 0), ic(n, 0);
    for (int i = 0; i < e; ++i) {
        g.out_edge[g.out_off[g.from[i]] + oc[g.from[i]]++] = i;
        g.in_edge[g.in_off[g.to[i]] + ic[g.to[i]]++] = i;
    }
    return g;
}

namespace {

// Dijkstra over the undirected causal edge set, optionally masked to a node
// subset (mask empty = all nodes allowed).
std::vector<double> dijkstra(const CausalGraph& g, int source, const std::vector<uint8_t>& mask) {
    const int n = int(g.node_count());
    std::vector<double> dist(n, kInf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist[source] = 0.0;
    heap.push({0.0, source});
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (int k = g.out_off[u]; k < g.out_off[u + 1]; ++k) {
            int e = g.out_edge[k];
            int v = g.to[e];
            if (!mask.empty() && !mask[v]) continue;
            double nd = d + g.w_null[e];
            if (nd < dist[v]) {
                dist[v] = nd;
                heap.push({nd, v});
            }
        }
        for (int k = g.in_off[u]; k < g.in_off[u + 1]; ++k) {
            int e = g.in_edge[k];
            int v = g.from[e];
            if (!mask.empty() && !mask[v]) continue;
            double nd = d + g.w_null[e];
            if (nd < dist[v]) {
                dist[v] = nd;
                heap.push({nd, v});
            }
        }
    }
    return dist;
}

std::string node_label(const CausalGraph& g, int i) {
    std::ostringstream os;
    const auto& p = g.nodes[i].pt;
    os << "n" << i << "(t=" << p.t;
    for (int c = 0; c < g.model.spatial.coord_count(); ++c) os << ",x" << c << "=" << p.x[c];
    os << ")";
    return os.str();
}

TimedMetricSpace matrix_from_sources(const CausalGraph& g, const std::vector<int>& keep,
                                     const std::vector<uint8_t>& mask, int threads,
                                     const char* who) {
    const int m = int(keep.size());
    TimedMetricSpace out;
    out.ids.reserve(m);
    out.tau.reserve(m);
    for (int i : keep) {
        out.ids.push_back(node_label(g, i));
        out.tau.push_back(g.nodes[i].tau);
    }
    out.dist.assign(std::size_t(m) * m, 0.0);

    std::vector<int> pos(g.node_count(), -1);
    for (int a = 0; a < m; ++a) pos[keep[a]] = a;

    auto run = [&](int a_begin, int a_end) {
        for (int a = a_begin; a < a_end; ++a) {
            auto dist = dijkstra(g, keep[a], mask);
            for (int b = 0; b < m; ++b) out.dist[std::size_t(a) * m + b] = dist[keep[b]];
        }
    };
    if (threads <= 1 || m < 4) {
        run(0, m);
    } else {
        int tcount = std::min<int>(threads, m);
        std::vector<std::thread> pool;
        int chunk = (m + tcount - 1) / tcount;
        for (int t = 0; t < tcount; ++t)
            pool.emplace_back(run, t * chunk, std::min(m, (t + 1) * chunk));
        for (auto& th : pool) th.join();
    }

    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            if (std::isinf(out.dist[std::size_t(a) * m + b]))
                throw disconnected_error(std::string(who) + ": graph disconnected, witness pair " +
                                         out.ids[a] + " / " + out.ids[b]);
    // Symmetrize the float jitter from per-source heaps.
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) {
            double v = std::min(out.dist[std::size_t(a) * m + b], out.dist[std::size_t(b) * m + a]);
            out.dist[std::size_t(a) * m + b] = v;
            out.dist[std::size_t(b) * m + a] = v;
        }
    return out;
}

} // namespace

std::vector<double> null_distance_from(const CausalGraph& g, int source) {
    return dijkstra(g, source, {});
}

TimedMetricSpace null_distance_matrix(const CausalGraph& g, int threads) {
    std::vector<int> keep(g.node_count());
    for (std::size_t i = 0; i < g.node_count(); ++i) keep[i] = int(i);
    auto out = matrix_from_sources(g, keep, {}, threads, "null_distance_matrix");
    out.meta["source"] = "null_distance_matrix";
    out.meta["window_radius"] = std::to_string(g.window_radius);
    if (g.model.region.kind == models::RegionKind::past_of_ring)
        out.meta["region_causality"] = "segment sampled at 32 interior points (non-convex region)";
    return out;
}

std::vector<double> cosmological_time(const CausalGraph& g) {
    const int n = int(g.node_count());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (g.nodes[a].tau != g.nodes[b].tau) return g.nodes[a].tau < g.nodes[b].tau;
        return a < b;
    });
    std::vector<double> tau_hat(n, 0.0);
    for (int u : order) {
        double best = 0.0;
        for (int k = g.in_off[u]; k < g.in_off[u + 1]; ++k) {
            int e = g.in_edge[k];
            if (g.nodes[g.from[e]].tau >= g.nodes[u].tau)
                throw error("cosmological_time: causal edge without tau increase (cycle?)");
            best = std::max(best, tau_hat[g.from[e]] + g.w_proper[e]);
        }
        tau_hat[u] = best;
    }
    return tau_hat;
}

std::vector<int> generator_chain(const CausalGraph& g, const std::vector<double>& tau_hat,
                                 int node) {
    std::vector<int> chain{node};
    int u = node;
    while (true) {
        int best_edge = -1;
        double best_spatial = kInf;
        for (int k = g.in_off[u]; k < g.in_off[u + 1]; ++k) {
            int e = g.in_edge[k];
            int q = g.from[e];
            if (std::fabs(tau_hat[q] + g.w_proper[e] - tau_hat[u]) > 1e-12) continue;
            double sp = g.model.spatial.base_dist(g.nodes[u].pt.x, g.nodes[q].pt.x);
            if (best_edge < 0 || sp < best_spatial - 1e-15 ||
                (std::fabs(sp - best_spatial) <= 1e-15 && q < g.from[best_edge])) {
                best_edge = e;
                best_spatial = sp;
            }
        }
        if (best_edge < 0) break;
        u = g.from[best_edge];
        chain.push_back(u);
    }
    return chain;
}

std::vector<int> strip_nodes(const CausalGraph& g, double s, double t) {
    if (s > t) throw argument_error("strip: requires s <= t");
    std::vector<int> keep;
    for (std::size_t i = 0; i < g.node_count(); ++i)
        if (g.nodes[i].tau >= s - 1e-12 && g.nodes[i].tau <= t + 1e-12) keep.push_back(int(i));
    if (keep.empty()) throw precondition_error("strip: empty strip");
    return keep;
}

TimedMetricSpace strip_null_distance(const CausalGraph& g, double s, double t, int threads) {
    auto keep = strip_nodes(g, s, t);
    std::vector<uint8_t> mask(g.node_count(), 0);
    for (int i : keep) mask[i] = 1;
    auto out = matrix_from_sources(g, keep, mask, threads, "strip_null_distance");
    for (auto& v : out.tau) v -= s;
    out.meta["source"] = "strip_null_distance";
    out.meta["strip_shift"] = std::to_string(s);
    return out;
}

std::vector<double> strip_null_distance_from(const CausalGraph& g, double s, double t,
                                             int source_in_strip) {
    auto keep = strip_nodes(g, s, t);
    std::vector<uint8_t> mask(g.node_count(), 0);
    for (int i : keep) mask[i] = 1;
    if (!mask[source_in_strip])
        throw argument_error("strip_null_distance_from: source outside strip");
    return dijkstra(g, source_in_strip, mask);
}

TimedMetricSpace augment_big_bang(const TimedMetricSpace& space, double guard_frac, double tol) {
    require_valid(space, tol, "augment_big_bang");
    if (space.empty()) {
        throw precondition_error("augment_big_bang: empty space");
    }
    // Heuristic guard: the bottom level must be small relative to the space.
    double tmin = space.tau_min();
    double diam = space.diameter();
    double level_diam = 0.0;
    std::vector<std::size_t> bottom;
    double band = std::max(tol, 0.05 * (space.tau_max() - tmin));
    for (std::size_t i = 0; i < space.size(); ++i)
        if (space.tau[i] <= tmin + band) bottom.push_back(i);
    for (std::size_t a = 0; a < bottom.size(); ++a)
        for (std::size_t b = a + 1; b < bottom.size(); ++b)
            level_diam = std::max(level_diam, space.d(bottom[a], bottom[b]));
    if (space.size() > 1 && level_diam > guard_frac * diam) {
        std::ostringstream os;
        os << "augment_big_bang: input not big-bang-like: bottom-level diameter " << level_diam
           << " exceeds " << guard_frac << " x space diameter " << diam;
        throw precondition_error(os.str());
    }

    const std::size_t n = space.size();
    TimedMetricSpace out;
    out.ids = space.ids;
    out.ids.push_back("p_BB");
    out.tau = space.tau;
    out.tau.push_back(0.0);
    out.dist.assign((n + 1) * (n + 1), 0.0);
    // Gluing the bang point opens chains through it: x -> p_BB -> y costs
    // tau(x) + tau(y).  A truncated grid cannot dip below its lowest slice,
    // so near-bottom pairs can overestimate the true distance; the one-vertex
    // shortest-path closure restores the metric (and matches the space where
    // curves may pass arbitrarily close to the bang).  The basepoint rows are
    // unaffected: d(x,y) + tau(y) >= tau(x) by Lipschitz.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.dist[i * (n + 1) + j] = std::min(space.d(i, j), space.tau[i] + space.tau[j]);
    for (std::size_t i = 0; i < n; ++i) out.dist[i * (n + 1) + i] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.dist[i * (n + 1) + n] = space.tau[i];
        out.dist[n * (n + 1) + i] = space.tau[i];
    }
    out.basepoint = "p_BB";
    out.meta = space.meta;
    out.meta["bigbang_level_diam"] = std::to_string(level_diam);

    auto rep = validate(out, tol);
    if (!rep.ok())
        throw precondition_error("augment_big_bang: augmented space invalid: " + rep.summary());
    return out;
}

TimedMetricSpace mark_initial_set(const TimedMetricSpace& space, double tol) {
    require_valid(space, std::max(tol, 1e-9), "mark_initial_set");
    TimedMetricSpace out = space;
    out.initial_set.clear();
    std::vector<std::size_t> init;
    for (std::size_t i = 0; i < space.size(); ++i)
        if (space.tau[i] <= tol) {
            out.initial_set.push_back(space.ids[i]);
            init.push_back(i);
        }
    if (init.empty()) throw precondition_error("mark_initial_set: no points with tau <= tol");
    double worst = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i) {
        double best = kInf;
        for (std::size_t q : init) best = std::min(best, space.d(i, q));
        worst = std::max(worst, std::fabs(space.tau[i] - best));
    }
    out.meta["initial_set_residual"] = std::to_string(worst);
    return out;
}

std::vector<uint8_t> causal_reachability(const CausalGraph& g, int source) {
    std::vector<uint8_t> seen(g.node_count(), 0);
    std::vector<int> stack{source};
    seen[source] = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int k = g.out_off[u]; k < g.out_off[u + 1]; ++k) {
            int v = g.to[g.out_edge[k]];
            if (!seen[v]) {
                seen[v] = 1;
                stack.push_back(v);
            }
        }
    }
    return seen;
}

} // namespace stm::discretize
