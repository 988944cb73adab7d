#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "stm/discretize.hpp"
#include "stm/rng.hpp"

using namespace stm;
using namespace stm::models;
using namespace stm::discretize;

namespace {

constexpr double kPi = 3.14159265358979323846;

SpacetimeModel const_circle(double lo = 0, double hi = 1, double L = 2 * kPi) {
    SpacetimeModel m;
    m.kind = ModelKind::warped_product;
    m.spatial.kind = SpatialKind::circle;
    m.spatial.L1 = L;
    m.warp.family = WarpFamily::constant;
    m.warp.c = 1.0;
    m.t_lo = lo;
    m.t_hi = hi;
    return m;
}

SpacetimeModel linear_circle(double lo, double hi) {
    SpacetimeModel m = const_circle(lo, hi);
    m.warp.family = WarpFamily::linear;
    return m;
}

CausalGraph grid_graph(const SpacetimeModel& m, int nt, int nx, double cells = 4.0,
                       int n_quad = 16) {
    auto pts = sample_grid(m, nt, nx);
    return build_causal_graph(m, pts, cells * grid_spacing(m, nt, nx), n_quad);
}

int nearest_node(const CausalGraph& g, double t, double theta) {
    int best = 0;
    double bd = 1e300;
    for (int i = 0; i < int(g.node_count()); ++i) {
        double d = std::fabs(g.nodes[i].pt.t - t) + std::fabs(g.nodes[i].pt.x[0] - theta);
        if (d < bd) { bd = d; best = i; }
    }
    return best;
}

} // namespace

TEST_CASE("sample_grid counts and open-at-zero handling") {
    CHECK(sample_grid(const_circle(), 4, 4).size() == 16);

    // open-at-0 big-bang window: lowest slice at t_hi / nt
    auto lin = linear_circle(0.0, 1.0);
    auto pts = sample_grid(lin, 8, 4);
    double tmin = 1e300;
    for (const auto& p : pts) tmin = std::min(tmin, p.t);
    CHECK(tmin == doctest::Approx(1.0 / 8));

    // cone filter keeps strictly fewer nodes than the full grid
    SpacetimeModel mk;
    mk.kind = ModelKind::minkowski_region;
    mk.spatial.kind = SpatialKind::euclidean;
    mk.spatial.dim = 1;
    mk.t_lo = 0.2;
    mk.t_hi = 0.9;
    mk.region.kind = RegionKind::past_of_point;
    mk.region.t_p = 1.0;
    CHECK(sample_grid(mk, 8, 8).size() < 64);

    CHECK_THROWS_AS(sample_grid(const_circle(), 1, 4), argument_error);
}

TEST_CASE("build_causal_graph edge structure and weights") {
    auto m = const_circle();
    auto g = grid_graph(m, 5, 4);
    REQUIRE(g.edge_count() > 0);
    // comoving one-slice edges carry null = proper = dt
    bool saw_comoving = false, saw_null_segment = false;
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        const auto& a = g.nodes[g.from[e]];
        const auto& b = g.nodes[g.to[e]];
        CHECK(is_causal(m, b.pt, a.pt));
        CHECK(g.w_null[e] >= g.w_proper[e] - 1e-12);
        CHECK(g.w_proper[e] >= 0.0);
        if (m.spatial.base_dist(a.pt.x, b.pt.x) < 1e-12 &&
            std::fabs(g.w_null[e] - 0.25) < 1e-12) {
            saw_comoving = true;
            CHECK(g.w_proper[e] == doctest::Approx(0.25));
        }
        double sp = m.spatial.base_dist(a.pt.x, b.pt.x);
        if (std::fabs(sp - g.w_null[e]) < 1e-9 && sp > 0) {
            saw_null_segment = true;
            CHECK(g.w_proper[e] == doctest::Approx(0.0).epsilon(1e-6));
        }
    }
    CHECK(saw_comoving);
    (void)saw_null_segment;  // depends on the grid aspect; weights checked above
}

TEST_CASE("null_distance_matrix: product formula and causal exactness") {
    auto m = const_circle();
    auto g = grid_graph(m, 33, 32);
    auto space = null_distance_matrix(g);
    REQUIRE(validate(space, 1e-6).ok());

    int a = nearest_node(g, 0.2, 0.0);
    int b = nearest_node(g, 0.7, kPi / 2);
    double expect = std::max(std::fabs(g.nodes[a].pt.t - g.nodes[b].pt.t),
                             m.spatial.base_dist(g.nodes[a].pt.x, g.nodes[b].pt.x));
    CHECK(std::fabs(space.d(a, b) - expect) <= 0.12);

    // graph-causal pairs are exact: null weights telescope
    auto reach = causal_reachability(g, a);
    for (int v = 0; v < int(g.node_count()); ++v)
        if (reach[v] && v != a)
            CHECK(space.d(a, v) == doctest::Approx(g.nodes[v].tau - g.nodes[a].tau).epsilon(1e-12));
}

TEST_CASE("null_distance_matrix: disconnected graph names a witness") {
    auto m = const_circle();
    auto pts = sample_grid(m, 4, 4);
    auto g = build_causal_graph(m, pts, 1e-6);  // window too small for any edge
    CHECK_THROWS_AS(null_distance_matrix(g), disconnected_error);
}

TEST_CASE("single-hop sufficiency: alternating chains vs shortest path") {
    // 12-node const-warp grid with every causal pair as an edge; the
    // enumerated minimum over alternating chains (up to 6 segments) must
    // match the single-edge shortest path.
    auto m = const_circle(0, 1, 4.0);
    auto pts = sample_grid(m, 3, 4);
    auto g = build_causal_graph(m, pts, 10.0);
    const int n = int(g.node_count());
    REQUIRE(n == 12);

    std::vector<std::vector<double>> dij(n);
    for (int s = 0; s < n; ++s) dij[s] = null_distance_from(g, s);

    auto causal = [&](int p, int q) { return is_causal(m, g.nodes[p].pt, g.nodes[q].pt); };
    auto tau = [&](int i) { return g.nodes[i].tau; };

    // chains p0 >= p1 <= p2 >= p3 ... alternating, up to 6 segments
    for (int p = 0; p < n; ++p) {
        std::vector<double> best(n, 1e300);
        // state: (endpoint, parity) where parity 0 means next step goes down
        std::vector<std::vector<double>> cost(2, std::vector<double>(n, 1e300));
        cost[0][p] = 0.0;
        for (int seg = 0; seg < 6; ++seg) {
            std::vector<std::vector<double>> next(2, std::vector<double>(n, 1e300));
            for (int par = 0; par < 2; ++par)
                for (int u = 0; u < n; ++u) {
                    if (cost[par][u] >= 1e300) continue;
                    best[u] = std::min(best[u], cost[par][u]);
                    for (int v = 0; v < n; ++v) {
                        bool ok = par == 0 ? causal(u, v) : causal(v, u);
                        if (!ok) continue;
                        double c = cost[par][u] + std::fabs(tau(u) - tau(v));
                        next[1 - par][v] = std::min(next[1 - par][v], c);
                    }
                }
            cost = std::move(next);
        }
        for (int par = 0; par < 2; ++par)
            for (int u = 0; u < n; ++u) best[u] = std::min(best[u], cost[par][u]);
        for (int q = 0; q < n; ++q) {
            CHECK(dij[p][q] <= best[q] + 1e-12);
            CHECK(best[q] <= dij[p][q] + 1e-9);
        }
    }
}

TEST_CASE("refinement keeps persisting-pair distances stable") {
    auto m = const_circle();
    auto gc = grid_graph(m, 9, 8);
    auto gf = grid_graph(m, 17, 16);
    auto dc = null_distance_matrix(gc);
    auto df = null_distance_matrix(gf);

    std::map<std::pair<long, long>, int> fine_index;
    auto key = [](const ModelPoint& p) {
        return std::make_pair(std::lround(p.t * 1e9), std::lround(p.x[0] * 1e9));
    };
    for (int i = 0; i < int(gf.node_count()); ++i) fine_index[key(gf.nodes[i].pt)] = i;

    double slack = 2.0 * grid_spacing(m, 17, 16);
    int shared = 0;
    for (int i = 0; i < int(gc.node_count()); ++i) {
        auto it = fine_index.find(key(gc.nodes[i].pt));
        if (it == fine_index.end()) continue;
        for (int j = 0; j < int(gc.node_count()); ++j) {
            auto jt = fine_index.find(key(gc.nodes[j].pt));
            if (jt == fine_index.end()) continue;
            ++shared;
            CHECK(df.d(it->second, jt->second) <= dc.d(i, j) + slack);
        }
    }
    CHECK(shared > 0);
}

TEST_CASE("cosmological_time: comoving exactness and under-approximation") {
    for (auto m : {const_circle(), linear_circle(0.05, 1.3)}) {
        auto g = grid_graph(m, 17, 16);
        auto tau_hat = cosmological_time(g);
        for (int i = 0; i < int(g.node_count()); ++i) {
            CHECK(tau_hat[i] <= g.nodes[i].tau + 1e-9);
            // comoving chains reproduce tau exactly on these grids
            CHECK(tau_hat[i] == doctest::Approx(g.nodes[i].tau).epsilon(1e-9));
        }
    }
}

TEST_CASE("cosmological_time error decreases under refinement") {
    // warp with curvature so straight segments genuinely under-estimate
    SpacetimeModel m = const_circle();
    m.warp.family = WarpFamily::sinusoidal;
    m.warp.a = 0.5;
    m.warp.omega = 2 * kPi;
    std::vector<double> errs;
    for (int res : {8, 16, 32}) {
        auto g = grid_graph(m, res + 1, res);
        auto tau_hat = cosmological_time(g);
        double err = 0.0;
        for (int i = 0; i < int(g.node_count()); ++i) {
            CHECK(tau_hat[i] <= g.nodes[i].tau + 1e-9);
            err = std::max(err, g.nodes[i].tau - tau_hat[i]);
        }
        errs.push_back(err);
    }
    CHECK(errs[1] <= errs[0] + 1e-12);
    CHECK(errs[2] <= errs[1] + 1e-12);
}

TEST_CASE("generator chains: comoving columns, decrements match edge weights") {
    auto m = const_circle();
    auto g = grid_graph(m, 9, 8);
    auto tau_hat = cosmological_time(g);
    int top = nearest_node(g, 1.0, 0.0);
    auto chain = generator_chain(g, tau_hat, top);
    REQUIRE(chain.size() > 1);
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
        CHECK(g.nodes[chain[k]].pt.x[0] == doctest::Approx(g.nodes[top].pt.x[0]));
        CHECK(tau_hat[chain[k]] >= tau_hat[chain[k + 1]] - 1e-12);
    }
    CHECK(tau_hat[chain.back()] == doctest::Approx(0.0));
    // total chain proper time equals tau_hat at the start
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < chain.size(); ++k)
        total += tau_hat[chain[k]] - tau_hat[chain[k + 1]];
    CHECK(total == doctest::Approx(tau_hat[top]));

    int bottom = nearest_node(g, 0.0, 0.0);
    CHECK(generator_chain(g, tau_hat, bottom).size() == 1);
}

TEST_CASE("strip_null_distance dominates ambient restriction, equality on causal pairs") {
    auto m = linear_circle(0.05, 1.3);
    auto g = grid_graph(m, 49, 48);
    auto ambient = null_distance_matrix(g);
    double s = 0.45, t = 1.10;  // node-tau units
    auto strip = strip_null_distance(g, s, t);
    auto keep = strip_nodes(g, s, t);
    REQUIRE(strip.size() == keep.size());

    for (std::size_t a = 0; a < keep.size(); ++a)
        for (std::size_t b = 0; b < keep.size(); ++b)
            CHECK(strip.d(a, b) >= ambient.d(keep[a], keep[b]) - 1e-12);

    // causal pairs inside the strip: distance is exactly the tau difference
    auto reach = causal_reachability(g, keep[0]);
    for (std::size_t b = 0; b < keep.size(); ++b)
        if (reach[keep[b]])
            CHECK(strip.d(0, b) ==
                  doctest::Approx(g.nodes[keep[b]].tau - g.nodes[keep[0]].tau).epsilon(1e-9));

    // full-range strip reproduces the ambient matrix
    auto whole = strip_null_distance(g, ambient.tau_min(), ambient.tau_max());
    REQUIRE(whole.size() == ambient.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < whole.dist.size(); ++i)
        worst = std::max(worst, std::fabs(whole.dist[i] - ambient.dist[i]));
    CHECK(worst <= 1e-12);
}

TEST_CASE("augment_big_bang on a shrinking-level grid") {
    auto m = linear_circle(0.0, 1.0);
    auto g = grid_graph(m, 12, 12);
    auto space = null_distance_matrix(g);
    auto bb = augment_big_bang(space, 0.5, 1e-6);
    REQUIRE(bb.basepoint);
    std::size_t b = *bb.basepoint_index();
    CHECK(bb.tau[b] == 0.0);
    for (std::size_t i = 0; i < bb.size(); ++i)
        CHECK(bb.d(b, i) == doctest::Approx(bb.tau[i]));
    CHECK(validate(bb, 1e-6).ok());
}

TEST_CASE("augment_big_bang refuses non-shrinking bottom levels") {
    auto m = const_circle();
    auto g = grid_graph(m, 9, 8);
    auto space = null_distance_matrix(g);
    CHECK_THROWS_AS(augment_big_bang(space, 0.25, 1e-6), precondition_error);
}

TEST_CASE("augment_big_bang on a single point") {
    TimedMetricSpace s;
    s.ids = {"only"};
    s.tau = {0.4};
    s.dist = {0.0};
    auto bb = augment_big_bang(s, 0.25, 1e-9);
    CHECK(bb.size() == 2);
    CHECK(bb.d(0, 1) == doctest::Approx(0.4));
}

TEST_CASE("mark_initial_set") {
    auto m = const_circle();
    auto g = grid_graph(m, 9, 8);
    auto space = null_distance_matrix(g);
    auto marked = mark_initial_set(space, 1e-9);
    CHECK(marked.initial_set.size() == 8);  // the bottom slice
    CHECK(validate(marked, 1e-6).ok());
    double residual = std::stod(marked.meta.at("initial_set_residual"));
    CHECK(residual <= 1e-9);

    // big-bang augmented space: initial set is the basepoint alone
    auto lin = linear_circle(0.0, 1.0);
    auto bb = augment_big_bang(null_distance_matrix(grid_graph(lin, 12, 12)), 0.5, 1e-6);
    auto marked_bb = mark_initial_set(bb, 1e-12);
    REQUIRE(marked_bb.initial_set.size() == 1);
    CHECK(marked_bb.initial_set[0] == "p_BB");

    CHECK_THROWS_AS(mark_initial_set(space, -1.0), precondition_error);
}
