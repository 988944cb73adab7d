#include <doctest.h>

#include <cmath>
#include <random>

#include "stm/discretize.hpp"
#include "stm/harness.hpp"
#include "stm/io.hpp"

using namespace stm;

TEST_CASE("tms-v1 round trip preserves everything") {
    std::mt19937_64 rng(61);
    auto s = harness::random_fd_space(rng, 6);
    s.meta["origin"] = "test";
    auto j = io::to_json(s);
    auto back = io::space_from_json(j);
    CHECK(back.ids == s.ids);
    CHECK(back.tau == s.tau);
    CHECK(back.dist == s.dist);
    CHECK(back.initial_set == s.initial_set);
    CHECK(back.meta.at("origin") == "test");
}

TEST_CASE("tms-v1 rejects non-finite values and bad shapes") {
    std::mt19937_64 rng(62);
    auto s = harness::random_valid_space(rng, 3);
    auto j = io::to_json(s);
    j["points"][0]["tau"] = "inf";  // wrong type
    CHECK_THROWS_AS(io::space_from_json(j), std::exception);

    auto j2 = io::to_json(s);
    j2["dist"]["values"] = {1.0};  // wrong length
    CHECK_THROWS_AS(io::space_from_json(j2), io_error);

    auto j3 = io::to_json(s);
    j3["schema"] = "nope";
    CHECK_THROWS_AS(io::space_from_json(j3), io_error);
}

TEST_CASE("model-v1 round trip") {
    models::SpacetimeModel m;
    m.kind = models::ModelKind::minkowski_region;
    m.spatial.kind = models::SpatialKind::euclidean;
    m.spatial.dim = 2;
    m.warp.family = models::WarpFamily::constant;
    m.warp.c = 1.0;
    m.t_lo = 0.1;
    m.t_hi = 0.8;
    m.region.kind = models::RegionKind::past_of_point;
    m.region.t_p = 1.0;
    m.region.x_p = {0.25, -0.5, 0};
    auto back = io::model_from_json(io::to_json(m));
    CHECK(back.kind == m.kind);
    CHECK(back.spatial.dim == 2);
    CHECK(back.region.kind == m.region.kind);
    CHECK(back.region.x_p[1] == doctest::Approx(-0.5));

    models::SpacetimeModel w;
    w.warp.family = models::WarpFamily::sinusoidal;
    w.warp.a = 0.3;
    w.warp.omega = 6.0;
    auto back2 = io::model_from_json(io::to_json(w));
    CHECK(back2.warp.a == doctest::Approx(0.3));
    CHECK(back2.warp.omega == doctest::Approx(6.0));
}

TEST_CASE("cgraph-v1 carries model and node coordinates") {
    models::SpacetimeModel m;
    m.spatial.L1 = 2 * 3.14159265358979323846;
    m.warp.family = models::WarpFamily::constant;
    m.t_lo = 0;
    m.t_hi = 1;
    auto pts = discretize::sample_grid(m, 4, 4);
    auto g = discretize::build_causal_graph(m, pts, 4 * discretize::grid_spacing(m, 4, 4), 4);
    auto j = io::to_json(g);
    auto [model, nodes] = io::graph_nodes_from_json(j);
    REQUIRE(nodes.size() == g.node_count());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        CHECK(nodes[i].t == g.nodes[i].pt.t);
        CHECK(nodes[i].x[0] == g.nodes[i].pt.x[0]);
    }
    CHECK(model.warp.family == models::WarpFamily::constant);
}

TEST_CASE("bound-v1 inf sentinel and witness round trip") {
    dist::DistanceBound b;
    b.lower = b.upper = std::numeric_limits<double>::infinity();
    b.method = dist::Method::projection_lb;
    auto j = io::bound_to_json(b, "gh", "aaa", "bbb");
    CHECK(j["lower"] == "inf");
    auto back = io::bound_from_json(j);
    CHECK(std::isinf(back.lower));
    CHECK(std::isinf(back.upper));

    dist::DistanceBound w;
    w.lower = 0.25;
    w.upper = 0.5;
    w.method = dist::Method::local_search;
    w.witness = dist::Correspondence{{{0, 1}, {1, 0}}};
    auto jw = io::bound_to_json(w, "tau-h", "x", "y");
    auto backw = io::bound_from_json(jw);
    REQUIRE(backw.witness);
    CHECK(backw.witness->pairs == w.witness->pairs);
    CHECK(backw.method == dist::Method::local_search);
}

TEST_CASE("content hash distinguishes spaces") {
    std::mt19937_64 rng(63);
    auto a = harness::random_valid_space(rng, 4);
    auto b = harness::random_valid_space(rng, 4);
    CHECK(io::content_hash(a) == io::content_hash(a));
    CHECK(io::content_hash(a) != io::content_hash(b));
}
