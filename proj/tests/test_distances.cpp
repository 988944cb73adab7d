#include <doctest.h>

#include <cmath>
#include <random>

#include "stm/discretize.hpp"
#include "stm/distances.hpp"
#include "stm/harness.hpp"

using namespace stm;
using namespace stm::dist;

#ifndef STM_FIXTURE_DIR
#define STM_FIXTURE_DIR "fixtures"
#endif

namespace {

TimedMetricSpace two_points(double d, double tau0 = 0, double tau1 = 0) {
    TimedMetricSpace s;
    s.ids = {"x1", "x2"};
    s.tau = {tau0, tau1};
    s.dist = {0, d, d, 0};
    return s;
}

TimedMetricSpace one_point(double tau = 0) {
    TimedMetricSpace s;
    s.ids = {"only"};
    s.tau = {tau};
    s.dist = {0};
    return s;
}

TimedMetricSpace empty_space() {
    TimedMetricSpace s;
    s.empty_flag = true;
    return s;
}

} // namespace

TEST_CASE("gh: brute examples") {
    auto a = two_points(1.0), b = two_points(3.0);
    auto bound = gh(a, b);
    CHECK(bound.exhaustive);
    CHECK(bound.method == Method::brute);
    CHECK(bound.lower == doctest::Approx(1.0));
    CHECK(bound.upper == doctest::Approx(1.0));

    auto self = gh(a, a);
    CHECK(self.upper == doctest::Approx(0.0));

    std::mt19937_64 rng(2);
    auto X = harness::random_valid_space(rng, 4);
    auto pt = one_point();
    auto vs_point = gh(X, pt);
    CHECK(vs_point.upper == doctest::Approx(0.5 * X.diameter()));
    CHECK(vs_point.lower == doctest::Approx(0.5 * X.diameter()));
}

TEST_CASE("gh: empty policies") {
    auto e = empty_space();
    auto x = two_points(1.0);
    auto both = gh(e, e);
    CHECK(both.upper == 0.0);
    auto mixed = gh(e, x);
    CHECK(std::isinf(mixed.lower));
    CHECK(std::isinf(mixed.upper));
}

TEST_CASE("kappa_gh: brute value for the 2-point pair and sandwich") {
    auto a = two_points(1.0), b = two_points(3.0);
    auto kb = kappa_gh(a, b);
    CHECK(kb.exhaustive);
    CHECK(kb.upper == doctest::Approx(2.0));  // realized by the perfect matching
    CHECK(kb.upper >= 1.0 - 1e-12);
    CHECK(kb.upper <= 2.0 + 1e-12);

    auto self = kappa_gh(a, a);
    CHECK(self.upper == doctest::Approx(0.0));
}

TEST_CASE("sandwich inequality on random small pairs") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 30; ++trial) {
        auto X = harness::random_valid_space(rng, 2 + int(rng() % 3));
        auto Y = harness::random_valid_space(rng, 2 + int(rng() % 3));
        auto g = gh(X, Y);
        auto k = kappa_gh(X, Y);
        REQUIRE(g.exhaustive);
        REQUIRE(k.exhaustive);
        CHECK(g.upper <= k.upper + 1e-9);
        CHECK(k.upper <= 2 * g.upper + 1e-9);
    }
}

TEST_CASE("tau_h: brute examples") {
    std::mt19937_64 rng(25);
    auto X = harness::random_valid_space(rng, 4);
    auto Y = harness::permuted_copy(X, rng);
    auto self = tau_h(X, Y);
    CHECK(self.upper <= 1e-12);

    auto a = two_points(1.0, 0.0, 1.0);
    auto b = two_points(1.0, 0.0, 0.5);
    auto bound = tau_h(a, b);
    CHECK(bound.exhaustive);
    CHECK(bound.lower == doctest::Approx(0.5));
    CHECK(bound.upper == doctest::Approx(0.5));
}

TEST_CASE("tau_h lower bound dominates gh lower bound") {
    std::mt19937_64 rng(26);
    for (int trial = 0; trial < 20; ++trial) {
        auto X = harness::random_valid_space(rng, 5 + int(rng() % 3));
        auto Y = harness::random_valid_space(rng, 5 + int(rng() % 3));
        Opts opts;
        opts.exact_max_n = 4;  // force search mode at these sizes
        auto g = gh(X, Y, opts);
        auto t = tau_h(X, Y, opts);
        CHECK(t.lower >= g.lower - 1e-12);
        CHECK(t.lower <= t.upper + 1e-12);
        CHECK(g.lower <= g.upper + 1e-12);
    }
}

TEST_CASE("symmetry: op(X,Y) equals op(Y,X) exactly") {
    std::mt19937_64 rng(27);
    auto X = harness::random_valid_space(rng, 5);
    auto Y = harness::random_valid_space(rng, 6);
    Opts opts;
    for (auto op : {&gh, &kappa_gh, &tau_h}) {
        auto ab = (*op)(X, Y, opts);
        auto ba = (*op)(Y, X, opts);
        CHECK(ab.lower == ba.lower);
        CHECK(ab.upper == ba.upper);
    }
}

TEST_CASE("identity: every op vanishes on relabeled copies") {
    std::mt19937_64 rng(28);
    auto X = harness::random_valid_space(rng, 5);
    auto Y = harness::permuted_copy(X, rng);
    Opts opts;
    CHECK(gh(X, Y, opts).upper <= 1e-12);
    CHECK(kappa_gh(X, Y, opts).upper <= 1e-12);
    CHECK(tau_h(X, Y, opts).upper <= 1e-12);

    auto bb = harness::random_bb_space(rng, 5);
    auto bb2 = harness::permuted_copy(bb, rng);
    CHECK(bb_gh(bb, bb2, opts).upper <= 1e-12);

    auto fd = harness::random_fd_space(rng, 5);
    auto fd2 = harness::permuted_copy(fd, rng);
    CHECK(fd_hh(fd, fd2, opts).upper <= 1e-12);
}

TEST_CASE("brute triangle inequality for gh and tau_h on small triples") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 12; ++trial) {
        auto X = harness::random_valid_space(rng, 2 + int(rng() % 3));
        auto Y = harness::random_valid_space(rng, 2 + int(rng() % 3));
        auto Z = harness::random_valid_space(rng, 2 + int(rng() % 3));
        auto gxy = gh(X, Y).upper, gyz = gh(Y, Z).upper, gxz = gh(X, Z).upper;
        CHECK(gxz <= gxy + gyz + 1e-9);
        auto txy = tau_h(X, Y).upper, tyz = tau_h(Y, Z).upper, txz = tau_h(X, Z).upper;
        CHECK(txz <= txy + tyz + 1e-9);
    }
}

TEST_CASE("tau_h definiteness on tiny spaces matches isometry search") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        int n = 2 + int(rng() % 3);
        auto X = harness::random_valid_space(rng, n);
        TimedMetricSpace Y =
            (trial % 2 == 0) ? harness::permuted_copy(X, rng) : harness::random_valid_space(rng, n);
        auto iso = find_time_isometry(X, Y, 1e-9);
        auto bound = tau_h(X, Y);
        REQUIRE(bound.exhaustive);
        if (iso) CHECK(bound.upper <= 1e-9);
        else CHECK(bound.lower > 1e-9);
    }
}

TEST_CASE("level_sup_gh and level_lp_gh") {
    std::mt19937_64 rng(35);
    auto X = harness::random_valid_space(rng, 6);
    auto bins = default_level_bins(X, X, 9);
    CHECK(level_sup_gh(X, X, bins).upper <= 1e-12);
    CHECK(level_lp_gh(X, X, 2.0, bins).upper <= 1e-12);

    // different tau ranges: some level is empty on one side only
    auto Y = X;
    for (auto& t : Y.tau) t *= 0.3;
    auto jbins = default_level_bins(X, Y, 9);
    auto lv = level_sup_gh(X, Y, jbins);
    CHECK(std::isinf(lv.upper));

    // constant per-bin value c over a range W integrates to c^p * W: two
    // two-level spaces whose every level is a 2-point space, d = 1 vs d = 3.
    auto mk = [](double within) {
        TimedMetricSpace s;
        s.ids = {"x1", "x2", "x3", "x4"};
        s.tau = {0.0, 0.0, 1.0, 1.0};
        double c = 1.9;
        s.dist = {0, within, c, c, within, 0, c, c, c, c, 0, within, c, c, within, 0};
        return s;
    };
    auto a = mk(1.0);
    auto b = mk(3.0);
    REQUIRE(validate(a).ok());
    REQUIRE(validate(b).ok());
    LevelBins bb;
    bb.centers = {0.0, 1.0};
    bb.half_width = 0.1;
    auto lp = level_lp_gh(a, b, 2.0, bb);
    CHECK(lp.upper == doctest::Approx(1.0));  // c^p * W = 1^2 * (1-0)
    CHECK(lp.lower == doctest::Approx(1.0));
    CHECK_THROWS_AS(level_lp_gh(a, b, 0.5, bb), argument_error);
    CHECK_THROWS_AS(level_sup_gh(a, b, LevelBins{}), argument_error);
}

TEST_CASE("strip_sup_gh: full-range strip equals timeless gh") {
    std::mt19937_64 rng(37);
    auto X = harness::random_valid_space(rng, 5);
    auto Y = harness::random_valid_space(rng, 5);
    StripGrid grid;
    double lo = std::min(X.tau_min(), Y.tau_min());
    double hi = std::max(X.tau_max(), Y.tau_max());
    grid.ranges = {{lo, hi}};
    auto st = strip_sup_gh(X, Y, grid);
    auto tls = timeless_sgh(X, Y);
    CHECK(st.upper == doctest::Approx(tls.upper));
    CHECK(strip_sup_gh(X, X, default_strip_grid(X, X, 4)).upper <= 1e-12);
    CHECK(strip_lp_gh(X, X, 1.0, default_strip_grid(X, X, 4)).upper <= 1e-12);
}

TEST_CASE("strip grid on the t-to-x fixture gives a positive certified bound") {
    auto A = harness::load_fixture(STM_FIXTURE_DIR, "t_to_x_a");
    auto B = harness::load_fixture(STM_FIXTURE_DIR, "t_to_x_b");
    auto grid = default_strip_grid(A, B, 3);  // tau ranges differ -> empty strips
    auto st = strip_sup_gh(A, B, grid);
    CHECK(st.lower > 0.0);
}

TEST_CASE("bb_gh: preconditions, scaled copies, projection bound") {
    std::mt19937_64 rng(41);
    auto X = harness::random_bb_space(rng, 4);
    auto plain = harness::random_valid_space(rng, 4);
    CHECK_THROWS_AS(bb_gh(X, plain, Opts{}), precondition_error);

    auto scaled = X;
    for (auto& v : scaled.tau) v *= 1.5;
    for (auto& v : scaled.dist) v *= 1.5;
    auto bound = bb_gh(X, scaled);
    CHECK(bound.lower > 0.0);  // tau multiset Hausdorff separates
    CHECK(bound.lower <= bound.upper + 1e-12);
}

TEST_CASE("fd_hh: removed top slab is certified by the tau projection") {
    std::mt19937_64 rng(43);
    auto X = harness::random_fd_space(rng, 6);
    // drop the latest point: tau range shrinks by the gap to the next value
    std::vector<double> taus = X.tau;
    std::sort(taus.begin(), taus.end());
    double gap = taus[5] - taus[4];
    if (gap <= 1e-6) return;  // degenerate draw; property vacuous

    std::size_t drop = 0;
    for (std::size_t i = 0; i < X.size(); ++i)
        if (X.tau[i] == taus[5]) drop = i;
    TimedMetricSpace Y;
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (i == drop) continue;
        Y.ids.push_back(X.ids[i]);
        Y.tau.push_back(X.tau[i]);
    }
    Y.dist.assign(25, 0.0);
    std::size_t a = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (i == drop) continue;
        std::size_t b = 0;
        for (std::size_t j = 0; j < X.size(); ++j) {
            if (j == drop) continue;
            Y.dist[a * 5 + b] = X.d(i, j);
            ++b;
        }
        ++a;
    }
    Y.initial_set = X.initial_set;
    auto bound = fd_hh(X, Y);
    CHECK(bound.lower >= gap - 1e-9);
}

TEST_CASE("normalized lp variant applies the 1/p root") {
    std::mt19937_64 rng(48);
    auto X = harness::random_valid_space(rng, 5);
    auto inflated = harness::inflate_one_distance(X, 0.05);
    REQUIRE(inflated);
    auto bins = default_level_bins(X, *inflated, 5);
    auto raw = level_lp_gh(X, *inflated, 2.0, bins);
    auto norm = level_lp_gh(X, *inflated, 2.0, bins, Opts{}, true);
    REQUIRE(std::isfinite(raw.upper));
    CHECK(norm.upper == doctest::Approx(std::sqrt(raw.upper)));
    CHECK(norm.lower == doctest::Approx(std::sqrt(raw.lower)));
}

TEST_CASE("fd_hh upper bound for scaled circles via the index correspondence") {
    // Two constant-warp circle grids, circumferences L and L + delta: the
    // angle-scaling correspondence certifies an upper bound near delta/2.
    namespace dz = stm::discretize;
    const double kPi = 3.14159265358979323846;
    const double delta = 0.2;
    auto build = [&](double L) {
        models::SpacetimeModel m;
        m.kind = models::ModelKind::warped_product;
        m.spatial.kind = models::SpatialKind::circle;
        m.spatial.L1 = L;
        m.warp.family = models::WarpFamily::constant;
        m.warp.c = 1.0;
        m.t_lo = 0.0;
        m.t_hi = 1.0;
        auto pts = dz::sample_grid(m, 8, 8);
        auto g = dz::build_causal_graph(m, pts, 4.0 * dz::grid_spacing(m, 8, 8), 4);
        return dz::mark_initial_set(dz::null_distance_matrix(g), 1e-9);
    };
    auto A = build(2 * kPi);
    auto B = build(2 * kPi + delta);
    Opts opts;
    opts.budget = 2000;
    opts.restarts = 1;
    auto bound = fd_hh(A, B, opts);
    double grid_tol = 0.35;  // coarse 8x8 discretization slack
    CHECK(bound.upper <= delta / 2 + grid_tol);
    CHECK(bound.lower <= bound.upper + 1e-12);
}

TEST_CASE("bound serialization invariants") {
    std::mt19937_64 rng(47);
    auto X = harness::random_valid_space(rng, 3);
    auto Y = harness::random_valid_space(rng, 3);
    auto b = tau_h(X, Y);
    CHECK(b.lower <= b.upper + 1e-12);
    CHECK(b.exhaustive);
    if (b.witness) {
        // both projections surjective
        std::vector<int> rows(3, 0), cols(3, 0);
        for (auto [i, j] : b.witness->pairs) {
            ++rows[i];
            ++cols[j];
        }
        for (int c : rows) CHECK(c > 0);
        for (int c : cols) CHECK(c > 0);
    }
}

TEST_CASE("dispatch and option guards") {
    auto a = two_points(1.0, 0, 1);
    CHECK_THROWS_AS(dispatch("nope", a, a, Opts{}), argument_error);
    Opts bad;
    bad.exact_max_n = 6;
    CHECK_THROWS_AS(gh(a, a, bad), argument_error);
    Opts zero;
    zero.budget = 0;
    CHECK_THROWS_AS(gh(a, a, zero), argument_error);
    CHECK(dispatch("timeless", a, a, Opts{}).upper <= 1e-12);
}
