#include <doctest.h>

#include <cmath>
#include <random>

#include "stm/core.hpp"
#include "stm/harness.hpp"

using namespace stm;

namespace {

TimedMetricSpace two_points(double d, double tau0, double tau1) {
    TimedMetricSpace s;
    s.ids = {"x1", "x2"};
    s.tau = {tau0, tau1};
    s.dist = {0, d, d, 0};
    return s;
}

TimedMetricSpace three_chain(double d01, double d12, double d02,
                             std::array<double, 3> tau = {0, 0, 0}) {
    TimedMetricSpace s;
    s.ids = {"a", "b", "c"};
    s.tau = {tau[0], tau[1], tau[2]};
    s.dist = {0, d01, d02, d01, 0, d12, d02, d12, 0};
    return s;
}

} // namespace

TEST_CASE("validate: minimal Lipschitz-tight pair") {
    auto s = two_points(1.0, 0.0, 1.0);
    CHECK(validate(s).ok());
}

TEST_CASE("validate: triangle violation magnitude") {
    auto s = three_chain(1.0, 1.0, 5.0);
    auto rep = validate(s);
    REQUIRE_FALSE(rep.ok());
    bool found = false;
    for (const auto& v : rep.violations)
        if (v.kind == ViolationKind::triangle) {
            found = true;
            CHECK(v.magnitude == doctest::Approx(3.0));
        }
    CHECK(found);
}

TEST_CASE("validate: Lipschitz violation magnitude") {
    auto s = two_points(0.5, 0.0, 1.0);
    auto rep = validate(s);
    REQUIRE_FALSE(rep.ok());
    bool found = false;
    for (const auto& v : rep.violations)
        if (v.kind == ViolationKind::lipschitz) {
            found = true;
            CHECK(v.magnitude == doctest::Approx(0.5));
        }
    CHECK(found);
}

TEST_CASE("validate: structural error on malformed matrix") {
    TimedMetricSpace s;
    s.ids = {"a", "b"};
    s.tau = {0, 0.5};
    s.dist = {0, 1, 1};  // wrong length
    auto rep = validate(s);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations.front().kind == ViolationKind::structure);
}

TEST_CASE("causal_relation basics") {
    // Product-model style pair: d = 0.5 = dtau is causal; d = pi/2 > 0.5 is not.
    auto s = three_chain(0.5, 1.5707963267948966, 1.5707963267948966, {0.7, 0.2, 0.2});
    // points: a=(0.7, x=0.3), b=(0.2, 0), c=(0.2, pi/2-ish placeholder)
    REQUIRE(validate(s).ok());
    auto rel = causal_relation(s, 1e-12);
    CHECK(rel.at(0, 1));        // d(a,b) = 0.5 = dtau
    CHECK_FALSE(rel.at(1, 0));  // reversed time
    CHECK_FALSE(rel.at(0, 2));  // d = pi/2 > dtau = 0.5
    for (std::size_t i = 0; i < 3; ++i) CHECK(rel.at(i, i));
    CHECK_THROWS_AS(causal_relation(s, -1.0), argument_error);
}

TEST_CASE("causal axioms pass exactly on valid spaces") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        auto s = harness::random_valid_space(rng, 6);
        REQUIRE(validate(s).ok());
        auto rel = causal_relation(s, 0.0);
        auto rep = check_causal_axioms(rel, s);
        CHECK(rep.pass());
        CHECK(rep.transitivity_violations == 0);
        CHECK(rep.antisymmetry_violations == 0);
    }
}

TEST_CASE("causal axioms: eps > 0 reports counts instead of failing") {
    auto s = three_chain(0.4, 0.4, 0.8, {0.0, 0.39, 0.78});
    REQUIRE(validate(s).ok());
    auto rel = causal_relation(s, 0.1);
    auto rep = check_causal_axioms(rel, s);
    CHECK_FALSE(rep.strict);
    CHECK(rep.pass());  // counts only
}

TEST_CASE("single point space trivially passes") {
    TimedMetricSpace s;
    s.ids = {"only"};
    s.tau = {0.0};
    s.dist = {0.0};
    CHECK(validate(s).ok());
    auto rel = causal_relation(s, 0.0);
    CHECK(check_causal_axioms(rel, s).pass());
}

TEST_CASE("restrict_level selects slices") {
    std::mt19937_64 rng(5);
    auto s = harness::random_valid_space(rng, 8);
    auto lvl = restrict_level(s, s.tau[3], 0.0);
    CHECK(lvl.size() >= 1);
    for (double t : lvl.tau) CHECK(t == s.tau[3]);

    auto empty = restrict_level(s, -5.0, 0.001);
    CHECK(empty.empty());
    CHECK(empty.empty_flag);
}

TEST_CASE("restrict_strip shifts tau and composes") {
    std::mt19937_64 rng(6);
    auto s = harness::random_valid_space(rng, 10);
    double lo = s.tau_min(), hi = s.tau_max();

    auto whole = restrict_strip(s, lo, hi);
    CHECK(whole.size() == s.size());
    CHECK(whole.tau_min() == doctest::Approx(0.0));

    double m = 0.5 * (lo + hi);
    auto first = restrict_strip(s, lo, m);
    auto nested = restrict_strip(first, 0.1 * (m - lo), 0.8 * (m - lo));
    auto direct = restrict_strip(s, lo + 0.1 * (m - lo), lo + 0.8 * (m - lo));
    REQUIRE(nested.size() == direct.size());
    // Same point sets, bit-equal ids.
    for (std::size_t i = 0; i < nested.size(); ++i) CHECK(nested.ids[i] == direct.ids[i]);

    CHECK_THROWS_AS(restrict_strip(s, 1.0, 0.0), argument_error);
}

TEST_CASE("find_time_isometry: relabeling always succeeds") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        auto X = harness::random_valid_space(rng, 2 + int(rng() % 5));
        auto Y = harness::permuted_copy(X, rng);
        auto f = find_time_isometry(X, Y, 1e-12);
        REQUIRE(f);
        for (std::size_t i = 0; i < X.size(); ++i) {
            CHECK(std::fabs(X.tau[i] - Y.tau[(*f)[i]]) <= 1e-12);
            for (std::size_t j = 0; j < X.size(); ++j)
                CHECK(std::fabs(X.d(i, j) - Y.d((*f)[i], (*f)[j])) <= 1e-12);
        }
    }
}

TEST_CASE("find_time_isometry: perturbation is detected") {
    std::mt19937_64 rng(13);
    auto X = harness::random_valid_space(rng, 5);
    auto Yp = harness::inflate_one_distance(X, 1e-4);
    REQUIRE(Yp);
    CHECK_FALSE(find_time_isometry(X, *Yp, 1e-5));
    CHECK_FALSE(find_time_isometry(X, two_points(1, 0, 1), 1e-9));  // size mismatch
    TimedMetricSpace big;
    for (int i = 0; i < 11; ++i) {
        big.ids.push_back("p" + std::to_string(i));
        big.tau.push_back(0.0);
    }
    big.dist.assign(11 * 11, 1.0);
    for (int i = 0; i < 11; ++i) big.dist[i * 11 + i] = 0.0;
    CHECK_THROWS_AS(find_time_isometry(big, big, 1e-9), capability_error);
}

TEST_CASE("basepoint and initial-set invariants are validated") {
    auto s = two_points(1.0, 0.0, 1.0);
    s.basepoint = "x1";
    CHECK(validate(s).ok());  // d(x1,x2) = 1 = tau(x2)

    s.basepoint = "x2";  // tau(x2) = 1 != 0
    CHECK_FALSE(validate(s).ok());

    auto f = two_points(1.0, 0.0, 1.0);
    f.initial_set = {"x1"};
    CHECK(validate(f).ok());
    f.initial_set = {"x2"};
    CHECK_FALSE(validate(f).ok());
}
