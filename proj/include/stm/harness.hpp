#pragma once
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stm/core.hpp"
#include "stm/distances.hpp"
#include "stm/models.hpp"

namespace stm::harness {

using json = nlohmann::json;

// report-v1: every expected value carries its provenance tag, reports are
// bit-identical across reruns except the runtime field.
struct ExperimentReport {
    std::string kind;
    json doc;          // full report-v1 document
    bool pass = false;

    std::string csv;   // series CSV when the experiment produces one
};

// Deterministic cross-platform uniform in [0,1) from a raw 64-bit stream.
double uniform01(std::mt19937_64& rng);

// Random valid timed space: points in a coordinate box with the sup metric
// and tau equal to the first coordinate; validity holds by construction.
TimedMetricSpace random_valid_space(std::mt19937_64& rng, int n, double box = 1.0);

// Random big-bang space: tau is the distance to a chosen basepoint.
TimedMetricSpace random_bb_space(std::mt19937_64& rng, int n);

// Random future-developed space: tau is the distance to a random initial set.
TimedMetricSpace random_fd_space(std::mt19937_64& rng, int n);

// Relabel by permutation (all structure transported).
TimedMetricSpace permuted_copy(const TimedMetricSpace& space, std::mt19937_64& rng);

// One distance inflated by delta, staying inside triangle slack; nullopt when
// no pair has enough slack.
std::optional<TimedMetricSpace> inflate_one_distance(const TimedMetricSpace& space, double delta);

// Checked-in counterexample fixtures (hermetic; never regenerated).
TimedMetricSpace load_fixture(const std::string& fixture_dir, const std::string& name);

struct OracleRegressionConfig {
    models::SpacetimeModel model;
    std::vector<std::pair<int, int>> ladder;  // (nt, nx), strictly increasing
    int n_pairs = 200;
    uint64_t seed = 0x5EED;
    double window_cells = 4.0;
    int n_quad = 16;
    double tol_null = 0.10;   // max |discrete - oracle| at the finest rung
    double tol_tau = 0.05;    // max |tau_hat - tau| at the finest rung
    int threads = 1;

    // Optional cosmic-strip check (linear-warp circle): strip bounds and the
    // probe pair are given in model t coordinates.
    bool check_strip = false;
    double strip_lo_t = 0.5, strip_hi_t = 1.2;
    double pair_t = 1.0, pair_theta_a = 0.0, pair_theta_b = 3.14159265358979323846;
    double strip_tol_rel = 0.03;
};

ExperimentReport run_oracle_regression(const OracleRegressionConfig& cfg);

struct DefinitenessConfig {
    uint64_t seed = 0x5EED;
    int trials = 100;
    int n_max = 5;              // <= 5
    double inflate_delta = 0.1;
    std::string fixture_dir = "fixtures";
    dist::Opts opts;
};

// tau-H definiteness: brute/certified tau_h zero iff a time isometry exists;
// inflated copies get strictly positive certified lower bounds; ships the
// t-to-x, flip-t and levels-match counterexample fixtures.
ExperimentReport run_definiteness_suite(const DefinitenessConfig& cfg);

// Big-bang / future-developed definiteness on flagged random spaces.
ExperimentReport run_bb_fd_definiteness(const DefinitenessConfig& cfg);

struct SandwichConfig {
    uint64_t seed = 0x5EED;
    int trials = 50;
    double tol = 1e-9;
};

ExperimentReport run_sandwich_suite(const SandwichConfig& cfg);

struct ConvergenceConfig {
    std::vector<double> amplitudes;  // e.g. 1, 1/2, ..., 1/8
    double omega = 2.0 * 3.14159265358979323846;
    int nt = 48, nx = 48;
    double window_cells = 4.0;
    int n_quad = 4;
    uint64_t seed = 0x5EED;
    double floor_jitter = 0.5;  // jitter fraction for the floor samplings
    int threads = 1;
    bool probe_levels = true;   // conjecture-probe series, reported only
};

// Convergence probe: tau-H upper bounds between warp-family members and the
// constant-warp limit at fixed resolution.  The discretization floor is
// measured as the self-distance of two independently seeded (jittered)
// samplings of the limit model.
ExperimentReport run_convergence(const ConvergenceConfig& cfg);

// Experiment dispatch from a config document (CLI surface).
ExperimentReport run_from_config(const json& config);

} // namespace stm::harness
