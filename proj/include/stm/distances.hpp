#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stm/core.hpp"

namespace stm::dist {

// Relation between two point sets with both projections surjective; realizes
// the paired landmark sequences behind the Kuratowski-style infima and the
// correspondence form of GH.
struct Correspondence {
    std::vector<std::pair<int, int>> pairs;

    Correspondence transposed() const {
        Correspondence t;
        t.pairs.reserve(pairs.size());
        for (auto [i, j] : pairs) t.pairs.push_back({j, i});
        return t;
    }
};

enum class Method { brute, local_search, gluing, projection_lb };
const char* method_name(Method m);

// Certified interval [lower, upper].  brute results are exhaustive over all
// correspondences and carry lower == upper.
struct DistanceBound {
    double lower = 0.0;
    double upper = 0.0;
    Method method = Method::projection_lb;
    std::optional<Correspondence> witness;
    uint64_t seed = 0;
    long evals = 0;
    bool exhaustive = false;
    std::string note;
};

struct Opts {
    int exact_max_n = 4;      // exhaustive enumeration cap (5 allowed, warns)
    long budget = 10000;      // local-search objective evaluations
    uint64_t seed = 0x5EED;
    int restarts = 4;
    double validate_tol = 1e-6;
    bool skip_validation = false;  // callers that just validated may skip
};

struct LevelBins {
    std::vector<double> centers;
    double half_width = 0.0;
};

struct StripGrid {
    std::vector<std::pair<double, double>> ranges;  // (s, t) with s <= t
    std::vector<double> weights;                    // lp weights, parallel to ranges
};

// Joint bin builders over [tau_min, tau_max] of the input pair.
LevelBins default_level_bins(const TimedMetricSpace& X, const TimedMetricSpace& Y, int count);
StripGrid default_strip_grid(const TimedMetricSpace& X, const TimedMetricSpace& Y, int count);

// Gromov-Hausdorff via the correspondence characterization (half the minimal
// distortion).  Empty-vs-nonempty yields the +inf sentinel, empty-vs-empty 0.
DistanceBound gh(const TimedMetricSpace& X, const TimedMetricSpace& Y, const Opts& opts = {});

// Kuratowski-embedding GH: Hausdorff distance in sup-norm coordinates indexed
// by correspondence pairs; sandwiched between gh and 2*gh.
DistanceBound kappa_gh(const TimedMetricSpace& X, const TimedMetricSpace& Y, const Opts& opts = {});

// gh applied to the underlying metric spaces, tau ignored.
DistanceBound timeless_sgh(const TimedMetricSpace& X, const TimedMetricSpace& Y, const Opts& opts = {});

// The lp forms integrate |gh|^p without a p-th root, matching the printed
// integral form; normalized = true applies the 1/p root (exposed for
// comparison runs, never used by the acceptance suite).
DistanceBound level_sup_gh(const TimedMetricSpace& X, const TimedMetricSpace& Y,
                           const LevelBins& bins, const Opts& opts = {});
DistanceBound level_lp_gh(const TimedMetricSpace& X, const TimedMetricSpace& Y, double p,
                          const LevelBins& bins, const Opts& opts = {}, bool normalized = false);
DistanceBound strip_sup_gh(const TimedMetricSpace& X, const TimedMetricSpace& Y,
                           const StripGrid& grid, const Opts& opts = {});
DistanceBound strip_lp_gh(const TimedMetricSpace& X, const TimedMetricSpace& Y, double p,
                          const StripGrid& grid, const Opts& opts = {}, bool normalized = false);

// Timed-Hausdorff distance: minimal Hausdorff distance between timed
// Kuratowski images over paired landmark sequences.
DistanceBound tau_h(const TimedMetricSpace& X, const TimedMetricSpace& Y, const Opts& opts = {});

// Pointed (big-bang) distance: gluing Hausdorff plus basepoint separation.
DistanceBound bb_gh(const TimedMetricSpace& X, const TimedMetricSpace& Y, const Opts& opts = {});

// Future-developed distance: gluing Hausdorff plus initial-set Hausdorff.
DistanceBound fd_hh(const TimedMetricSpace& X, const TimedMetricSpace& Y, const Opts& opts = {});

// Upper bound from an explicit index pairing (same-size inputs), used for
// large sampled grids where search is pointless: max of pair distortion and
// tau mismatch.  The certified lower bound comes from the tau projections.
DistanceBound tau_h_paired(const TimedMetricSpace& X, const TimedMetricSpace& Y);

// Named dispatch used by the CLI ("gh", "kappa-gh", "timeless", "level-sup",
// "level-lp", "strip-sup", "strip-lp", "tau-h", "bb-gh", "fd-hh").
DistanceBound dispatch(const std::string& op, const TimedMetricSpace& X, const TimedMetricSpace& Y,
                       const Opts& opts, double p = 1.0, int grid_count = 9);

} // namespace stm::dist
