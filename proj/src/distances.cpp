#include "stm/distances.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "stm/kernels.hpp"
#include "stm/rng.hpp"

namespace stm::dist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Pairs = std::vector<std::pair<int, int>>;

// ---------------------------------------------------------------------------
// Objective evaluation
// ---------------------------------------------------------------------------

// Max distance mismatch over related pairs.
double distortion(const TimedMetricSpace& X, const TimedMetricSpace& Y, const Pairs& R) {
    double dis = 0.0;
    const std::size_t m = R.size();
    for (std::size_t a = 0; a < m; ++a) {
        auto [xa, ya] = R[a];
        for (std::size_t b = a + 1; b < m; ++b) {
            auto [xb, yb] = R[b];
            double d = std::fabs(X.d(xa, xb) - Y.d(ya, yb));
            if (d > dis) dis = d;
        }
    }
    return dis;
}

// Hausdorff distance between the embedded images with coordinates indexed by
// the correspondence pairs; with_tau prepends the time coordinate (tau-H).
double cost_hausdorff(const TimedMetricSpace& X, const TimedMetricSpace& Y, const Pairs& R,
                      bool with_tau) {
    const std::size_t nx = X.size(), ny = Y.size(), m = R.size();
    // Gathered landmark profiles, point-major so the inner reduction is a
    // contiguous sup-norm kernel.
    std::vector<double> gx(nx * m), gy(ny * m);
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t k = 0; k < m; ++k) gx[x * m + k] = X.d(R[k].first, x);
    for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t k = 0; k < m; ++k) gy[y * m + k] = Y.d(R[k].second, y);

    std::vector<double> colmin(ny, kInf);
    double h = 0.0;
    for (std::size_t x = 0; x < nx; ++x) {
        double rowmin = kInf;
        for (std::size_t y = 0; y < ny; ++y) {
            double c = kernels::sup_diff(&gx[x * m], &gy[y * m], m);
            if (with_tau) c = std::max(c, std::fabs(X.tau[x] - Y.tau[y]));
            if (c < rowmin) rowmin = c;
            if (c < colmin[y]) colmin[y] = c;
        }
        if (rowmin > h) h = rowmin;
    }
    for (std::size_t y = 0; y < ny; ++y)
        if (colmin[y] > h) h = colmin[y];
    return h;
}

// Cross distance in the r-glued disjoint union.
double gluing_cross(const TimedMetricSpace& X, const TimedMetricSpace& Y, const Pairs& R,
                    double r, int x, int y) {
    double best = kInf;
    for (auto [xk, yk] : R) {
        double v = X.d(x, xk) + r + Y.d(yk, y);
        if (v < best) best = v;
    }
    return best;
}

// Pointed objective: Hausdorff of the whole images (= r in the gluing) plus
// the basepoint separation.
double bb_objective(const TimedMetricSpace& X, const TimedMetricSpace& Y, const Pairs& R,
                    std::size_t bx, std::size_t by) {
    double r = 0.5 * distortion(X, Y, R);
    return r + gluing_cross(X, Y, R, r, int(bx), int(by));
}

// Future-developed objective: Hausdorff of the whole images plus Hausdorff of
// the initial-set images inside the gluing.
double fd_objective(const TimedMetricSpace& X, const TimedMetricSpace& Y, const Pairs& R,
                    const std::vector<std::size_t>& mx, const std::vector<std::size_t>& my) {
    double r = 0.5 * distortion(X, Y, R);
    double h = 0.0;
    for (std::size_t a : mx) {
        double best = kInf;
        for (std::size_t b : my) best = std::min(best, gluing_cross(X, Y, R, r, int(a), int(b)));
        h = std::max(h, best);
    }
    for (std::size_t b : my) {
        double best = kInf;
        for (std::size_t a : mx) best = std::min(best, gluing_cross(X, Y, R, r, int(a), int(b)));
        h = std::max(h, best);
    }
    return r + h;
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration over correspondences (small n)
// ---------------------------------------------------------------------------

struct ExactResult {
    double value = kInf;
    Pairs witness;
    long evals = 0;
};

template <typename F>
ExactResult enumerate_exact(std::size_t nx, std::size_t ny, F&& objective) {
    const std::size_t bits = nx * ny;
    ExactResult res;
    const uint64_t full = (bits == 64) ? ~0ull : ((1ull << bits) - 1);
    Pairs pairs;
    pairs.reserve(bits);
    for (uint64_t mask = 1; mask <= full; ++mask) {
        // surjectivity of both projections
        bool ok = true;
        uint64_t cols = 0;
        for (std::size_t i = 0; i < nx && ok; ++i) {
            uint64_t row = (mask >> (i * ny)) & ((1ull << ny) - 1);
            if (row == 0) ok = false;
            cols |= row;
        }
        if (!ok || cols != ((1ull << ny) - 1)) continue;
        pairs.clear();
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < ny; ++j)
                if (mask & (1ull << (i * ny + j))) pairs.push_back({int(i), int(j)});
        double v = objective(pairs);
        ++res.evals;
        if (v < res.value) {
            res.value = v;
            res.witness = pairs;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Simulated-annealing search over correspondences (upper bounds)
// ---------------------------------------------------------------------------

Pairs greedy_tau_staircase(const TimedMetricSpace& X, const TimedMetricSpace& Y) {
    std::vector<int> ox(X.size()), oy(Y.size());
    for (std::size_t i = 0; i < X.size(); ++i) ox[i] = int(i);
    for (std::size_t j = 0; j < Y.size(); ++j) oy[j] = int(j);
    std::sort(ox.begin(), ox.end(), [&](int a, int b) { return X.tau[a] < X.tau[b]; });
    std::sort(oy.begin(), oy.end(), [&](int a, int b) { return Y.tau[a] < Y.tau[b]; });
    Pairs out;
    std::size_t a = 0, b = 0;
    while (a < ox.size() && b < oy.size()) {
        out.push_back({ox[a], oy[b]});
        double fa = double(a + 1) / ox.size();
        double fb = double(b + 1) / oy.size();
        if (fa < fb || b + 1 == oy.size()) {
            ++a;
        } else if (fb < fa || a + 1 == ox.size()) {
            ++b;
        } else {
            ++a;
            ++b;
        }
    }
    while (a < ox.size()) out.push_back({ox[a++], oy.back()});
    while (b < oy.size()) out.push_back({ox.back(), oy[b++]});
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct SearchResult {
    double value = kInf;
    Pairs witness;
    long evals = 0;
};

template <typename F>
void anneal(const std::size_t nx, const std::size_t ny, F&& objective, const Pairs& start,
            long budget, uint64_t seed, SearchResult& best) {
    std::mt19937_64 rng(seed);
    Pairs cur = start;
    std::vector<int> rowc(nx, 0), colc(ny, 0);
    for (auto [i, j] : cur) {
        ++rowc[i];
        ++colc[j];
    }
    double cur_v = objective(cur);
    ++best.evals;
    if (cur_v < best.value) {
        best.value = cur_v;
        best.witness = cur;
    }
    double t0 = std::max(cur_v, 1e-3);
    long steps = budget;
    for (long step = 0; step < steps; ++step) {
        double T = t0 * std::pow(1e-4, double(step + 1) / steps);
        Pairs cand = cur;
        int move = int(rng() % 3);
        bool valid = false;
        if (move == 0 && cand.size() < nx * ny) {  // add
            int i = int(rng() % nx), j = int(rng() % ny);
            if (std::find(cand.begin(), cand.end(), std::make_pair(i, j)) == cand.end()) {
                cand.push_back({i, j});
                valid = true;
            }
        } else if (move == 1 && cand.size() > 1) {  // remove
            std::size_t k = rng() % cand.size();
            auto [i, j] = cand[k];
            if (rowc[i] > 1 && colc[j] > 1) {
                cand.erase(cand.begin() + k);
                valid = true;
            }
        } else if (cand.size() >= 1) {  // retarget one side of a pair
            std::size_t k = rng() % cand.size();
            auto [i, j] = cand[k];
            bool change_row = rng() & 1;
            int ni = change_row ? int(rng() % nx) : i;
            int nj = change_row ? j : int(rng() % ny);
            if ((ni != i || nj != j) &&
                std::find(cand.begin(), cand.end(), std::make_pair(ni, nj)) == cand.end()) {
                bool removable = (change_row ? rowc[i] > 1 : colc[j] > 1);
                if (removable) {
                    cand[k] = {ni, nj};
                    valid = true;
                }
            }
        }
        if (!valid) continue;
        double v = objective(cand);
        ++best.evals;
        double delta = v - cur_v;
        if (delta <= 0.0 || std::exp(-delta / std::max(T, 1e-12)) > uniform01(rng)) {
            // commit
            for (auto [i, j] : cur) {
                --rowc[i];
                --colc[j];
            }
            cur = std::move(cand);
            for (auto [i, j] : cur) {
                ++rowc[i];
                ++colc[j];
            }
            cur_v = v;
            if (v < best.value) {
                best.value = v;
                best.witness = cur;
            }
        }
    }
}

template <typename F>
SearchResult search_upper(const TimedMetricSpace& X, const TimedMetricSpace& Y, F&& objective,
                          const Opts& opts) {
    const std::size_t nx = X.size(), ny = Y.size();
    SearchResult best;

    // Deterministic starts.
    std::vector<Pairs> starts;
    starts.push_back(greedy_tau_staircase(X, Y));
    if (nx == ny) {
        Pairs ident;
        for (std::size_t i = 0; i < nx; ++i) ident.push_back({int(i), int(i)});
        starts.push_back(ident);
    }

    // Bijection sweep for small same-size inputs: cheap and often optimal.
    if (nx == ny && nx <= 6 && nx >= 1) {
        std::vector<int> perm(nx);
        for (std::size_t i = 0; i < nx; ++i) perm[i] = int(i);
        Pairs bij(nx);
        do {
            for (std::size_t i = 0; i < nx; ++i) bij[i] = {int(i), perm[i]};
            double v = objective(bij);
            ++best.evals;
            if (v < best.value) {
                best.value = v;
                best.witness = bij;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    }

    int restarts = std::max(1, opts.restarts);
    long per = std::max<long>(64, opts.budget / restarts);
    for (int r = 0; r < restarts; ++r) {
        Pairs start;
        if (std::size_t(r) < starts.size()) {
            start = starts[r];
        } else {
            std::mt19937_64 rng(opts.seed + 0x9e37u * (r + 1));
            start = greedy_tau_staircase(X, Y);
            // shuffle a few retargets for diversity
            for (std::size_t k = 0; k < start.size(); ++k)
                if (rng() % 3 == 0) start[k].second = int(rng() % ny);
            std::vector<uint8_t> seen_col(ny, 0);
            for (auto [i, j] : start) seen_col[j] = 1;
            for (std::size_t j = 0; j < ny; ++j)
                if (!seen_col[j]) start.push_back({int(rng() % nx), int(j)});
            std::sort(start.begin(), start.end());
            start.erase(std::unique(start.begin(), start.end()), start.end());
        }
        anneal(nx, ny, objective, start, per, opts.seed ^ (0xA5A5ull * (r + 1)), best);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Certified lower bounds from matching-invariant signatures
// ---------------------------------------------------------------------------

std::vector<std::vector<double>> sorted_rows(const TimedMetricSpace& S) {
    std::vector<std::vector<double>> rows(S.size());
    for (std::size_t i = 0; i < S.size(); ++i) {
        rows[i].assign(S.dist.begin() + i * S.size(), S.dist.begin() + (i + 1) * S.size());
        std::sort(rows[i].begin(), rows[i].end());
    }
    return rows;
}

// Hausdorff distance on the real line between two sorted value sets.
double set_hausdorff_sorted(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.empty() && v.empty()) return 0.0;
    if (u.empty() || v.empty()) return kInf;
    auto one_sided = [](const std::vector<double>& a, const std::vector<double>& b) {
        double worst = 0.0;
        std::size_t j = 0;
        for (double x : a) {
            while (j + 1 < b.size() && b[j + 1] < x) ++j;
            double best = std::fabs(b[j] - x);
            if (j + 1 < b.size()) best = std::min(best, std::fabs(b[j + 1] - x));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_sided(u, v), one_sided(v, u));
}

// Any correspondence pairing x to y with pointwise slack h forces the
// distance-value sets of x and y to be h-close on the line, and tau(x), tau(y)
// to be h-close when the objective carries time.  The Hausdorff-style
// aggregation of that signature cost therefore lower-bounds the distortion
// (untimed) or the timed Hausdorff value directly.
double signature_hausdorff(const TimedMetricSpace& X, const TimedMetricSpace& Y, bool with_tau) {
    const std::size_t nx = X.size(), ny = Y.size();
    if (nx == 0 || ny == 0) return (nx == ny) ? 0.0 : kInf;
    // Full profile signature is cubic; beyond this size fall back to the
    // eccentricity scalar, which the same argument covers.
    const bool full = nx * ny * (nx + ny) <= std::size_t(64) * 1000 * 1000;

    std::vector<std::vector<double>> rx, ry;
    std::vector<double> ex(nx), ey(ny);
    if (full) {
        rx = sorted_rows(X);
        ry = sorted_rows(Y);
    } else {
        for (std::size_t i = 0; i < nx; ++i)
            ex[i] = kernels::max_val(X.dist.data() + i * nx, nx);
        for (std::size_t j = 0; j < ny; ++j)
            ey[j] = kernels::max_val(Y.dist.data() + j * ny, ny);
    }

    std::vector<double> colmin(ny, kInf);
    double h = 0.0;
    for (std::size_t x = 0; x < nx; ++x) {
        double rowmin = kInf;
        for (std::size_t y = 0; y < ny; ++y) {
            double c = full ? set_hausdorff_sorted(rx[x], ry[y]) : std::fabs(ex[x] - ey[y]);
            if (with_tau) c = std::max(c, std::fabs(X.tau[x] - Y.tau[y]));
            if (c < rowmin) rowmin = c;
            if (c < colmin[y]) colmin[y] = c;
        }
        h = std::max(h, rowmin);
    }
    for (std::size_t y = 0; y < ny; ++y) h = std::max(h, colmin[y]);
    return h;
}

double tau_set_hausdorff(const TimedMetricSpace& X, const TimedMetricSpace& Y) {
    std::vector<double> tx = X.tau, ty = Y.tau;
    std::sort(tx.begin(), tx.end());
    std::sort(ty.begin(), ty.end());
    return set_hausdorff_sorted(tx, ty);
}

double gh_lower_bound(const TimedMetricSpace& X, const TimedMetricSpace& Y) {
    return 0.5 * signature_hausdorff(X, Y, false);
}

// ---------------------------------------------------------------------------
// Assembly helpers
// ---------------------------------------------------------------------------

int canonical_compare(const TimedMetricSpace& X, const TimedMetricSpace& Y) {
    if (X.size() != Y.size()) return X.size() < Y.size() ? -1 : 1;
    for (std::size_t i = 0; i < X.tau.size(); ++i)
        if (X.tau[i] != Y.tau[i]) return X.tau[i] < Y.tau[i] ? -1 : 1;
    for (std::size_t i = 0; i < X.dist.size(); ++i)
        if (X.dist[i] != Y.dist[i]) return X.dist[i] < Y.dist[i] ? -1 : 1;
    return 0;
}

void finalize(DistanceBound& b) {
    if (b.lower > b.upper) {
        if (b.lower > b.upper + 1e-9)
            throw error("distance bound inversion (lower > upper): internal error");
        b.lower = b.upper;
    }
}

bool exact_applicable(const TimedMetricSpace& X, const TimedMetricSpace& Y, const Opts& opts,
                      std::string& note) {
    if (opts.exact_max_n > 5)
        throw argument_error("exact_max_n above 5 is not supported (exact GH is factorial)");
    std::size_t cap = std::size_t(opts.exact_max_n);
    bool ok = X.size() <= cap && Y.size() <= cap && X.size() * Y.size() <= 25;
    if (ok && (X.size() == 5 || Y.size() == 5))
        note = "exact enumeration at n=5: expect seconds, not milliseconds";
    return ok && X.size() >= 1 && Y.size() >= 1;
}

struct Prepared {
    const TimedMetricSpace* X;
    const TimedMetricSpace* Y;
    bool swapped = false;
};

Prepared prepare(const TimedMetricSpace& X, const TimedMetricSpace& Y, const Opts& opts,
                 const char* who, bool allow_empty) {
    if (!opts.skip_validation) {
        if (!X.empty()) require_valid(X, opts.validate_tol, who);
        if (!Y.empty()) require_valid(Y, opts.validate_tol, who);
    }
    if (!allow_empty && (X.empty() || Y.empty()))
        throw precondition_error(std::string(who) + ": empty input");
    Prepared p{&X, &Y, false};
    if (canonical_compare(X, Y) > 0) {
        p.X = &Y;
        p.Y = &X;
        p.swapped = true;  // witnesses transposed on the way out
    }
    return p;
}

void emit_witness(DistanceBound& b, const Pairs& pairs, bool swapped) {
    if (pairs.empty() || pairs.size() > 4096) return;
    Correspondence c;
    c.pairs = pairs;
    b.witness = swapped ? c.transposed() : c;
}

std::optional<DistanceBound> empty_cases(const TimedMetricSpace& X, const TimedMetricSpace& Y) {
    if (X.empty() && Y.empty()) {
        DistanceBound b;
        b.lower = b.upper = 0.0;
        b.method = Method::brute;
        b.exhaustive = true;
        b.note = "both inputs empty";
        return b;
    }
    if (X.empty() || Y.empty()) {
        DistanceBound b;
        b.lower = b.upper = kInf;
        b.method = Method::projection_lb;
        b.note = "empty vs nonempty: distance is never zero; +inf sentinel";
        return b;
    }
    return std::nullopt;
}

template <typename F>
DistanceBound bound_from_objective(const Prepared& p, const Opts& opts, F&& objective,
                                   double lower, Method search_method, std::string note) {
    DistanceBound b;
    b.seed = opts.seed;
    b.note = std::move(note);
    std::string exnote;
    if (exact_applicable(*p.X, *p.Y, opts, exnote)) {
        auto res = enumerate_exact(p.X->size(), p.Y->size(), objective);
        b.lower = b.upper = res.value;
        b.method = search_method == Method::gluing ? Method::gluing : Method::brute;
        b.exhaustive = true;
        b.evals = res.evals;
        emit_witness(b, res.witness, p.swapped);
        if (!exnote.empty()) b.note += (b.note.empty() ? "" : "; ") + exnote;
        if (search_method == Method::gluing) {
            // Exhaustive over correspondences, but the gluing is only one
            // admissible embedding family: keep the projection lower bound.
            b.lower = std::min(b.upper, std::max(lower, 0.0));
        }
        finalize(b);
        return b;
    }
    auto res = search_upper(*p.X, *p.Y, objective, opts);
    b.lower = std::max(lower, 0.0);
    b.upper = res.value;
    b.method = search_method;
    b.evals = res.evals;
    emit_witness(b, res.witness, p.swapped);
    finalize(b);
    return b;
}

} // namespace

const char* method_name(Method m) {
    switch (m) {
        case Method::brute: return "brute";
        case Method::local_search: return "local_search";
        case Method::gluing: return "gluing";
        case Method::projection_lb: return "projection_lb";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

DistanceBound gh(const TimedMetricSpace& X, const TimedMetricSpace& Y, const Opts& opts) {
    if (opts.budget <= 0) throw argument_error("gh: budget must be positive");
    if (auto e = empty_cases(X, Y)) return *e;
    Prepared p = prepare(X, Y, opts, "gh", true);
    double lower = gh_lower_bound(*p.X, *p.Y);
    auto obj = [&](const Pairs& R) { return 0.5 * distortion(*p.X, *p.Y, R); };
    return bound_from_objective(p, opts, obj, lower, Method::local_search, "");
}

DistanceBound timeless_sgh(const TimedMetricSpace& X, const TimedMetricSpace& Y, const Opts& opts) {
    return gh(X, Y, opts);
}

DistanceBound kappa_gh(const TimedMetricSpace& X, const TimedMetricSpace& Y, const Opts& opts) {
    if (opts.budget <= 0) throw argument_error("kappa_gh: budget must be positive");
    Prepared p = prepare(X, Y, opts, "kappa_gh", false);
    double lower = gh_lower_bound(*p.X, *p.Y);
    auto obj = [&](const Pairs& R) { return cost_hausdorff(*p.X, *p.Y, R, false); };
    return bound_from_objective(p, opts, obj, lower, Method::local_search, "");
}

DistanceBound tau_h(const TimedMetricSpace& X, const TimedMetricSpace& Y, const Opts& opts) {
    if (opts.budget <= 0) throw argument_error("tau_h: budget must be positive");
    Prepared p = prepare(X, Y, opts, "tau_h", false);
    double lower = std::max({tau_set_hausdorff(*p.X, *p.Y), signature_hausdorff(*p.X, *p.Y, true),
                             gh_lower_bound(*p.X, *p.Y)});
    auto obj = [&](const Pairs& R) { return cost_hausdorff(*p.X, *p.Y, R, true); };
    return bound_from_objective(p, opts, obj, lower, Method::local_search, "");
}

DistanceBound bb_gh(const TimedMetricSpace& X, const TimedMetricSpace& Y, const Opts& opts) {
    Prepared p = prepare(X, Y, opts, "bb_gh", false);
    if (!p.X->basepoint || !p.Y->basepoint)
        throw precondition_error("bb_gh: both inputs need a big-bang basepoint");
    std::size_t bx = *p.X->basepoint_index(), by = *p.Y->basepoint_index();
    double lower = std::max(tau_set_hausdorff(*p.X, *p.Y), gh_lower_bound(*p.X, *p.Y));
    auto obj = [&, bx, by](const Pairs& R) { return bb_objective(*p.X, *p.Y, R, bx, by); };
    return bound_from_objective(p, opts, obj, lower, Method::gluing,
                                "upper bounds from r-glued disjoint unions");
}

DistanceBound fd_hh(const TimedMetricSpace& X, const TimedMetricSpace& Y, const Opts& opts) {
    Prepared p = prepare(X, Y, opts, "fd_hh", false);
    if (p.X->initial_set.empty() || p.Y->initial_set.empty())
        throw precondition_error("fd_hh: both inputs need an initial set");
    auto mx = p.X->initial_indices(), my = p.Y->initial_indices();
    double lower = std::max(tau_set_hausdorff(*p.X, *p.Y), gh_lower_bound(*p.X, *p.Y));
    auto obj = [&, mx, my](const Pairs& R) { return fd_objective(*p.X, *p.Y, R, mx, my); };
    return bound_from_objective(p, opts, obj, lower, Method::gluing,
                                "upper bounds from r-glued disjoint unions");
}

// ---------------------------------------------------------------------------
// Level and strip aggregations
// ---------------------------------------------------------------------------

LevelBins default_level_bins(const TimedMetricSpace& X, const TimedMetricSpace& Y, int count) {
    if (count < 1) throw argument_error("default_level_bins: count must be >= 1");
    double lo = kInf, hi = -kInf;
    for (double v : X.tau) { lo = std::min(lo, v); hi = std::max(hi, v); }
    for (double v : Y.tau) { lo = std::min(lo, v); hi = std::max(hi, v); }
    if (!(lo <= hi)) throw precondition_error("default_level_bins: both spaces empty");
    LevelBins bins;
    if (count == 1 || hi == lo) {
        bins.centers = {0.5 * (lo + hi)};
        bins.half_width = std::max(0.5 * (hi - lo), 1e-9);
        return bins;
    }
    double spacing = (hi - lo) / (count - 1);
    for (int i = 0; i < count; ++i) bins.centers.push_back(lo + i * spacing);
    bins.half_width = 0.5 * spacing + 1e-12;
    return bins;
}

StripGrid default_strip_grid(const TimedMetricSpace& X, const TimedMetricSpace& Y, int count) {
    if (count < 2) throw argument_error("default_strip_grid: count must be >= 2");
    double lo = kInf, hi = -kInf;
    for (double v : X.tau) { lo = std::min(lo, v); hi = std::max(hi, v); }
    for (double v : Y.tau) { lo = std::min(lo, v); hi = std::max(hi, v); }
    if (!(lo <= hi)) throw precondition_error("default_strip_grid: both spaces empty");
    double step = (hi - lo) / (count - 1);
    StripGrid grid;
    for (int i = 0; i < count; ++i)
        for (int j = i; j < count; ++j) {
            grid.ranges.push_back({lo + i * step, lo + j * step});
            grid.weights.push_back(step * step);
        }
    return grid;
}

namespace {

struct BinReduce {
    double sup_lower = 0.0, sup_upper = 0.0;
    double sum_lower = 0.0, sum_upper = 0.0;
    bool all_exhaustive = true;
    long evals = 0;

    void add(const DistanceBound& b, double weight, double p) {
        sup_lower = std::max(sup_lower, b.lower);
        sup_upper = std::max(sup_upper, b.upper);
        if (weight > 0.0) {
            sum_lower += weight * std::pow(b.lower, p);
            sum_upper += weight * std::pow(b.upper, p);
        }
        all_exhaustive = all_exhaustive && b.exhaustive;
        evals += b.evals;
    }
};

DistanceBound reduce_to_bound(const BinReduce& acc, bool sup_mode, const Opts& opts,
                              std::string note) {
    DistanceBound out;
    out.lower = sup_mode ? acc.sup_lower : acc.sum_lower;
    out.upper = sup_mode ? acc.sup_upper : acc.sum_upper;
    out.method = acc.all_exhaustive ? Method::brute : Method::local_search;
    out.exhaustive = acc.all_exhaustive;
    out.evals = acc.evals;
    out.seed = opts.seed;
    out.note = std::move(note);
    finalize(out);
    return out;
}

DistanceBound per_slice_gh(const TimedMetricSpace& Xs, const TimedMetricSpace& Ys,
                           const Opts& opts) {
    Opts o = opts;
    o.skip_validation = true;  // restrictions of validated spaces stay valid
    return gh(Xs, Ys, o);
}

} // namespace

DistanceBound level_sup_gh(const TimedMetricSpace& X, const TimedMetricSpace& Y,
                           const LevelBins& bins, const Opts& opts) {
    if (bins.centers.empty()) throw argument_error("level_sup_gh: no bins");
    Prepared p = prepare(X, Y, opts, "level_sup_gh", true);
    BinReduce acc;
    for (double c : bins.centers) {
        auto Xl = restrict_level(*p.X, c, bins.half_width);
        auto Yl = restrict_level(*p.Y, c, bins.half_width);
        acc.add(per_slice_gh(Xl, Yl, opts), 0.0, 1.0);
    }
    return reduce_to_bound(acc, true, opts, "sup over level bins");
}

namespace {

void apply_lp_root(DistanceBound& b, double p) {
    if (std::isfinite(b.lower)) b.lower = std::pow(b.lower, 1.0 / p);
    if (std::isfinite(b.upper)) b.upper = std::pow(b.upper, 1.0 / p);
    b.note += (b.note.empty() ? "" : "; ") + std::string("normalized (1/p root applied)");
}

} // namespace

DistanceBound level_lp_gh(const TimedMetricSpace& X, const TimedMetricSpace& Y, double p,
                          const LevelBins& bins, const Opts& opts, bool normalized) {
    if (p < 1.0) throw argument_error("level_lp_gh: p must be >= 1");
    if (bins.centers.empty()) throw argument_error("level_lp_gh: no bins");
    Prepared pr = prepare(X, Y, opts, "level_lp_gh", true);

    double lo = kInf, hi = -kInf;
    for (double v : pr.X->tau) { lo = std::min(lo, v); hi = std::max(hi, v); }
    for (double v : pr.Y->tau) { lo = std::min(lo, v); hi = std::max(hi, v); }
    if (!(lo <= hi)) { lo = bins.centers.front(); hi = bins.centers.back(); }

    auto centers = bins.centers;
    std::sort(centers.begin(), centers.end());
    BinReduce acc;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        // Voronoi cell of this center inside [tau_min, tau_max]; the cell
        // widths sum exactly to the integration range.
        double left = i == 0 ? lo : 0.5 * (centers[i - 1] + centers[i]);
        double right = i + 1 == centers.size() ? hi : 0.5 * (centers[i] + centers[i + 1]);
        double w = std::max(0.0, right - left);
        auto Xl = restrict_level(*pr.X, centers[i], bins.half_width);
        auto Yl = restrict_level(*pr.Y, centers[i], bins.half_width);
        acc.add(per_slice_gh(Xl, Yl, opts), w, p);
    }
    // No p-th root by default: the integral form is used verbatim.
    auto out = reduce_to_bound(acc, false, opts, "Riemann sum of per-level gh^p");
    if (normalized) apply_lp_root(out, p);
    return out;
}

DistanceBound strip_sup_gh(const TimedMetricSpace& X, const TimedMetricSpace& Y,
                           const StripGrid& grid, const Opts& opts) {
    if (grid.ranges.empty()) throw argument_error("strip_sup_gh: empty grid");
    Prepared p = prepare(X, Y, opts, "strip_sup_gh", true);
    BinReduce acc;
    for (auto [s, t] : grid.ranges) {
        if (s > t) throw argument_error("strip_sup_gh: grid pair with s > t");
        auto Xs = restrict_strip(*p.X, s, t);
        auto Ys = restrict_strip(*p.Y, s, t);
        acc.add(per_slice_gh(Xs, Ys, opts), 0.0, 1.0);
    }
    return reduce_to_bound(acc, true, opts, "sup over strips (ambient restricted)");
}

DistanceBound strip_lp_gh(const TimedMetricSpace& X, const TimedMetricSpace& Y, double p,
                          const StripGrid& grid, const Opts& opts, bool normalized) {
    if (p < 1.0) throw argument_error("strip_lp_gh: p must be >= 1");
    if (grid.ranges.empty()) throw argument_error("strip_lp_gh: empty grid");
    if (!grid.weights.empty() && grid.weights.size() != grid.ranges.size())
        throw argument_error("strip_lp_gh: weights size mismatch");
    Prepared pr = prepare(X, Y, opts, "strip_lp_gh", true);
    BinReduce acc;
    for (std::size_t k = 0; k < grid.ranges.size(); ++k) {
        auto [s, t] = grid.ranges[k];
        if (s > t) throw argument_error("strip_lp_gh: grid pair with s > t");
        double w = grid.weights.empty() ? 1.0 : grid.weights[k];
        auto Xs = restrict_strip(*pr.X, s, t);
        auto Ys = restrict_strip(*pr.Y, s, t);
        acc.add(per_slice_gh(Xs, Ys, opts), w, p);
    }
    auto out = reduce_to_bound(acc, false, opts, "double Riemann sum of per-strip gh^p");
    if (normalized) apply_lp_root(out, p);
    return out;
}

DistanceBound tau_h_paired(const TimedMetricSpace& X, const TimedMetricSpace& Y) {
    if (X.size() != Y.size() || X.empty())
        throw precondition_error("tau_h_paired: same-size nonempty inputs required");
    const std::size_t n = X.size();
    double dis = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        dis = std::max(dis, kernels::sup_diff(X.dist.data() + i * n, Y.dist.data() + i * n, n));
    double tmis = kernels::sup_diff(X.tau.data(), Y.tau.data(), n);

    DistanceBound b;
    b.upper = std::max(dis, tmis);
    b.lower = tau_set_hausdorff(X, Y);
    // Cheap eccentricity signature (valid timed lower bound, see
    // signature_hausdorff); the full profile is cubic and skipped here.
    b.lower = std::max(b.lower, signature_hausdorff(X, Y, true));
    b.method = Method::local_search;
    b.evals = 1;
    b.note = "index-paired correspondence, no search";
    finalize(b);
    return b;
}

DistanceBound dispatch(const std::string& op, const TimedMetricSpace& X, const TimedMetricSpace& Y,
                       const Opts& opts, double p, int grid_count) {
    if (op == "gh") return gh(X, Y, opts);
    if (op == "kappa-gh") return kappa_gh(X, Y, opts);
    if (op == "timeless") return timeless_sgh(X, Y, opts);
    if (op == "tau-h") return tau_h(X, Y, opts);
    if (op == "bb-gh") return bb_gh(X, Y, opts);
    if (op == "fd-hh") return fd_hh(X, Y, opts);
    if (op == "level-sup") return level_sup_gh(X, Y, default_level_bins(X, Y, grid_count), opts);
    if (op == "level-lp") return level_lp_gh(X, Y, p, default_level_bins(X, Y, grid_count), opts);
    if (op == "strip-sup") return strip_sup_gh(X, Y, default_strip_grid(X, Y, grid_count), opts);
    if (op == "strip-lp") return strip_lp_gh(X, Y, p, default_strip_grid(X, Y, grid_count), opts);
    throw argument_error("unknown distance op: " + op);
}

} // namespace stm::dist
