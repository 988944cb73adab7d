#include "stm/core.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace stm {

std::size_t TimedMetricSpace::index_of(const std::string& id) const {
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i] == id) return i;
    throw argument_error("unknown point id: " + id);
}

std::optional<std::size_t> TimedMetricSpace::basepoint_index() const {
    if (!basepoint) return std::nullopt;
    return index_of(*basepoint);
}

std::vector<std::size_t> TimedMetricSpace::initial_indices() const {
    std::vector<std::size_t> out;
    out.reserve(initial_set.size());
    for (const auto& id : initial_set) out.push_back(index_of(id));
    return out;
}

double TimedMetricSpace::diameter() const {
    double m = 0.0;
    for (double v : dist) m = std::max(m, v);
    return m;
}

double TimedMetricSpace::tau_min() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : tau) m = std::min(m, v);
    return m;
}

double TimedMetricSpace::tau_max() const {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : tau) m = std::max(m, v);
    return m;
}

const char* violation_name(ViolationKind k) {
    switch (k) {
        case ViolationKind::structure: return "structure";
        case ViolationKind::diagonal: return "diagonal";
        case ViolationKind::symmetry: return "symmetry";
        case ViolationKind::definiteness: return "definiteness";
        case ViolationKind::triangle: return "triangle";
        case ViolationKind::lipschitz: return "lipschitz";
        case ViolationKind::tau_negative: return "tau_negative";
        case ViolationKind::basepoint: return "basepoint";
        case ViolationKind::initial_set: return "initial_set";
    }
    return "?";
}

const Violation* ValidationReport::worst() const {
    const Violation* w = nullptr;
    for (const auto& v : violations)
        if (!w || v.magnitude > w->magnitude) w = &v;
    return w;
}

std::string ValidationReport::summary() const {
    if (ok()) return "valid";
    std::ostringstream os;
    for (const auto& v : violations) {
        os << violation_name(v.kind) << "(i=" << v.i << ",j=" << v.j << ",k=" << v.k
           << ",mag=" << v.magnitude << ") ";
    }
    return os.str();
}

ValidationReport validate(const TimedMetricSpace& space, double tol) {
    ValidationReport rep;
    const std::size_t n = space.size();
    if (n == 0) {
        if (!space.empty_flag)
            rep.violations.push_back({ViolationKind::structure, 0, 0, 0, 0.0});
        return rep;
    }
    if (space.tau.size() != n || space.dist.size() != n * n) {
        rep.violations.push_back({ViolationKind::structure, 0, 0, 0,
                                  double(space.dist.size())});
        return rep;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(space.tau[i])) {
            rep.violations.push_back({ViolationKind::structure, i, 0, 0, 0.0});
            return rep;
        }
    }
    for (double v : space.dist) {
        if (!std::isfinite(v) || v < -tol) {
            rep.violations.push_back({ViolationKind::structure, 0, 0, 0, v});
            return rep;
        }
    }

    auto note = [&](ViolationKind kind, std::size_t i, std::size_t j, std::size_t k, double mag) {
        for (auto& v : rep.violations) {
            if (v.kind == kind) {
                if (mag > v.magnitude) v = {kind, i, j, k, mag};
                return;
            }
        }
        rep.violations.push_back({kind, i, j, k, mag});
    };

    for (std::size_t i = 0; i < n; ++i) {
        double diag = std::fabs(space.d(i, i));
        if (diag > tol) note(ViolationKind::diagonal, i, i, 0, diag);
        if (space.tau[i] < -tol) note(ViolationKind::tau_negative, i, 0, 0, -space.tau[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double asym = std::fabs(space.d(i, j) - space.d(j, i));
            if (asym > tol) note(ViolationKind::symmetry, i, j, 0, asym);
            if (space.d(i, j) <= tol && space.d(j, i) <= tol)
                note(ViolationKind::definiteness, i, j, 0, tol - space.d(i, j));
            double lip = std::fabs(space.tau[i] - space.tau[j]) - space.d(i, j);
            if (lip > tol) note(ViolationKind::lipschitz, i, j, 0, lip);
        }
    }
    // Full cubic triangle sweep up to 400 points; beyond that a seeded sample
    // of 500k triples (the pairwise invariants above stay exhaustive).
    if (n <= 400) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == i || k == j) continue;
                    double gap = space.d(i, j) - (space.d(i, k) + space.d(k, j));
                    if (gap > tol) note(ViolationKind::triangle, i, j, k, gap);
                }
            }
        }
    } else {
        std::mt19937_64 rng(0x7121A & n);
        for (int s = 0; s < 500000; ++s) {
            std::size_t i = rng() % n, j = rng() % n, k = rng() % n;
            if (i == j || j == k || i == k) continue;
            double gap = space.d(i, j) - (space.d(i, k) + space.d(k, j));
            if (gap > tol) note(ViolationKind::triangle, i, j, k, gap);
        }
    }
    if (space.basepoint) {
        std::size_t b = space.index_of(*space.basepoint);
        double worst = std::fabs(space.tau[b]);
        std::size_t wi = b;
        for (std::size_t i = 0; i < n; ++i) {
            double gap = std::fabs(space.d(b, i) - space.tau[i]);
            if (gap > worst) { worst = gap; wi = i; }
        }
        if (worst > tol) note(ViolationKind::basepoint, b, wi, 0, worst);
    }
    if (!space.initial_set.empty()) {
        auto init = space.initial_indices();
        double worst = 0.0;
        std::size_t wi = 0;
        for (std::size_t q : init) worst = std::max(worst, std::fabs(space.tau[q]));
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t q : init) best = std::min(best, space.d(i, q));
            double gap = std::fabs(space.tau[i] - best);
            if (gap > worst) { worst = gap; wi = i; }
        }
        if (worst > tol) note(ViolationKind::initial_set, wi, 0, 0, worst);
    }
    return rep;
}

void require_valid(const TimedMetricSpace& space, double tol, const char* who) {
    auto rep = validate(space, tol);
    if (!rep.ok())
        throw validation_error(std::string(who) + ": invalid space: " + rep.summary());
}

CausalRelation causal_relation(const TimedMetricSpace& space, double eps) {
    if (eps < 0) throw argument_error("causal_relation: eps must be >= 0");
    const std::size_t n = space.size();
    CausalRelation rel;
    rel.n = n;
    rel.eps = eps;
    rel.mat.assign(n * n, 0);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            double dt = space.tau[p] - space.tau[q];
            if (dt >= 0.0 && std::fabs(space.d(p, q) - dt) <= eps)
                rel.mat[p * n + q] = 1;
        }
    }
    return rel;
}

CausalAxiomReport check_causal_axioms(const CausalRelation& rel, const TimedMetricSpace& space) {
    CausalAxiomReport rep;
    rep.strict = (rel.eps == 0.0);
    const std::size_t n = rel.n;
    for (std::size_t p = 0; p < n; ++p) {
        if (!rel.at(p, p)) {
            rep.reflexive = false;
            if (!rep.reflexivity_witness) rep.reflexivity_witness = {p, p, p};
        }
    }
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (!rel.at(p, q)) continue;
            if (q != p && rel.at(q, p)) {
                // Skip pairs with equal tau and zero distance: impossible on
                // definite spaces, guarded anyway.
                bool degenerate = space.tau[p] == space.tau[q] && space.d(p, q) == 0.0;
                if (!degenerate && space.tau[p] != space.tau[q]) {
                    ++rep.antisymmetry_violations;
                    if (!rep.antisymmetry_witness) rep.antisymmetry_witness = {p, q, q};
                }
            }
            for (std::size_t r = 0; r < n; ++r) {
                if (rel.at(q, r) && !rel.at(p, r)) {
                    ++rep.transitivity_violations;
                    if (!rep.transitivity_witness) rep.transitivity_witness = {p, q, r};
                }
            }
        }
    }
    return rep;
}

namespace {

TimedMetricSpace take_subset(const TimedMetricSpace& space, const std::vector<std::size_t>& keep) {
    TimedMetricSpace out;
    const std::size_t m = keep.size();
    out.ids.reserve(m);
    out.tau.reserve(m);
    out.dist.assign(m * m, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
        out.ids.push_back(space.ids[keep[a]]);
        out.tau.push_back(space.tau[keep[a]]);
    }
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            out.dist[a * m + b] = space.d(keep[a], keep[b]);
    if (space.basepoint) {
        for (std::size_t a = 0; a < m; ++a)
            if (space.ids[keep[a]] == *space.basepoint) out.basepoint = *space.basepoint;
    }
    for (const auto& id : space.initial_set) {
        for (std::size_t a = 0; a < m; ++a)
            if (out.ids[a] == id) { out.initial_set.push_back(id); break; }
    }
    out.meta = space.meta;
    out.empty_flag = out.ids.empty();
    return out;
}

} // namespace

TimedMetricSpace restrict_level(const TimedMetricSpace& space, double t, double half_width) {
    if (half_width < 0) throw argument_error("restrict_level: half_width must be >= 0");
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < space.size(); ++i)
        if (std::fabs(space.tau[i] - t) <= half_width) keep.push_back(i);
    TimedMetricSpace out = take_subset(space, keep);
    out.meta["level_t"] = std::to_string(t);
    return out;
}

TimedMetricSpace restrict_strip(const TimedMetricSpace& space, double s, double t) {
    if (s > t) throw argument_error("restrict_strip: requires s <= t");
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < space.size(); ++i)
        if (space.tau[i] >= s && space.tau[i] <= t) keep.push_back(i);
    TimedMetricSpace out = take_subset(space, keep);
    for (auto& v : out.tau) v -= s;
    out.meta["strip_shift"] = std::to_string(s);
    return out;
}

namespace {

struct IsometrySearch {
    const TimedMetricSpace& X;
    const TimedMetricSpace& Y;
    double tol;
    std::vector<std::size_t> order;     // X indices, sorted by tau
    std::vector<std::size_t> assign;    // order position -> Y index
    std::vector<uint8_t> used;          // Y index taken

    bool feasible(std::size_t pos, std::size_t y) const {
        std::size_t x = order[pos];
        if (std::fabs(Y.tau[y] - X.tau[x]) > tol) return false;
        for (std::size_t p = 0; p < pos; ++p) {
            std::size_t xp = order[p];
            std::size_t yp = assign[p];
            if (std::fabs(Y.d(yp, y) - X.d(xp, x)) > tol) return false;
        }
        return true;
    }

    bool solve(std::size_t pos) {
        if (pos == order.size()) return true;
        for (std::size_t y = 0; y < Y.size(); ++y) {
            if (used[y] || !feasible(pos, y)) continue;
            used[y] = 1;
            assign[pos] = y;
            if (solve(pos + 1)) return true;
            used[y] = 0;
        }
        return false;
    }
};

} // namespace

std::optional<std::vector<std::size_t>> find_time_isometry(const TimedMetricSpace& X,
                                                           const TimedMetricSpace& Y,
                                                           double tol) {
    if (tol < 0) throw argument_error("find_time_isometry: tol must be >= 0");
    if (X.size() != Y.size()) return std::nullopt;
    if (X.size() > kMaxIsometrySize)
        throw capability_error("find_time_isometry: size exceeds factorial-search cap of 10");
    if (X.empty()) return std::vector<std::size_t>{};

    IsometrySearch s{X, Y, tol, {}, {}, {}};
    s.order.resize(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) s.order[i] = i;
    std::sort(s.order.begin(), s.order.end(),
              [&](std::size_t a, std::size_t b) { return X.tau[a] < X.tau[b]; });
    s.assign.assign(X.size(), 0);
    s.used.assign(Y.size(), 0);
    if (!s.solve(0)) return std::nullopt;

    std::vector<std::size_t> f(X.size());
    for (std::size_t p = 0; p < s.order.size(); ++p) f[s.order[p]] = s.assign[p];
    return f;
}

} // namespace stm
