#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stm/errors.hpp"

namespace stm {

// A finite metric space with a Lipschitz-1 time function.  This is the
// universal currency of the library: every sampled model, restriction and
// augmentation produces one of these, and every distance consumes them.
//
// Distances are stored as a dense symmetric n x n matrix of doubles.  Sizes
// stay desk-scale (a few thousand points after sampling), so O(n^2) memory
// buys simple, cache-friendly code.
struct TimedMetricSpace {
    std::vector<std::string> ids;
    std::vector<double> tau;
    std::vector<double> dist;  // row-major n*n, symmetric, zero diagonal
    std::optional<std::string> basepoint;   // big-bang marker
    std::vector<std::string> initial_set;   // future-development marker
    std::map<std::string, std::string> meta;
    bool empty_flag = false;   // true when produced by an empty restriction

    std::size_t size() const { return ids.size(); }
    bool empty() const { return ids.empty(); }

    double d(std::size_t i, std::size_t j) const { return dist[i * size() + j]; }
    double& d(std::size_t i, std::size_t j) { return dist[i * size() + j]; }

    void set_d(std::size_t i, std::size_t j, double v) {
        dist[i * size() + j] = v;
        dist[j * size() + i] = v;
    }

    std::size_t index_of(const std::string& id) const;
    std::optional<std::size_t> basepoint_index() const;
    std::vector<std::size_t> initial_indices() const;

    double diameter() const;
    double tau_min() const;
    double tau_max() const;
};

enum class ViolationKind {
    structure,        // matrix shape / NaN / negative values
    diagonal,         // d(i,i) != 0
    symmetry,         // d(i,j) != d(j,i)
    definiteness,     // d(i,j) == 0 for i != j
    triangle,         // d(i,j) > d(i,k) + d(k,j)
    lipschitz,        // |tau(i)-tau(j)| > d(i,j)
    tau_negative,     // tau < 0
    basepoint,        // basepoint row does not satisfy d(bb,x) = tau(x)
    initial_set,      // tau != min dist to initial set
};

const char* violation_name(ViolationKind k);

struct Violation {
    ViolationKind kind;
    std::size_t i = 0, j = 0, k = 0;  // worst offender indices (k for triangle)
    double magnitude = 0.0;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    const Violation* worst() const;
    std::string summary() const;
};

// Checks every TimedMetricSpace invariant within tol and reports one entry
// per violated invariant kind carrying the worst offender.
ValidationReport validate(const TimedMetricSpace& space, double tol = 1e-9);

// Throwing wrapper used by operations whose precondition is a valid space.
void require_valid(const TimedMetricSpace& space, double tol, const char* who);

// R(p,q) true means q lies in the causal past of p, decided from the metric
// and time data alone: tau(p) >= tau(q) and d(p,q) matches tau(p)-tau(q)
// within eps.
struct CausalRelation {
    std::size_t n = 0;
    std::vector<uint8_t> mat;  // row-major n*n
    double eps = 0.0;

    bool at(std::size_t p, std::size_t q) const { return mat[p * n + q] != 0; }
};

CausalRelation causal_relation(const TimedMetricSpace& space, double eps);

struct AxiomCounterexample {
    std::size_t p = 0, q = 0, r = 0;
};

struct CausalAxiomReport {
    bool reflexive = true;
    std::size_t transitivity_violations = 0;
    std::size_t antisymmetry_violations = 0;
    std::optional<AxiomCounterexample> reflexivity_witness;
    std::optional<AxiomCounterexample> transitivity_witness;
    std::optional<AxiomCounterexample> antisymmetry_witness;
    bool strict = false;  // eps == 0: violations are failures, not counts

    bool pass() const {
        return reflexive && (!strict || (transitivity_violations == 0 && antisymmetry_violations == 0));
    }
};

CausalAxiomReport check_causal_axioms(const CausalRelation& rel, const TimedMetricSpace& space);

// Points with |tau - t| <= half_width, distances and tau restricted.
// An empty result is a legal value carrying empty_flag.
TimedMetricSpace restrict_level(const TimedMetricSpace& space, double t, double half_width);

// Points with s <= tau <= t, ambient-restricted distances, tau shifted by -s.
// Original tau values are kept in meta ("strip_shift").
TimedMetricSpace restrict_strip(const TimedMetricSpace& space, double s, double t);

// Exhaustive (pruned) search for a bijection preserving both tau and all
// pairwise distances within tol.  Candidates are ordered by tau and pruned on
// tau mismatch first, then on partial distance-row mismatch.  Sizes above
// kMaxIsometrySize are refused.
inline constexpr std::size_t kMaxIsometrySize = 10;

std::optional<std::vector<std::size_t>> find_time_isometry(const TimedMetricSpace& X,
                                                           const TimedMetricSpace& Y,
                                                           double tol);

} // namespace stm
