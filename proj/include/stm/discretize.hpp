#pragma once
#include <cstdint>
#include <optional>
#include <vector>

#include "stm/core.hpp"
#include "stm/models.hpp"

namespace stm::discretize {

struct GraphNode {
    models::ModelPoint pt;
    double tau = 0.0;
};

// Directed causal edges q -> p (q in the past of p) in CSR form, with the
// reverse adjacency alongside.  null weight is tau(p) - tau(q); proper weight
// is the quadrature proper time of the straight segment.  Restricted to
// causal edges the graph is a DAG: tau strictly increases along every edge.
struct CausalGraph {
    models::SpacetimeModel model;
    std::vector<GraphNode> nodes;
    double window_radius = 0.0;
    int n_quad = 64;

    // edge e: from[e] -> to[e]
    std::vector<int> from, to;
    std::vector<double> w_null, w_proper;

    // out CSR: edges leaving node u (u = from), in CSR: edges entering
    std::vector<int> out_off, out_edge;
    std::vector<int> in_off, in_edge;

    std::size_t node_count() const { return nodes.size(); }
    std::size_t edge_count() const { return from.size(); }
};

struct SampleOptions {
    // Half-cell jitter fraction in [0, 0.5); 0 gives the regular grid.
    double jitter = 0.0;
    uint64_t seed = 0;
};

// Regular product grid over time_window x spatial domain; region kinds filter
// by containment, open-at-zero windows start at t_hi/nt.
std::vector<models::ModelPoint> sample_grid(const models::SpacetimeModel& m, int nt, int nx,
                                            std::optional<int> nx2 = std::nullopt,
                                            const SampleOptions& opts = {});

// Max cell extent (time cell vs warped spatial cell), the scalar that
// window_radius multiples refer to.
double grid_spacing(const models::SpacetimeModel& m, int nt, int nx);

CausalGraph build_causal_graph(const models::SpacetimeModel& m,
                               const std::vector<models::ModelPoint>& nodes,
                               double window_radius, int n_quad = 64);

// Single-source shortest path over the undirected causal edge set with null
// weights; unreachable entries are +inf.
std::vector<double> null_distance_from(const CausalGraph& g, int source);

// All-pairs null distance as a TimedMetricSpace (node tau carried over).
// Throws disconnected_error naming a witness pair if the graph is not
// connected as an undirected graph.
TimedMetricSpace null_distance_matrix(const CausalGraph& g, int threads = 1);

// Longest causal chain weighted by proper time, by topological order.
std::vector<double> cosmological_time(const CausalGraph& g);

// Argmax-predecessor chain from node down to a minimal node; ties broken by
// smaller spatial distance, then lower node index.
std::vector<int> generator_chain(const CausalGraph& g, const std::vector<double>& tau_hat,
                                 int node);

// Nodes with s <= tau <= t (node tau, i.e. analytic cosmological time of the
// window), shortest paths recomputed inside the strip, tau shifted by -s.
TimedMetricSpace strip_null_distance(const CausalGraph& g, double s, double t, int threads = 1);

// Strip restriction of the graph itself: kept node indices plus single-source
// distances inside the strip (for grids too large for dense matrices).
std::vector<int> strip_nodes(const CausalGraph& g, double s, double t);
std::vector<double> strip_null_distance_from(const CausalGraph& g, double s, double t,
                                             int source_in_strip);

// Adds the synthetic big-bang point at tau 0 with d(p_BB, x) = tau(x).
// Fails when the result does not validate (the input was not big-bang-like);
// guard_frac bounds the bottom-level diameter relative to the space diameter.
TimedMetricSpace augment_big_bang(const TimedMetricSpace& space, double guard_frac = 0.25,
                                  double tol = 1e-6);

// Marks initial_set = {x : tau(x) <= tol} and verifies the distance-from-
// initial-data property, recording the worst residual in meta.
TimedMetricSpace mark_initial_set(const TimedMetricSpace& space, double tol);

// Reachability over directed causal edges (true graph causality for tests).
std::vector<uint8_t> causal_reachability(const CausalGraph& g, int source);

} // namespace stm::discretize
