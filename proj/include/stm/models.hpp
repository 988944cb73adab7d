#pragma once
#include <array>
#include <optional>
#include <string>

#include "stm/errors.hpp"

namespace stm::models {

// The warp catalog is closed so that causal predicates have exact integrals.
// Arbitrary user expressions are rejected: the causal predicate is the trust
// anchor for every discrete computation downstream.
enum class WarpFamily { constant, linear, one_minus_t, sinusoidal };

struct Warp {
    WarpFamily family = WarpFamily::constant;
    double c = 1.0;      // constant
    double a = 0.0;      // sinusoidal amplitude, |a| < 1
    double omega = 1.0;  // sinusoidal frequency

    double operator()(double t) const;
    // Conformal time: integral of ds / f(s) from t1 to t2 (t1 <= t2), exact.
    double conformal(double t1, double t2) const;
    std::string describe() const;
};

enum class SpatialKind { circle, flat_torus, euclidean };

struct Spatial {
    SpatialKind kind = SpatialKind::circle;
    double L1 = 2.0 * 3.14159265358979323846;  // circumference / torus side
    double L2 = 1.0;                           // second torus side
    int dim = 1;                               // euclidean dimension, 1..3

    int coord_count() const;
    // Geodesic distance in the unwarped base metric.
    double base_dist(const std::array<double, 3>& x, const std::array<double, 3>& y) const;
};

enum class RegionKind { none, strip, past_of_point, past_of_ring };

struct Region {
    RegionKind kind = RegionKind::none;
    // past_of_point: apex (t_p, x_p)
    double t_p = 1.0;
    std::array<double, 3> x_p{0, 0, 0};
    // past_of_ring: radius R of the ring at height 3*t_hi
    double R = 10.0;
    // strip: spatial box half-extent
    double half_extent = 1.0;
};

enum class ModelKind { warped_product, minkowski_region };

struct ModelPoint {
    double t = 0.0;
    std::array<double, 3> x{0, 0, 0};
};

struct SpacetimeModel {
    ModelKind kind = ModelKind::warped_product;
    Spatial spatial;
    Warp warp;
    double t_lo = 0.0;
    double t_hi = 1.0;
    Region region;

    // Big-bang style window: the warp vanishes at t = 0 and the window is
    // open there; samplers never place a node on the singular slice.
    bool open_at_zero() const {
        return t_lo == 0.0 && warp.family == WarpFamily::linear;
    }
    void check() const;  // throws argument_error on catalog violations
};

// Cosmological time of the windowed model: t - t_lo (time since the window's
// initial slice).  Exact, no quadrature.
double eval_tau(const SpacetimeModel& m, const ModelPoint& p);

bool in_domain(const SpacetimeModel& m, const ModelPoint& p);

// q in the causal past of p.  Warped products use the exact conformal-time
// cone; Minkowski regions use the flat cone plus region containment of the
// connecting segment (endpoint test suffices on the convex region kinds; the
// non-convex ring region samples 32 interior points, an approximation noted
// in results metadata).
bool is_causal(const SpacetimeModel& m, const ModelPoint& p, const ModelPoint& q);

// Exact null distance where a closed form is known, else nullopt:
//   (a) constant warp products and Minkowski strips: max(|dt|, spatial);
//   (b,c) linear warp on a circle, both points on one time slice: the
//         descend-travel-ascend chain optimum, ambient or strip-floored;
//   (d) causal pairs in any model: tau(p) - tau(q).
std::optional<double> null_dist_oracle(const SpacetimeModel& m, const ModelPoint& p,
                                       const ModelPoint& q);

// Same-slice linear-warp circle value with an explicit floor (in model t
// coordinates); used for cosmic-strip expectations.
std::optional<double> null_dist_strip_oracle(const SpacetimeModel& m, const ModelPoint& p,
                                             const ModelPoint& q, double floor_t);

// Lorentzian length of the straight coordinate segment from q to p (q in the
// past of p), midpoint rule with n_quad panels.  Underestimates the true
// proper time; returns ~0 on null-boundary segments.
double proper_time_segment(const SpacetimeModel& m, const ModelPoint& p, const ModelPoint& q,
                           int n_quad = 64);

bool region_contains(const SpacetimeModel& m, const ModelPoint& p);

// Null-distance diameter bound for the region kinds.  The past-of-point
// bound is sharp; the ring bound is a deliberate over-estimate (height +
// half perimeter + band width) and is labeled as such in metadata.
double region_diameter_bound(const SpacetimeModel& m);

} // namespace stm::models
