#include "stm/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stm::models {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double Warp::operator()(double t) const {
    switch (family) {
        case WarpFamily::constant: return c;
        case WarpFamily::linear: return t;
        case WarpFamily::one_minus_t: return 1.0 - t;
        case WarpFamily::sinusoidal: return 1.0 + a * std::sin(omega * t);
    }
    return 1.0;
}

namespace {

// Continuous antiderivative of 1/(1 + a sin u), |a| < 1.  The atan branch is
// repaired with a floor term so the result is monotone across u = pi + 2k pi.
double sin_conformal_anti(double u, double a) {
    double root = std::sqrt(1.0 - a * a);
    double k = std::floor((u + kPi) / (2.0 * kPi));
    double v = u - 2.0 * kPi * k;  // v in [-pi, pi)
    double val = 2.0 / root * std::atan((std::tan(v / 2.0) + a) / root);
    return val + k * 2.0 * kPi / root;
}

} // namespace

double Warp::conformal(double t1, double t2) const {
    if (t2 < t1) return -conformal(t2, t1);
    switch (family) {
        case WarpFamily::constant:
            return (t2 - t1) / c;
        case WarpFamily::linear:
            if (t1 <= 0.0) return std::numeric_limits<double>::infinity();
            return std::log(t2 / t1);
        case WarpFamily::one_minus_t:
            if (t2 >= 1.0) return std::numeric_limits<double>::infinity();
            return std::log((1.0 - t1) / (1.0 - t2));
        case WarpFamily::sinusoidal:
            return (sin_conformal_anti(omega * t2, a) - sin_conformal_anti(omega * t1, a)) / omega;
    }
    return 0.0;
}

std::string Warp::describe() const {
    std::ostringstream os;
    switch (family) {
        case WarpFamily::constant: os << "const:" << c; break;
        case WarpFamily::linear: os << "linear"; break;
        case WarpFamily::one_minus_t: os << "one_minus_t"; break;
        case WarpFamily::sinusoidal: os << "sin:" << a << "," << omega; break;
    }
    return os.str();
}

int Spatial::coord_count() const {
    switch (kind) {
        case SpatialKind::circle: return 1;
        case SpatialKind::flat_torus: return 2;
        case SpatialKind::euclidean: return dim;
    }
    return 1;
}

namespace {
double wrap_dist(double a, double b, double L) {
    double d = std::fabs(a - b);
    d = std::fmod(d, L);
    return std::min(d, L - d);
}
} // namespace

double Spatial::base_dist(const std::array<double, 3>& x, const std::array<double, 3>& y) const {
    switch (kind) {
        case SpatialKind::circle:
            return wrap_dist(x[0], y[0], L1);
        case SpatialKind::flat_torus: {
            double du = wrap_dist(x[0], y[0], L1);
            double dv = wrap_dist(x[1], y[1], L2);
            return std::sqrt(du * du + dv * dv);
        }
        case SpatialKind::euclidean: {
            double s = 0.0;
            for (int i = 0; i < dim; ++i) {
                double d = x[i] - y[i];
                s += d * d;
            }
            return std::sqrt(s);
        }
    }
    return 0.0;
}

void SpacetimeModel::check() const {
    if (t_lo < 0.0 || !(t_lo < t_hi))
        throw argument_error("model: window requires 0 <= t_lo < t_hi");
    switch (warp.family) {
        case WarpFamily::constant:
            if (warp.c <= 0.0) throw argument_error("model: constant warp requires c > 0");
            break;
        case WarpFamily::linear:
            break;  // vanishes only at t = 0, the big-bang slice
        case WarpFamily::one_minus_t:
            if (t_hi >= 1.0) throw argument_error("model: one_minus_t warp requires t_hi < 1");
            break;
        case WarpFamily::sinusoidal:
            if (std::fabs(warp.a) >= 1.0)
                throw argument_error("model: sinusoidal warp requires |a| < 1");
            break;
    }
    if (kind == ModelKind::minkowski_region) {
        if (region.kind == RegionKind::none)
            throw argument_error("model: minkowski_region requires a region descriptor");
        if (spatial.kind != SpatialKind::euclidean)
            throw argument_error("model: region predicates need a euclidean spatial factor");
        if (warp.family != WarpFamily::constant || warp.c != 1.0)
            throw argument_error("model: region predicates need warp const(1)");
        if (region.kind == RegionKind::past_of_ring && spatial.dim < 2)
            throw argument_error("model: past_of_ring needs spatial dimension >= 2");
    } else if (region.kind != RegionKind::none) {
        throw argument_error("model: regions only apply to minkowski_region models");
    }
    if (spatial.kind == SpatialKind::euclidean && (spatial.dim < 1 || spatial.dim > 3))
        throw argument_error("model: euclidean dimension must be 1..3");
}

double eval_tau(const SpacetimeModel& m, const ModelPoint& p) {
    if (!in_domain(m, p)) throw precondition_error("eval_tau: point outside model domain");
    return p.t - m.t_lo;
}

bool in_domain(const SpacetimeModel& m, const ModelPoint& p) {
    double lo = m.open_at_zero() ? 0.0 : m.t_lo;
    if (p.t < lo - 1e-12 || p.t > m.t_hi + 1e-12) return false;
    if (m.open_at_zero() && p.t <= 0.0) return false;
    if (m.kind == ModelKind::minkowski_region) return region_contains(m, p);
    return true;
}

bool region_contains(const SpacetimeModel& m, const ModelPoint& p) {
    if (m.kind != ModelKind::minkowski_region)
        throw precondition_error("region_contains: model has no region");
    const Region& r = m.region;
    if (p.t < m.t_lo - 1e-12 || p.t > m.t_hi + 1e-12) return false;
    switch (r.kind) {
        case RegionKind::none:
            return true;
        case RegionKind::strip: {
            for (int i = 0; i < m.spatial.dim; ++i)
                if (std::fabs(p.x[i]) > r.half_extent + 1e-12) return false;
            return true;
        }
        case RegionKind::past_of_point: {
            if (p.t > std::min(r.t_p, m.t_hi) + 1e-12) return false;
            double s = 0.0;
            for (int i = 0; i < m.spatial.dim; ++i) {
                double d = p.x[i] - r.x_p[i];
                s += d * d;
            }
            return std::sqrt(s) <= r.t_p - p.t + 1e-12;
        }
        case RegionKind::past_of_ring: {
            double s = 0.0;
            for (int i = 0; i < m.spatial.dim; ++i) s += p.x[i] * p.x[i];
            double rad = std::sqrt(s);
            return std::fabs(rad - r.R) <= 3.0 * m.t_hi - p.t + 1e-12;
        }
    }
    return false;
}

double region_diameter_bound(const SpacetimeModel& m) {
    if (m.kind != ModelKind::minkowski_region)
        throw precondition_error("region_diameter_bound: model has no region");
    const Region& r = m.region;
    double height = m.t_hi - m.t_lo;
    switch (r.kind) {
        case RegionKind::past_of_point:
            return height + 2.0 * (r.t_p - m.t_lo);
        case RegionKind::strip:
            return height + 2.0 * std::sqrt(double(m.spatial.dim)) * r.half_extent;
        case RegionKind::past_of_ring:
            // Over-estimate: climb the band, walk half the outer ring, climb
            // back; labeled as derived in metadata.
            return height + kPi * (r.R + 3.0 * m.t_hi) + 2.0 * 3.0 * m.t_hi;
        case RegionKind::none:
            break;
    }
    throw precondition_error("region_diameter_bound: unsupported region");
}

namespace {

bool segment_in_region(const SpacetimeModel& m, const ModelPoint& p, const ModelPoint& q) {
    const Region& r = m.region;
    if (r.kind == RegionKind::strip || r.kind == RegionKind::past_of_point ||
        r.kind == RegionKind::none) {
        // Convex regions: endpoints suffice.
        return true;
    }
    // past_of_ring is not convex; sample the open segment.
    const int kSamples = 32;
    for (int s = 1; s <= kSamples; ++s) {
        double u = double(s) / (kSamples + 1);
        ModelPoint mid;
        mid.t = q.t + u * (p.t - q.t);
        for (int i = 0; i < 3; ++i) mid.x[i] = q.x[i] + u * (p.x[i] - q.x[i]);
        if (!region_contains(m, mid)) return false;
    }
    return true;
}

} // namespace

bool is_causal(const SpacetimeModel& m, const ModelPoint& p, const ModelPoint& q) {
    if (!in_domain(m, p) || !in_domain(m, q))
        throw precondition_error("is_causal: point outside model domain");
    if (q.t > p.t) return false;
    double reach;
    if (m.kind == ModelKind::minkowski_region) {
        reach = p.t - q.t;
        double d = m.spatial.base_dist(p.x, q.x);
        if (d > reach + 1e-15) return false;
        return segment_in_region(m, p, q);
    }
    reach = m.warp.conformal(q.t, p.t);
    double d = m.spatial.base_dist(p.x, q.x);
    return d <= reach + 1e-15;
}

namespace {

// Null distance between two points on the same slice tau0 of the linear-warp
// circle, with travel not allowed below floor_t.  The optimal chain descends
// both light cones to the meeting depth tau0*exp(-phi/2) when the floor
// permits; otherwise it descends to the floor, where angular travel costs
// floor_t per radian and each descent leg covers log(tau0/floor_t) radians
// for free.
double linear_circle_same_slice(double tau0, double phi, double floor_t) {
    double meet = tau0 * std::exp(-phi / 2.0);
    if (floor_t <= meet) return 2.0 * (tau0 - meet);
    return 2.0 * (tau0 - floor_t) + floor_t * (phi + 2.0 * std::log(floor_t / tau0));
}

} // namespace

std::optional<double> null_dist_oracle(const SpacetimeModel& m, const ModelPoint& p,
                                       const ModelPoint& q) {
    if (is_causal(m, p, q)) return eval_tau(m, p) - eval_tau(m, q);
    if (is_causal(m, q, p)) return eval_tau(m, q) - eval_tau(m, p);

    bool product_formula =
        (m.kind == ModelKind::warped_product && m.warp.family == WarpFamily::constant) ||
        (m.kind == ModelKind::minkowski_region &&
         (m.region.kind == RegionKind::strip || m.region.kind == RegionKind::past_of_point));
    if (product_formula) {
        double scale = (m.kind == ModelKind::warped_product) ? m.warp.c : 1.0;
        return std::max(std::fabs(p.t - q.t), scale * m.spatial.base_dist(p.x, q.x));
    }
    if (m.kind == ModelKind::warped_product && m.warp.family == WarpFamily::linear &&
        m.spatial.kind == SpatialKind::circle && std::fabs(p.t - q.t) < 1e-12) {
        double phi = m.spatial.base_dist(p.x, q.x) * (2.0 * kPi / m.spatial.L1);
        double floor_t = m.open_at_zero() ? 0.0 : m.t_lo;
        return linear_circle_same_slice(p.t, phi, floor_t);
    }
    return std::nullopt;
}

std::optional<double> null_dist_strip_oracle(const SpacetimeModel& m, const ModelPoint& p,
                                             const ModelPoint& q, double floor_t) {
    if (m.kind != ModelKind::warped_product || m.warp.family != WarpFamily::linear ||
        m.spatial.kind != SpatialKind::circle || std::fabs(p.t - q.t) > 1e-12)
        return std::nullopt;
    if (is_causal(m, p, q) || is_causal(m, q, p))
        return std::fabs(eval_tau(m, p) - eval_tau(m, q));
    double phi = m.spatial.base_dist(p.x, q.x) * (2.0 * kPi / m.spatial.L1);
    return linear_circle_same_slice(p.t, phi, floor_t);
}

double proper_time_segment(const SpacetimeModel& m, const ModelPoint& p, const ModelPoint& q,
                           int n_quad) {
    if (n_quad < 1) throw argument_error("proper_time_segment: n_quad must be >= 1");
    if (!is_causal(m, p, q))
        throw precondition_error("proper_time_segment: pair is not causal");
    double dt = p.t - q.t;
    double D = m.spatial.base_dist(p.x, q.x);
    if (m.kind == ModelKind::minkowski_region) {
        double v = dt * dt - D * D;
        return v > 0.0 ? std::sqrt(v) : 0.0;
    }
    if (dt == 0.0) return 0.0;
    double sum = 0.0;
    for (int i = 0; i < n_quad; ++i) {
        double s = (i + 0.5) / n_quad;
        double f = m.warp(q.t + s * dt);
        double v = dt * dt - f * f * D * D;
        if (v > 0.0) sum += std::sqrt(v);
    }
    return sum / n_quad;
}

} // namespace stm::models
