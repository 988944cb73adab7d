#pragma once
#include <string>
#include <vector>

#include "stm/core.hpp"

namespace stm::embed {

// Image of a finite timed metric space under a (timed-)Kuratowski map into
// finite-dimensional sup-norm space.  Coordinate 0 holds tau when timed.
struct EmbeddedCloud {
    std::size_t dim = 0;
    bool timed = false;
    std::vector<std::string> landmark_ids;  // coordinates 1..k when timed, 0..k-1 otherwise
    std::vector<double> points;             // row-major count x dim
    std::size_t count = 0;

    const double* row(std::size_t i) const { return points.data() + i * dim; }
};

// x -> (d(x_1,x), ..., d(x_k,x)).  The landmark order must cover every point
// (finite spaces are their own dense subsets); repetition is allowed and
// changes nothing.
EmbeddedCloud kuratowski(const TimedMetricSpace& space, const std::vector<std::string>& landmark_order);

// x -> (tau(x), d(x_1,x), ..., d(x_k,x)); distance and time preserving.
EmbeddedCloud timed_kuratowski(const TimedMetricSpace& space, const std::vector<std::string>& landmark_order);

// Hausdorff distance between clouds of equal dimension under the sup norm.
double hausdorff_sup(const EmbeddedCloud& A, const EmbeddedCloud& B);

} // namespace stm::embed
