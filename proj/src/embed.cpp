#include "stm/embed.hpp"

#include <algorithm>
#include <limits>

#include "stm/kernels.hpp"

namespace stm::embed {

namespace {

EmbeddedCloud build(const TimedMetricSpace& space, const std::vector<std::string>& order,
                    bool timed) {
    const std::size_t n = space.size();
    std::vector<std::size_t> landmarks;
    landmarks.reserve(order.size());
    std::vector<uint8_t> covered(n, 0);
    for (const auto& id : order) {
        std::size_t i = space.index_of(id);  // throws on unknown id
        landmarks.push_back(i);
        covered[i] = 1;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!covered[i])
            throw argument_error("kuratowski: landmark order must cover every point (missing " +
                                 space.ids[i] + ")");

    EmbeddedCloud cloud;
    cloud.timed = timed;
    cloud.landmark_ids = order;
    cloud.dim = landmarks.size() + (timed ? 1 : 0);
    cloud.count = n;
    cloud.points.resize(cloud.dim * n);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = cloud.points.data() + i * cloud.dim;
        std::size_t c = 0;
        if (timed) row[c++] = space.tau[i];
        for (std::size_t l : landmarks) row[c++] = space.d(l, i);
    }
    return cloud;
}

} // namespace

EmbeddedCloud kuratowski(const TimedMetricSpace& space, const std::vector<std::string>& order) {
    return build(space, order, false);
}

EmbeddedCloud timed_kuratowski(const TimedMetricSpace& space, const std::vector<std::string>& order) {
    return build(space, order, true);
}

double hausdorff_sup(const EmbeddedCloud& A, const EmbeddedCloud& B) {
    if (A.dim != B.dim) throw argument_error("hausdorff_sup: dimension mismatch");
    if (A.timed != B.timed) throw argument_error("hausdorff_sup: timed flag mismatch");
    if (A.count == 0 && B.count == 0) return 0.0;
    if (A.count == 0 || B.count == 0) return std::numeric_limits<double>::infinity();

    double h = 0.0;
    for (std::size_t i = 0; i < A.count; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < B.count; ++j)
            best = std::min(best, kernels::sup_diff(A.row(i), B.row(j), A.dim));
        h = std::max(h, best);
    }
    for (std::size_t j = 0; j < B.count; ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < A.count; ++i)
            best = std::min(best, kernels::sup_diff(A.row(i), B.row(j), A.dim));
        h = std::max(h, best);
    }
    return h;
}

} // namespace stm::embed
