#include "stm/io.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace stm::io {

namespace {

void require_finite(double v, const char* where) {
    if (!std::isfinite(v)) throw io_error(std::string("non-finite value in ") + where);
}

json meta_to_json(const std::map<std::string, std::string>& meta) {
    json j = json::object();
    for (const auto& [k, v] : meta) j[k] = v;
    return j;
}

std::map<std::string, std::string> meta_from_json(const json& j) {
    std::map<std::string, std::string> meta;
    if (j.is_object())
        for (auto it = j.begin(); it != j.end(); ++it)
            meta[it.key()] = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
    return meta;
}

} // namespace

json to_json(const TimedMetricSpace& space) {
    json j;
    j["schema"] = "tms-v1";
    json pts = json::array();
    for (std::size_t i = 0; i < space.size(); ++i) {
        require_finite(space.tau[i], "tau");
        pts.push_back({{"id", space.ids[i]}, {"tau", space.tau[i]}});
    }
    j["points"] = std::move(pts);
    json vals = json::array();
    const std::size_t n = space.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 1; k < n; ++k) {
            require_finite(space.d(i, k), "dist");
            vals.push_back(space.d(i, k));
        }
    j["dist"] = {{"format", "dense-upper"}, {"values", std::move(vals)}};
    if (space.basepoint) j["basepoint"] = *space.basepoint;
    if (!space.initial_set.empty()) j["initial_set"] = space.initial_set;
    j["meta"] = meta_to_json(space.meta);
    if (space.empty_flag) j["empty"] = true;
    return j;
}

TimedMetricSpace space_from_json(const json& j) {
    if (!j.is_object() || j.value("schema", "") != "tms-v1")
        throw io_error("expected tms-v1 document");
    TimedMetricSpace s;
    for (const auto& p : j.at("points")) {
        s.ids.push_back(p.at("id").get<std::string>());
        double t = p.at("tau").get<double>();
        if (!std::isfinite(t)) throw io_error("tms-v1: non-finite tau");
        s.tau.push_back(t);
    }
    const std::size_t n = s.ids.size();
    const auto& dist = j.at("dist");
    if (dist.value("format", "") != "dense-upper")
        throw io_error("tms-v1: unknown dist format");
    const auto& vals = dist.at("values");
    if (vals.size() != n * (n - 1) / 2 && !(n == 0 && vals.empty()))
        throw io_error("tms-v1: dist length mismatch");
    s.dist.assign(n * n, 0.0);
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 1; k < n; ++k) {
            double v = vals[c++].get<double>();
            if (!std::isfinite(v)) throw io_error("tms-v1: non-finite distance");
            s.dist[i * n + k] = v;
            s.dist[k * n + i] = v;
        }
    if (j.contains("basepoint")) s.basepoint = j.at("basepoint").get<std::string>();
    if (j.contains("initial_set"))
        s.initial_set = j.at("initial_set").get<std::vector<std::string>>();
    if (j.contains("meta")) s.meta = meta_from_json(j.at("meta"));
    s.empty_flag = j.value("empty", false);
    return s;
}

json to_json(const models::SpacetimeModel& m) {
    json j;
    j["schema"] = "model-v1";
    j["kind"] = m.kind == models::ModelKind::warped_product ? "warped_product" : "minkowski_region";
    json sp;
    switch (m.spatial.kind) {
        case models::SpatialKind::circle:
            sp = {{"type", "circle"}, {"params", {m.spatial.L1}}};
            break;
        case models::SpatialKind::flat_torus:
            sp = {{"type", "flat_torus"}, {"params", {m.spatial.L1, m.spatial.L2}}};
            break;
        case models::SpatialKind::euclidean:
            sp = {{"type", "euclidean"}, {"params", {double(m.spatial.dim)}}};
            break;
    }
    j["spatial"] = sp;
    json w;
    switch (m.warp.family) {
        case models::WarpFamily::constant: w = {{"family", "const"}, {"params", {m.warp.c}}}; break;
        case models::WarpFamily::linear: w = {{"family", "linear"}, {"params", json::array()}}; break;
        case models::WarpFamily::one_minus_t: w = {{"family", "one_minus_t"}, {"params", json::array()}}; break;
        case models::WarpFamily::sinusoidal:
            w = {{"family", "sin"}, {"params", {m.warp.a, m.warp.omega}}};
            break;
    }
    j["warp"] = w;
    j["window"] = {m.t_lo, m.t_hi};
    if (m.region.kind != models::RegionKind::none) {
        json r;
        switch (m.region.kind) {
            case models::RegionKind::strip:
                r = {{"type", "strip"}, {"params", {m.region.half_extent}}};
                break;
            case models::RegionKind::past_of_point:
                r = {{"type", "past_of_point"},
                     {"params", {m.region.t_p, m.region.x_p[0], m.region.x_p[1], m.region.x_p[2]}}};
                break;
            case models::RegionKind::past_of_ring:
                r = {{"type", "past_of_ring"}, {"params", {m.region.R}}};
                break;
            case models::RegionKind::none:
                break;
        }
        j["region"] = r;
    }
    return j;
}

models::SpacetimeModel model_from_json(const json& j) {
    if (!j.is_object() || j.value("schema", "") != "model-v1")
        throw io_error("expected model-v1 document");
    models::SpacetimeModel m;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "warped_product") m.kind = models::ModelKind::warped_product;
    else if (kind == "minkowski_region") m.kind = models::ModelKind::minkowski_region;
    else throw io_error("model-v1: unknown kind " + kind);

    const auto& sp = j.at("spatial");
    std::string st = sp.at("type").get<std::string>();
    auto spp = sp.value("params", std::vector<double>{});
    if (st == "circle") {
        m.spatial.kind = models::SpatialKind::circle;
        if (!spp.empty()) m.spatial.L1 = spp[0];
    } else if (st == "flat_torus") {
        m.spatial.kind = models::SpatialKind::flat_torus;
        if (spp.size() >= 2) { m.spatial.L1 = spp[0]; m.spatial.L2 = spp[1]; }
    } else if (st == "euclidean") {
        m.spatial.kind = models::SpatialKind::euclidean;
        if (!spp.empty()) m.spatial.dim = int(spp[0]);
    } else {
        throw io_error("model-v1: unknown spatial " + st);
    }

    const auto& w = j.at("warp");
    std::string wf = w.at("family").get<std::string>();
    auto wp = w.value("params", std::vector<double>{});
    if (wf == "const") {
        m.warp.family = models::WarpFamily::constant;
        if (!wp.empty()) m.warp.c = wp[0];
    } else if (wf == "linear") {
        m.warp.family = models::WarpFamily::linear;
    } else if (wf == "one_minus_t") {
        m.warp.family = models::WarpFamily::one_minus_t;
    } else if (wf == "sin") {
        m.warp.family = models::WarpFamily::sinusoidal;
        if (wp.size() >= 2) { m.warp.a = wp[0]; m.warp.omega = wp[1]; }
    } else {
        throw io_error("model-v1: unknown warp " + wf);
    }

    auto win = j.at("window").get<std::vector<double>>();
    if (win.size() != 2) throw io_error("model-v1: window must be [lo, hi]");
    m.t_lo = win[0];
    m.t_hi = win[1];

    if (j.contains("region")) {
        const auto& r = j.at("region");
        std::string rt = r.at("type").get<std::string>();
        auto rp = r.value("params", std::vector<double>{});
        if (rt == "strip") {
            m.region.kind = models::RegionKind::strip;
            if (!rp.empty()) m.region.half_extent = rp[0];
        } else if (rt == "past_of_point") {
            m.region.kind = models::RegionKind::past_of_point;
            if (!rp.empty()) m.region.t_p = rp[0];
            for (std::size_t i = 0; i + 1 < rp.size() && i < 3; ++i) m.region.x_p[i] = rp[i + 1];
        } else if (rt == "past_of_ring") {
            m.region.kind = models::RegionKind::past_of_ring;
            if (!rp.empty()) m.region.R = rp[0];
        } else {
            throw io_error("model-v1: unknown region " + rt);
        }
    }
    m.check();
    return m;
}

json to_json(const discretize::CausalGraph& g) {
    json j;
    j["schema"] = "cgraph-v1";
    j["window_radius"] = g.window_radius;
    json nodes = json::array();
    int coords = g.model.spatial.coord_count();
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        json x = json::array();
        for (int c = 0; c < coords; ++c) x.push_back(g.nodes[i].pt.x[c]);
        nodes.push_back({{"id", int(i)}, {"t", g.nodes[i].pt.t}, {"x", x}, {"tau", g.nodes[i].tau}});
    }
    j["nodes"] = std::move(nodes);
    json edges = json::array();
    for (std::size_t e = 0; e < g.edge_count(); ++e)
        edges.push_back({{"from", g.from[e]},
                         {"to", g.to[e]},
                         {"w_null", g.w_null[e]},
                         {"w_proper", g.w_proper[e]}});
    j["edges"] = std::move(edges);
    j["model"] = to_json(g.model);
    return j;
}

std::pair<models::SpacetimeModel, std::vector<models::ModelPoint>> graph_nodes_from_json(
    const json& j) {
    if (j.value("schema", "") != "cgraph-v1") throw io_error("expected cgraph-v1 document");
    auto model = model_from_json(j.at("model"));
    std::vector<models::ModelPoint> pts;
    for (const auto& node : j.at("nodes")) {
        models::ModelPoint p;
        p.t = node.at("t").get<double>();
        auto x = node.at("x").get<std::vector<double>>();
        for (std::size_t c = 0; c < x.size() && c < 3; ++c) p.x[c] = x[c];
        pts.push_back(p);
    }
    return {model, pts};
}

json to_json(const embed::EmbeddedCloud& c) {
    json j;
    j["schema"] = "cloud-v1";
    j["dim"] = c.dim;
    j["timed"] = c.timed;
    j["landmark_ids"] = c.landmark_ids;
    json pts = json::array();
    for (double v : c.points) {
        require_finite(v, "cloud point");
        pts.push_back(v);
    }
    j["points"] = std::move(pts);
    j["count"] = c.count;
    return j;
}

embed::EmbeddedCloud cloud_from_json(const json& j) {
    if (j.value("schema", "") != "cloud-v1") throw io_error("expected cloud-v1 document");
    embed::EmbeddedCloud c;
    c.dim = j.at("dim").get<std::size_t>();
    c.timed = j.at("timed").get<bool>();
    c.landmark_ids = j.at("landmark_ids").get<std::vector<std::string>>();
    c.points = j.at("points").get<std::vector<double>>();
    c.count = j.at("count").get<std::size_t>();
    for (double v : c.points)
        if (!std::isfinite(v)) throw io_error("cloud-v1: non-finite coordinate");
    if (c.points.size() != c.dim * c.count) throw io_error("cloud-v1: size mismatch");
    return c;
}

namespace {

json bound_value(double v) {
    if (std::isinf(v)) return "inf";
    return v;
}

double bound_value_from(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
        throw io_error("bound-v1: bad value string");
    }
    return j.get<double>();
}

} // namespace

json bound_to_json(const dist::DistanceBound& b, const std::string& op,
                   const std::string& hash_x, const std::string& hash_y) {
    json j;
    j["schema"] = "bound-v1";
    j["op"] = op;
    j["lower"] = bound_value(b.lower);
    j["upper"] = bound_value(b.upper);
    j["method"] = dist::method_name(b.method);
    j["exhaustive"] = b.exhaustive;
    j["seed"] = b.seed;
    j["evals"] = b.evals;
    if (!b.note.empty()) j["note"] = b.note;
    json w = json::array();
    if (b.witness)
        for (auto [a, c] : b.witness->pairs) w.push_back({a, c});
    j["witness_pairs"] = std::move(w);
    j["inputs"] = {hash_x, hash_y};
    return j;
}

dist::DistanceBound bound_from_json(const json& j) {
    if (j.value("schema", "") != "bound-v1") throw io_error("expected bound-v1 document");
    dist::DistanceBound b;
    b.lower = bound_value_from(j.at("lower"));
    b.upper = bound_value_from(j.at("upper"));
    std::string m = j.value("method", "projection_lb");
    if (m == "brute") b.method = dist::Method::brute;
    else if (m == "local_search") b.method = dist::Method::local_search;
    else if (m == "gluing") b.method = dist::Method::gluing;
    else b.method = dist::Method::projection_lb;
    b.exhaustive = j.value("exhaustive", false);
    b.seed = j.value("seed", uint64_t(0));
    b.evals = j.value("evals", long(0));
    b.note = j.value("note", "");
    if (j.contains("witness_pairs") && !j.at("witness_pairs").empty()) {
        dist::Correspondence c;
        for (const auto& p : j.at("witness_pairs"))
            c.pairs.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
        b.witness = c;
    }
    return b;
}

std::string content_hash(const TimedMetricSpace& space) {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&](const void* data, std::size_t len) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& id : space.ids) mix(id.data(), id.size());
    if (!space.tau.empty()) mix(space.tau.data(), space.tau.size() * sizeof(double));
    if (!space.dist.empty()) mix(space.dist.data(), space.dist.size() * sizeof(double));
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw io_error("parse error in " + path + ": " + e.what());
    }
    return j;
}

void write_json_file(const std::string& path, const json& j, bool force) {
    if (!force && std::filesystem::exists(path))
        throw io_error("refusing to overwrite " + path + " without --force");
    if (auto dir = std::filesystem::path(path).parent_path(); !dir.empty())
        std::filesystem::create_directories(dir);
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

void write_text_file(const std::string& path, const std::string& text, bool force) {
    if (!force && std::filesystem::exists(path))
        throw io_error("refusing to overwrite " + path + " without --force");
    if (auto dir = std::filesystem::path(path).parent_path(); !dir.empty())
        std::filesystem::create_directories(dir);
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out << text;
}

} // namespace stm::io
