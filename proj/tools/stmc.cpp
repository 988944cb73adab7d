// stmc: sample space-time models into timed metric spaces, compute certified
// distance bounds between them, and run the experiment suites.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stm/discretize.hpp"
#include "stm/distances.hpp"
#include "stm/harness.hpp"
#include "stm/io.hpp"
#include "stm/models.hpp"

using nlohmann::json;
using namespace stm;

namespace {

enum ExitCode {
    kOk = 0,
    kBadFlags = 2,
    kDisconnected = 3,
    kIo = 4,
    kPrecondition = 5,
    kValidation = 6,
    kExperimentFail = 7,
};

int thread_count(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("STMC_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

std::vector<double> split_params(const std::string& s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t next = s.find(',', pos);
        if (next == std::string::npos) next = s.size();
        out.push_back(std::stod(s.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

models::SpacetimeModel model_from_flags(const std::string& kind, const std::string& warp,
                                        const std::string& space, const std::string& window,
                                        const std::string& region) {
    models::SpacetimeModel m;
    if (kind == "warped") m.kind = models::ModelKind::warped_product;
    else if (kind == "minkowski") m.kind = models::ModelKind::minkowski_region;
    else throw argument_error("--kind must be warped or minkowski");

    auto colon = [](const std::string& s) -> std::pair<std::string, std::string> {
        auto c = s.find(':');
        if (c == std::string::npos) return {s, ""};
        return {s.substr(0, c), s.substr(c + 1)};
    };

    auto [wf, wp] = colon(warp);
    auto wps = wp.empty() ? std::vector<double>{} : split_params(wp);
    if (wf == "const") {
        m.warp.family = models::WarpFamily::constant;
        m.warp.c = wps.empty() ? 1.0 : wps[0];
    } else if (wf == "linear") {
        m.warp.family = models::WarpFamily::linear;
    } else if (wf == "one_minus_t") {
        m.warp.family = models::WarpFamily::one_minus_t;
    } else if (wf == "sin") {
        m.warp.family = models::WarpFamily::sinusoidal;
        if (wps.size() < 2) throw argument_error("--warp sin:a,omega needs two parameters");
        m.warp.a = wps[0];
        m.warp.omega = wps[1];
    } else {
        throw argument_error("unknown warp family: " + wf);
    }

    auto [st, sp] = colon(space);
    auto sps = sp.empty() ? std::vector<double>{} : split_params(sp);
    if (st == "circle") {
        m.spatial.kind = models::SpatialKind::circle;
        if (!sps.empty()) m.spatial.L1 = sps[0];
    } else if (st == "torus") {
        m.spatial.kind = models::SpatialKind::flat_torus;
        if (sps.size() >= 2) { m.spatial.L1 = sps[0]; m.spatial.L2 = sps[1]; }
    } else if (st == "euclidean") {
        m.spatial.kind = models::SpatialKind::euclidean;
        if (!sps.empty()) m.spatial.dim = int(sps[0]);
    } else {
        throw argument_error("unknown space type: " + st);
    }

    auto c = window.find(':');
    if (c == std::string::npos) throw argument_error("--window must be lo:hi");
    m.t_lo = std::stod(window.substr(0, c));
    m.t_hi = std::stod(window.substr(c + 1));

    if (!region.empty()) {
        auto [rt, rp] = colon(region);
        auto rps = rp.empty() ? std::vector<double>{} : split_params(rp);
        if (rt == "strip") {
            m.region.kind = models::RegionKind::strip;
            if (!rps.empty()) m.region.half_extent = rps[0];
        } else if (rt == "past_of_point") {
            m.region.kind = models::RegionKind::past_of_point;
            if (rps.empty()) throw argument_error("--region past_of_point:t,x...");
            m.region.t_p = rps[0];
            for (std::size_t i = 1; i < rps.size() && i <= 3; ++i) m.region.x_p[i - 1] = rps[i];
        } else if (rt == "past_of_ring") {
            m.region.kind = models::RegionKind::past_of_ring;
            if (!rps.empty()) m.region.R = rps[0];
        } else {
            throw argument_error("unknown region type: " + rt);
        }
    }
    m.check();
    return m;
}

int cmd_model_sample(const std::string& kind, const std::string& warp, const std::string& space,
                     const std::string& window, const std::string& region, int nt, int nx,
                     double window_cells, int n_quad, bool augment_bb, double mark_initial_tol,
                     bool do_mark_initial, const std::string& out_dir, int max_dense, bool force,
                     uint64_t seed, int threads) {
    (void)seed;
    auto model = model_from_flags(kind, warp, space, window, region);
    auto pts = discretize::sample_grid(model, nt, nx);
    double spacing = discretize::grid_spacing(model, nt, nx);
    auto graph = discretize::build_causal_graph(model, pts, window_cells * spacing, n_quad);

    json summary;
    summary["nodes"] = graph.node_count();
    summary["edges"] = graph.edge_count();
    summary["window_radius"] = graph.window_radius;

    if (!out_dir.empty()) io::write_json_file(out_dir + "/graph.json", io::to_json(graph), force);

    if (int(graph.node_count()) <= max_dense) {
        auto spacetime = discretize::null_distance_matrix(graph, threads);
        auto tau_hat = discretize::cosmological_time(graph);
        double that_max = 0.0;
        for (double v : tau_hat) that_max = std::max(that_max, v);
        if (augment_bb) spacetime = discretize::augment_big_bang(spacetime);
        if (do_mark_initial) spacetime = discretize::mark_initial_set(spacetime, mark_initial_tol);
        summary["n"] = spacetime.size();
        summary["diameter"] = spacetime.diameter();
        summary["tau_range"] = {spacetime.tau_min(), spacetime.tau_max()};
        summary["tau_hat_max"] = that_max;
        summary["basepoint"] = spacetime.basepoint ? json(*spacetime.basepoint) : json(nullptr);
        summary["initial_set_size"] = spacetime.initial_set.size();
        if (!out_dir.empty())
            io::write_json_file(out_dir + "/space.json", io::to_json(spacetime), force);
    } else {
        summary["n"] = graph.node_count();
        summary["space"] = nullptr;
        summary["note"] = "node count above --max-dense; wrote graph only";
    }
    std::cout << summary.dump(2) << "\n";
    return kOk;
}

int cmd_dist(const std::string& op, const std::string& path_a, const std::string& path_b,
             int exact_max_n, long budget, uint64_t seed, double p, int grid_count,
             const std::string& out, bool force, double tol) {
    auto A = io::space_from_json(io::load_json_file(path_a));
    auto B = io::space_from_json(io::load_json_file(path_b));
    dist::Opts opts;
    opts.exact_max_n = exact_max_n;
    opts.budget = budget;
    opts.seed = seed;
    opts.validate_tol = tol;
    auto bound = dist::dispatch(op, A, B, opts, p, grid_count);
    json j = io::bound_to_json(bound, op, io::content_hash(A), io::content_hash(B));
    std::cout << j.dump(2) << "\n";
    if (!out.empty()) io::write_json_file(out, j, force);
    return kOk;
}

int cmd_check(const std::string& path, double eps, const std::string& graph_path, double tol) {
    auto space = io::space_from_json(io::load_json_file(path));
    auto report = validate(space, tol);
    json out;
    out["valid"] = report.ok();
    out["validation"] = report.summary();
    if (!report.ok()) {
        std::cout << out.dump(2) << "\n";
        return kValidation;
    }
    auto rel = causal_relation(space, eps);
    auto axioms = check_causal_axioms(rel, space);
    out["axioms"] = {{"reflexive", axioms.reflexive},
                     {"transitivity_violations", axioms.transitivity_violations},
                     {"antisymmetry_violations", axioms.antisymmetry_violations},
                     {"strict", axioms.strict},
                     {"pass", axioms.pass()}};
    std::size_t n = space.size(), causal = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (rel.at(i, j)) ++causal;
    out["causal_pair_fraction"] = n ? double(causal) / double(n * n) : 0.0;

    if (!graph_path.empty()) {
        auto [model, pts] = io::graph_nodes_from_json(io::load_json_file(graph_path));
        if (pts.size() != n) throw precondition_error("check: graph/space node count mismatch");
        std::size_t agree = 0, total = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                bool analytic = models::is_causal(model, pts[i], pts[j]);
                if (analytic == rel.at(i, j)) ++agree;
                ++total;
            }
        out["encoding_agreement"] = total ? double(agree) / double(total) : 1.0;
    }
    std::cout << out.dump(2) << "\n";
    return kOk;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir, bool force,
                   std::optional<uint64_t> seed, int threads) {
    auto config = io::load_json_file(config_path);
    if (seed) config["seed"] = *seed;
    if (threads > 0 && !config.contains("threads")) config["threads"] = threads;
    auto report = harness::run_from_config(config);
    std::cout << report.doc.dump(2) << "\n";
    if (!out_dir.empty()) {
        io::write_json_file(out_dir + "/report.json", report.doc, force);
        if (!report.csv.empty()) io::write_text_file(out_dir + "/series.csv", report.csv, force);
    }
    return report.pass ? kOk : kExperimentFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"space-time metric toolkit"};
    app.require_subcommand(1);

    uint64_t seed = 0x5EED;
    double tol = 1e-6;
    int threads = 0;
    bool force = false;
    app.add_option("--seed", seed, "base RNG seed");
    app.add_option("--tol", tol, "validation tolerance");
    app.add_option("--threads", threads, "worker cap (env STMC_THREADS as fallback)");
    app.add_flag("--force", force, "overwrite existing outputs");

    // model sample
    auto* model_cmd = app.add_subcommand("model", "model operations");
    auto* sample = model_cmd->add_subcommand("sample", "sample a model into a causal graph");
    std::string kind = "warped", warp = "const:1", space = "circle:6.283185307179586";
    std::string window = "0:1", region;
    int nt = 16, nx = 16, n_quad = 16, max_dense = 4096;
    double window_cells = 4.0, mark_initial_tol = -1.0;
    bool augment_bb = false;
    std::string out_dir;
    sample->add_option("--kind", kind, "warped | minkowski");
    sample->add_option("--warp", warp, "const:c | linear | one_minus_t | sin:a,omega");
    sample->add_option("--space", space, "circle:L | torus:L1,L2 | euclidean:dim");
    sample->add_option("--window", window, "t_lo:t_hi");
    sample->add_option("--region", region, "strip:h | past_of_point:t,x.. | past_of_ring:R");
    sample->add_option("--nt", nt, "time samples");
    sample->add_option("--nx", nx, "spatial samples per axis");
    sample->add_option("--window-cells", window_cells, "edge locality radius in grid cells");
    sample->add_option("--n-quad", n_quad, "proper-time quadrature panels");
    sample->add_flag("--augment-bigbang", augment_bb, "glue the big-bang point");
    sample->add_option("--mark-initial", mark_initial_tol, "mark initial set with this tau tolerance");
    sample->add_option("-o,--out", out_dir, "output directory");
    sample->add_option("--max-dense", max_dense, "dense matrix node cap");

    // dist
    auto* dist_cmd = app.add_subcommand("dist", "distance bound between two spaces");
    std::string op, path_a, path_b, dist_out;
    int exact_max_n = 4, grid_count = 9;
    long budget = 10000;
    double lp = 1.0;
    dist_cmd->add_option("op", op,
                         "gh|kappa-gh|timeless|level-sup|level-lp|strip-sup|strip-lp|tau-h|bb-gh|fd-hh")
        ->required();
    dist_cmd->add_option("a", path_a, "first tms-v1 file")->required();
    dist_cmd->add_option("b", path_b, "second tms-v1 file")->required();
    dist_cmd->add_option("--exact-max-n", exact_max_n, "exhaustive enumeration cap");
    dist_cmd->add_option("--budget", budget, "search evaluation budget");
    dist_cmd->add_option("-p", lp, "lp exponent for level-lp / strip-lp");
    dist_cmd->add_option("--grid-count", grid_count, "default bin/grid resolution");
    dist_cmd->add_option("-o,--out", dist_out, "write bound-v1 here");

    // check
    auto* check_cmd = app.add_subcommand("check", "validate + causality report for a space");
    std::string check_path, check_graph;
    double eps = 0.0;
    check_cmd->add_option("space", check_path, "tms-v1 file")->required();
    check_cmd->add_option("--eps", eps, "causal encoding tolerance");
    check_cmd->add_option("--graph", check_graph, "cgraph-v1 file for analytic comparison");

    // experiment
    auto* exp_cmd = app.add_subcommand("experiment", "run an experiment config");
    std::string config_path, exp_out;
    exp_cmd->add_option("config", config_path, "experiment config JSON")->required();
    exp_cmd->add_option("-o,--out", exp_out, "output directory for report/series");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kBadFlags;
    }

    try {
        if (sample->parsed())
            return cmd_model_sample(kind, warp, space, window, region, nt, nx, window_cells,
                                    n_quad, augment_bb, mark_initial_tol, mark_initial_tol >= 0,
                                    out_dir, max_dense, force, seed, thread_count(threads));
        if (dist_cmd->parsed())
            return cmd_dist(op, path_a, path_b, exact_max_n, budget, seed, lp, grid_count,
                            dist_out, force, tol);
        if (check_cmd->parsed()) return cmd_check(check_path, eps, check_graph, tol);
        if (exp_cmd->parsed())
            return cmd_experiment(config_path, exp_out, force,
                                  app.count("--seed") ? std::optional<uint64_t>(seed) : std::nullopt,
                                  thread_count(threads));
        std::cerr << "no subcommand\n";
        return kBadFlags;
    } catch (const argument_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadFlags;
    } catch (const disconnected_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDisconnected;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const precondition_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kPrecondition;
    } catch (const capability_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadFlags;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
