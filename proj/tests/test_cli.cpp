#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "stm/io.hpp"

#ifndef STMC_BIN
#define STMC_BIN "stmc"
#endif
#ifndef STM_FIXTURE_DIR
#define STM_FIXTURE_DIR "fixtures"
#endif

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("stmc_test_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& cmd) {
    int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

} // namespace

TEST_CASE("cli: sample, check, dist round trip") {
    TempDir tmp;
    std::string out = tmp.path.string();
    std::string bin = STMC_BIN;

    // sample a small constant-warp circle
    int rc = run(bin + " model sample --kind warped --warp const:1 --space circle:6.283185307179586"
                       " --window 0:1 --nt 9 --nx 8 -o " + out + "/m1");
    REQUIRE(rc == 0);
    REQUIRE(fs::exists(tmp.path / "m1/space.json"));
    REQUIRE(fs::exists(tmp.path / "m1/graph.json"));

    // the written space is re-readable and valid
    auto space = stm::io::space_from_json(stm::io::load_json_file(out + "/m1/space.json"));
    CHECK(space.size() == 72);
    CHECK(stm::validate(space, 1e-6).ok());

    // refuses silent overwrite
    CHECK(run(bin + " model sample --kind warped --warp const:1 --space circle:6.283185307179586"
                    " --window 0:1 --nt 9 --nx 8 -o " + out + "/m1") == 4);
    CHECK(run(bin + " --force model sample --kind warped --warp const:1"
                    " --space circle:6.283185307179586 --window 0:1 --nt 9 --nx 8 -o " +
              out + "/m1") == 0);

    // causality check against the analytic predicate
    CHECK(run(bin + " check " + out + "/m1/space.json --eps 0.05 --graph " + out +
              "/m1/graph.json") == 0);

    // distances between fixtures: the t-to-x pair
    std::string fx = STM_FIXTURE_DIR;
    rc = run(bin + " dist tau-h " + fx + "/t_to_x_a.json " + fx + "/t_to_x_b.json -o " + out +
             "/bound.json");
    REQUIRE(rc == 0);
    auto bound = stm::io::bound_from_json(stm::io::load_json_file(out + "/bound.json"));
    CHECK(bound.lower == doctest::Approx(1.0));
    CHECK(bound.upper == doctest::Approx(1.0));

    rc = run(bin + " dist timeless " + fx + "/t_to_x_a.json " + fx + "/t_to_x_b.json -o " + out +
             "/tls.json");
    REQUIRE(rc == 0);
    auto tls = stm::io::bound_from_json(stm::io::load_json_file(out + "/tls.json"));
    CHECK(tls.upper <= 1e-12);

    // identical space: gh is zero
    rc = run(bin + " dist gh " + out + "/m1/space.json " + out + "/m1/space.json -o " + out +
             "/self.json");
    REQUIRE(rc == 0);
    auto self = stm::io::bound_from_json(stm::io::load_json_file(out + "/self.json"));
    CHECK(self.upper <= 1e-9);
}

TEST_CASE("cli: exit codes") {
    TempDir tmp;
    std::string bin = STMC_BIN;
    std::string fx = STM_FIXTURE_DIR;

    CHECK(run(bin + " dist bogus-op " + fx + "/flip_t_a.json " + fx + "/flip_t_b.json") == 2);
    CHECK(run(bin + " dist gh missing.json missing.json") == 4);
    CHECK(run(bin + " nonsense") == 2);

    // corrupted space: validation failure is exit 6
    auto corrupt = stm::io::load_json_file(fx + std::string("/flip_t_a.json"));
    corrupt["points"][0]["tau"] = 9.0;  // breaks the Lipschitz bound
    stm::io::write_json_file((tmp.path / "bad.json").string(), corrupt, true);
    CHECK(run(bin + " check " + (tmp.path / "bad.json").string()) == 6);
    CHECK(run(bin + " dist gh " + (tmp.path / "bad.json").string() + " " + fx +
              "/flip_t_b.json") == 6);

    // missing basepoint: precondition failure is exit 5
    CHECK(run(bin + " dist bb-gh " + fx + "/flip_t_a.json " + fx + "/flip_t_b.json") == 5);

    // disconnected graph: exit 3 (window too small for any edge)
    CHECK(run(bin + " model sample --kind warped --warp const:1"
                    " --space circle:6.283185307179586 --window 0:1 --nt 6 --nx 6"
                    " --window-cells 0.0001 -o " + (tmp.path / "disc").string()) == 3);
}

TEST_CASE("cli: experiment dispatch writes report and series") {
    TempDir tmp;
    std::string bin = STMC_BIN;
    std::string cfgpath = (tmp.path / "cfg.json").string();
    stm::io::write_json_file(cfgpath, {{"kind", "sandwich"}, {"trials", 6}}, true);
    CHECK(run(bin + " experiment " + cfgpath + " -o " + tmp.path.string() + "/exp") == 0);
    CHECK(fs::exists(tmp.path / "exp/report.json"));
    auto rep = stm::io::load_json_file((tmp.path / "exp/report.json").string());
    CHECK(rep["verdict"] == "pass");
}

TEST_CASE("cli: augmented big-bang output carries the basepoint") {
    TempDir tmp;
    std::string bin = STMC_BIN;
    int rc = run(bin + " model sample --kind warped --warp linear"
                       " --space circle:6.283185307179586 --window 0:1 --nt 24 --nx 24"
                       " --augment-bigbang -o " + tmp.path.string() + "/bb");
    REQUIRE(rc == 0);
    auto space =
        stm::io::space_from_json(stm::io::load_json_file(tmp.path.string() + "/bb/space.json"));
    REQUIRE(space.basepoint);
    CHECK(*space.basepoint == "p_BB");
    CHECK(stm::validate(space, 1e-6).ok());
}
