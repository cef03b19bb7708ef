#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "plattice/experiment.hpp"

using namespace plattice;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json tiny_realize_config() {
    return nlohmann::json{
        {"command", "realize"},
        {"law",
         {{"kind", "gaussian"}, {"sigma", 0.5}, {"dim", 2}, {"seed", 99}, {"stream", 0}}},
        {"window", {{"radius", 4}, {"margin", 2}}}};
}

}  // namespace

TEST_CASE("law config round trip and schema errors with field paths") {
    const auto j = nlohmann::json{{"kind", "stable_symmetric"}, {"alpha", 1.0},
                                  {"stable_scale", 2.0},        {"scale", 1.5},
                                  {"dim", 1},                   {"seed", 7},
                                  {"stream", 3}};
    const auto lc = parse_law(j);
    CHECK(lc.law.kind == LawKind::stable_symmetric);
    CHECK(lc.law.alpha == 1.0);
    CHECK(lc.law.stable_scale == 2.0);
    CHECK(lc.law.scale_multiplier == 1.5);
    CHECK(lc.seed == 7);
    CHECK(lc.stream == 3);
    const auto back = law_to_json(lc);
    CHECK(parse_law(back).law.alpha == 1.0);

    try {
        parse_law(nlohmann::json{{"kind", "gaussian"}});
        FAIL("missing sigma must throw");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("sigma") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_law(nlohmann::json{{"kind", "nope"}}), ConfigError);
}

TEST_CASE("window parsing applies the quantile margin when omitted") {
    const auto law = PerturbationLaw::make_gaussian(1.0, 1);
    const auto w = parse_window(nlohmann::json{{"radius", 100}}, law);
    CHECK(w.margin == 5);
    const auto w2 = parse_window(nlohmann::json{{"radius", 100}, {"margin", 9}}, law);
    CHECK(w2.margin == 9);
}

TEST_CASE("run_experiment produces the artifact set and is rerun-identical") {
    const auto dir1 = fs::temp_directory_path() / "plattice_test_run1";
    const auto dir2 = fs::temp_directory_path() / "plattice_test_run2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    REQUIRE(run_experiment(tiny_realize_config(), dir1.string()) == 0);
    REQUIRE(run_experiment(tiny_realize_config(), dir2.string()) == 0);
    CHECK(fs::exists(dir1 / "manifest.json"));
    CHECK(fs::exists(dir1 / "results.csv"));
    CHECK(fs::exists(dir1 / "raw.jsonl"));
    CHECK(slurp(dir1 / "results.csv") == slurp(dir2 / "results.csv"));
    CHECK(slurp(dir1 / "raw.jsonl") == slurp(dir2 / "raw.jsonl"));

    const auto manifest = nlohmann::json::parse(slurp(dir1 / "manifest.json"));
    CHECK(manifest.at("config_echo").at("command") == "realize");
    CHECK(manifest.contains("wall_time_seconds"));
}

TEST_CASE("psi command on a stored single-point configuration") {
    const auto dir = fs::temp_directory_path() / "plattice_test_psi";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "single.jsonl", std::ios::binary);
        out << "{\"coords\":[0.0]}\n";
    }
    nlohmann::json cfg{{"command", "psi"},
                       {"input_config", (dir / "single.jsonl").string()},
                       {"dim", 1},
                       {"window_radius", 10.0},
                       {"m_values", {2.0}}};
    REQUIRE(run_experiment(cfg, (dir / "out").string()) == 0);
    const auto csv = slurp(dir / "out" / "results.csv");
    CHECK(csv.find("m,psi") == 0);
    CHECK(csv.find("2,1") != std::string::npos);  // psi at m=2 of a point at 0 is 1.0
}

TEST_CASE("sweep: single cell reduces to the power experiment and adds self-test") {
    const auto dir = fs::temp_directory_path() / "plattice_test_sweep";
    fs::remove_all(dir);
    nlohmann::json cfg{
        {"command", "sweep"},
        {"law", {{"kind", "gaussian"}, {"sigma", 0.05}, {"dim", 2}, {"seed", 5}, {"stream", 0}}},
        {"sigma_grid", {0.05}},
        {"window", {{"radius", 8}}},
        {"statistic", {{"name", "chain_displacement"}, {"n_chain", 4}}},
        {"replicates", 100},
        {"alpha_level", 0.05},
        {"threads", 4}};
    REQUIRE(run_experiment(cfg, dir.string()) == 0);
    const auto csv = slurp(dir / "results.csv");
    CHECK(csv.find("parameter,statistic,window,power,ci_lo,ci_hi") == 0);
    CHECK(csv.find("self_test") != std::string::npos);
    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(summary.at("cells").size() == 2);  // the grid cell plus the self-test
}

TEST_CASE("unknown fields in critical places raise config errors") {
    auto cfg = tiny_realize_config();
    cfg["command"] = "bogus";
    CHECK_THROWS_AS(run_experiment(cfg, "/tmp/plattice_never"), ConfigError);
}
