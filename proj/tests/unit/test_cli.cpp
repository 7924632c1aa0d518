#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "h2hinf/cli.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace h2hinf;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "h2hinf");
    std::vector<char*> argv;
    for (auto& a : args)
        argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("h2hinf_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');)
            cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST_CASE("validate: exit codes") {
    CHECK(cli({"validate", testing::scenario_path("uav.json")}).code == kExitPass);
    const Run bad = cli({"validate", testing::scenario_path("bad_F.json")});
    CHECK(bad.code == kExitValidation);
    CHECK(bad.err.find("F-invertible") != std::string::npos);
    CHECK(cli({"validate", "/nonexistent/none.json"}).code == kExitIO);

    const fs::path dir = scratch("malformed");
    fs::create_directories(dir);
    std::ofstream(dir / "broken.json") << "{\"horizon\": 1, ";
    CHECK(cli({"validate", (dir / "broken.json").string()}).code == kExitValidation);
}

TEST_CASE("usage errors") {
    CHECK(cli({}).code == kExitIO);
    CHECK(cli({"frobnicate", testing::scenario_path("uav.json")}).code == kExitIO);
    CHECK(cli({"validate"}).code == kExitIO);
    CHECK(cli({"validate", testing::scenario_path("uav.json"), "--steps", "-3"}).code == kExitIO);
    CHECK(cli({"--help"}).code == kExitPass);
}

TEST_CASE("synthesize: escape reports not solvable") {
    const Run r = cli({"synthesize", testing::scenario_path("scalar_tangent.json"), "--out",
                       scratch("tangent").string()});
    CHECK(r.code == kExitNotSolvable);
    CHECK(r.err.find("escapes at node") != std::string::npos);
    // A larger gamma pushes the escape past t = 0.
    CHECK(cli({"synthesize", testing::scenario_path("scalar_tangent.json"), "--gamma", "1", "--out",
               scratch("tangent1").string()})
              .code == kExitPass);
}

TEST_CASE("synthesize: UAV gain file shape and terminal values") {
    const fs::path dir = scratch("uav_gains");
    REQUIRE(cli({"synthesize", testing::scenario_path("uav.json"), "--out", dir.string()}).code == kExitPass);
    const auto rows = read_csv(dir / "gains.csv");
    const auto sc = testing::uav();
    const auto d = sc.model.dims();
    const std::size_t cols = 1 + static_cast<std::size_t>(d.s * d.n + d.s + d.m * d.n + d.m);
    REQUIRE(rows.size() == sc.grid.nodes() + 1);
    CHECK(rows[0][0] == "t");
    CHECK(rows[1].size() == cols);
    CHECK(std::stod(rows.back()[0]) == doctest::Approx(sc.grid.horizon()));
    for (std::size_t j = 1; j < cols; ++j)
        CHECK(std::stod(rows.back()[j]) == 0.0);
    CHECK(fs::exists(dir / "riccati.csv"));
}

TEST_CASE("simulate: reruns are byte-identical") {
    const fs::path a = scratch("sim_a"), b = scratch("sim_b");
    const std::string sc = testing::scenario_path("scalar_noisy.json");
    REQUIRE(cli({"simulate", sc, "--paths", "3", "--seed", "5", "--out", a.string()}).code == kExitPass);
    REQUIRE(cli({"simulate", sc, "--paths", "3", "--seed", "5", "--out", b.string()}).code == kExitPass);
    for (const char* f : {"trajectory_0000.csv", "trajectory_0002.csv", "ensemble.csv"}) {
        CAPTURE(f);
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(read_csv(a / "trajectory_0001.csv").size() == 402);
}

TEST_CASE("verify: passing report and verification failure") {
    const fs::path dir = scratch("verify");
    const Run ok = cli({"verify", testing::scenario_path("scalar_noisy.json"), "--paths", "100", "--seed", "3",
                        "--out", dir.string()});
    CHECK(ok.code == kExitPass);
    const auto rows = read_csv(dir / "report.csv");
    REQUIRE(rows.size() > 10);
    CHECK(rows[1][0] == "bounded_real_solvable");

    const Run zero = cli({"verify", testing::scenario_path("zero.json"), "--paths", "4", "--out",
                          scratch("verify_zero").string()});
    CHECK(zero.code == kExitVerification);
}
