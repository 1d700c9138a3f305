#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "resetgraph/commands.hpp"
#include "resetgraph/io.hpp"
#include "resetgraph/util.hpp"

using namespace resetgraph;
using io::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / "resetgraph_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(RESETGRAPH_BIN) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string write_config(const fs::path& dir, const json& cfg) {
    fs::path p = dir / "config.json";
    std::ofstream(p) << cfg.dump();
    return p.string();
}

}  // namespace

TEST_SUITE_BEGIN("io_cli");

TEST_CASE("system parsing: ss and tf") {
    json tf = {{"tf", {{"num", {1.0}}, {"den", {1.0, 1.0}}}}};
    StateSpace sys = io::parse_system(tf, "t");
    CHECK(sys.states() == 1);
    CHECK(sys.A(0, 0) == doctest::Approx(-1.0));

    json ss = {{"ss",
                {{"A", {{-1.0, 0.0}, {0.0, -2.0}}},
                 {"B", {{1.0}, {1.0}}},
                 {"C", {{1.0, 0.0}}},
                 {"D", {{0.0}}}}}};
    StateSpace sys2 = io::parse_system(ss, "t");
    CHECK(sys2.states() == 2);
}

TEST_CASE("strict key checking rejects unknown keys") {
    json bad = {{"tf", {{"num", {1.0}}, {"den", {1.0, 1.0}}, {"extra", 1}}}};
    CHECK_THROWS_AS(io::parse_system(bad, "t"), ConfigError);
    json ragged = {{"ss",
                    {{"A", {{1.0, 2.0}, {3.0}}},
                     {"B", {{1.0}}},
                     {"C", {{1.0}}},
                     {"D", {{0.0}}}}}};
    CHECK_THROWS_AS(io::parse_system(ragged, "t"), ConfigError);
}

TEST_CASE("grid parsing") {
    CHECK(io::parse_grid(json::array({1.0, 2.0}), "g") == std::vector<double>{1.0, 2.0});
    json spec = {{"min", 0.0}, {"max", 1.0}, {"count", 3}};
    CHECK(io::parse_grid(spec, "g") == std::vector<double>{0.0, 0.5, 1.0});
    json bad = {{"min", 0.0}, {"max", 1.0}};
    CHECK_THROWS_AS(io::parse_grid(bad, "g"), ConfigError);
    json badspace = {{"min", -1.0}, {"max", 1.0}, {"count", 3}, {"spacing", "log"}};
    CHECK_THROWS_AS(io::parse_grid(badspace, "g"), ConfigError);
}

TEST_CASE("reset system parsing with conic M") {
    json spec = {{"base", {{"tf", {{"num", {1.0}}, {"den", {1.0, 1.0}}}}}},
                 {"R", {{0.0}}},
                 {"M", {{"k1", 1.0}, {"k2", 0.0}}},
                 {"delta", 0.01}};
    ResetSystem sys = io::parse_reset_system(spec, "t");
    CHECK(sys.M(0, 0) == doctest::Approx(-1.0));
    CHECK(sys.delta == doctest::Approx(0.01));
}

TEST_CASE("config hash is stable and stamps outputs") {
    json cfg = {{"a", 1}, {"b", 2.5}};
    json out1, out2;
    io::stamp(out1, cfg);
    io::stamp(out2, cfg);
    CHECK(out1["config_hash"] == out2["config_hash"]);
    CHECK(out1["tool_version"] == RESETGRAPH_VERSION);
    json cfg2 = {{"a", 1}, {"b", 2.6}};
    json out3;
    io::stamp(out3, cfg2);
    CHECK(out1["config_hash"] != out3["config_hash"]);
}

TEST_CASE("region JSON carries constraints and provenance") {
    StateSpace lag = to_state_space(TransferFunction({1.0}, {1.0, 1.0}));
    RegionApprox rg = sg_overapprox(lag, {0.0, 0.5}, true);
    json doc = io::region_to_json(rg);
    CHECK(doc["constraints"].size() == rg.constraints.size());
    CHECK(doc["provenance"].size() == rg.provenance.certificates.size());
    CHECK(doc["all_psd"].get<bool>());
    std::string csv = io::boundary_csv(rg, 64);
    CHECK(csv.rfind("re,im,constraint_index\n", 0) == 0);
}

TEST_CASE("cli: config errors exit 2") {
    auto dir = scratch_dir("cli_config");
    // Malformed JSON file.
    fs::path bad = dir / "bad.json";
    std::ofstream(bad) << "{ not json";
    CHECK(run_cli("sg --config " + bad.string() + " --out " + dir.string()) ==
          commands::kExitConfig);
    // Unknown key.
    json cfg = {{"system", {{"tf", {{"num", {1.0}}, {"den", {1.0, 1.0}}}}}}, {"bogus", 1}};
    CHECK(run_cli("sg --config " + write_config(dir, cfg) + " --out " + dir.string()) ==
          commands::kExitConfig);
    // Missing required option.
    CHECK(run_cli("sg") == commands::kExitConfig);
}

TEST_CASE("cli: sg writes region artifacts and exits 0") {
    auto dir = scratch_dir("cli_sg");
    json cfg = {{"system", {{"tf", {{"num", {1.0}}, {"den", {1.0, 1.0}}}}}},
                {"lambdas", {{"min", -1.0}, {"max", 1.0}, {"count", 9}}},
                {"boundary_samples", 128}};
    CHECK(run_cli("sg --config " + write_config(dir, cfg) + " --out " + dir.string()) ==
          commands::kExitOk);
    CHECK(fs::exists(dir / "region.json"));
    CHECK(fs::exists(dir / "boundary.csv"));
    json doc = io::read_json_file((dir / "region.json").string());
    CHECK(doc.contains("config_hash"));
    CHECK(doc.contains("tool_version"));
}

TEST_CASE("cli: simulate validates the step bound") {
    auto dir = scratch_dir("cli_sim");
    json sys = {{"base", {{"tf", {{"num", {1.0}}, {"den", {1.0, 1.0}}}}}},
                {"R", {{0.0}}},
                {"M", {{"k1", 1.0}, {"k2", 0.0}}},
                {"delta", 0.01}};
    json bad = {{"mode", "open"}, {"system", sys}, {"T_end", 1.0}, {"dt", 0.5}};
    CHECK(run_cli("simulate --config " + write_config(dir, bad) + " --out " + dir.string()) ==
          commands::kExitConfig);
    json ok = {{"mode", "open"},
               {"system", sys},
               {"input", {{"type", "sine"}, {"amplitude", 1.0}, {"omega", 3.0}}},
               {"T_end", 2.0},
               {"dt", 1e-3}};
    CHECK(run_cli("simulate --config " + write_config(dir, ok) + " --out " + dir.string()) ==
          commands::kExitOk);
    CHECK(fs::exists(dir / "trace.csv"));
    CHECK(fs::exists(dir / "metrics.json"));

    json closed = {{"mode", "closed"},
                   {"plant", {{"tf", {{"num", {1.0}}, {"den", {1.0, 1.2, 0.2}}}}}},
                   {"controller", sys},
                   {"w", {{"type", "step"}, {"amplitude", 1.0}}},
                   {"T_end", 2.0},
                   {"dt", 1e-3}};
    CHECK(run_cli("simulate --config " + write_config(dir, closed) + " --out " + dir.string()) ==
          commands::kExitOk);
    json metrics = io::read_json_file((dir / "metrics.json").string());
    CHECK(metrics.contains("l2_u1"));
}

TEST_CASE("cli: admissible exits by verdict") {
    auto dir = scratch_dir("cli_adm");
    json sys = {{"base", {{"tf", {{"num", {1.0}}, {"den", {1.0, 1.0}}}}}},
                {"R", {{0.0}}},
                {"M", {{"k1", 1.0}, {"k2", 0.0}}},
                {"delta", 0.01}};
    json cfg = {{"system", sys}, {"lambdas", {{"min", -1.0}, {"max", 1.0}, {"count", 9}}}};
    CHECK(run_cli("admissible --config " + write_config(dir, cfg) + " --out " + dir.string()) ==
          commands::kExitOk);

    json sys_bad = sys;
    sys_bad["R"] = {{2.0}};
    sys_bad["M"] = {{0.0, 0.0}, {0.0, 0.0}};
    json cfg_bad = {{"system", sys_bad},
                    {"lambdas", {{"min", -1.0}, {"max", 1.0}, {"count", 9}}}};
    CHECK(run_cli("admissible --config " + write_config(dir, cfg_bad) + " --out " +
                  dir.string()) == commands::kExitNotCertified);
}

TEST_CASE("cli: rerunning a command reproduces the artifact bytes") {
    auto dir1 = scratch_dir("cli_rerun1");
    auto dir2 = scratch_dir("cli_rerun2");
    json cfg = {{"system", {{"tf", {{"num", {1.0}}, {"den", {1.0, 1.0}}}}}},
                {"lambdas", {{"min", -1.0}, {"max", 1.0}, {"count", 15}}},
                {"boundary_samples", 256}};
    std::string cfile = write_config(dir1, cfg);
    REQUIRE(run_cli("patch --config " + cfile + " --out " + dir1.string()) == commands::kExitOk);
    REQUIRE(run_cli("patch --config " + cfile + " --out " + dir2.string()) == commands::kExitOk);
    auto slurp = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(f), {});
    };
    CHECK(slurp(dir1 / "region.json") == slurp(dir2 / "region.json"));
    CHECK(slurp(dir1 / "boundary.csv") == slurp(dir2 / "boundary.csv"));
}

TEST_CASE("cli: design rejects an empty k1 grid") {
    auto dir = scratch_dir("cli_design");
    json cfg = {{"plant", {{"tf", {{"num", {1.0}}, {"den", {1.0, 1.2, 0.2}}}}}},
                {"bls", {{"tf", {{"num", {0.3}}, {"den", {1.0, 1.0}}}}}},
                {"k1_grid", json::array()}};
    CHECK(run_cli("design --config " + write_config(dir, cfg) + " --out " + dir.string()) ==
          commands::kExitConfig);
}

TEST_CASE("cli: sgcloud writes the point cloud") {
    auto dir = scratch_dir("cli_cloud");
    json sys = {{"base", {{"tf", {{"num", {1.0}}, {"den", {1.0, 1.0}}}}}},
                {"R", {{0.0}}},
                {"M", {{"k1", 1.0}, {"k2", 0.0}}},
                {"delta", 0.01}};
    json cfg = {{"system", sys},
                {"n_inputs", 5},
                {"T_grid", {2.0, 5.0}},
                {"seed", 11}};
    CHECK(run_cli("sgcloud --config " + write_config(dir, cfg) + " --out " + dir.string()) ==
          commands::kExitOk);
    CHECK(fs::exists(dir / "cloud.csv"));
    CHECK(fs::exists(dir / "cloud.json"));
}

TEST_CASE("cli: stability on a toy overlapping pair exits 1") {
    auto dir = scratch_dir("cli_stab");
    // Triple lag plant: the inverse graph of -H1 reaches the real axis at +8,
    // well inside the patch of a gain-100 base controller.
    json cfg = {{"plant", {{"tf", {{"num", {1.0}}, {"den", {1.0, 3.0, 3.0, 1.0}}}}}},
                {"bls", {{"tf", {{"num", {100.0}}, {"den", {1.0, 1.0}}}}}},
                {"lambdas_bls", {{"min", -150.0}, {"max", 150.0}, {"count", 21}}},
                {"lambdas_plant", {{"min", -8.0}, {"max", 8.0}, {"count", 33}}},
                {"mu_count", 5},
                {"samples_per_constraint", 512}};
    int rc = run_cli("stability --config " + write_config(dir, cfg) + " --out " + dir.string());
    CHECK(rc == commands::kExitNotCertified);
    CHECK(fs::exists(dir / "certificate.json"));

    json missing = cfg;
    missing.erase("plant");
    CHECK(run_cli("stability --config " + write_config(dir, missing) + " --out " +
                  dir.string()) == commands::kExitConfig);
}

TEST_SUITE_END();
