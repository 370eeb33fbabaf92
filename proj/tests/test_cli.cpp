// End-to-end checks of the command-line tool: exit codes, overrides,
// manifest re-runs, and worker-count invariance of the artifacts.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const std::string cli = CLI_PATH;

struct CliResult {
    int code = -1;
    std::string output;
};

fs::path workspace(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("shelab_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    REQUIRE(f.good());
    f << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path log = dir / "cli.log";
    const std::string cmd = '"' + cli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = slurp(log);
    return r;
}

const std::string quick_gronwall =
    R"({"experiment":"gronwall","gronwall_points":10,"gammas":[0.3,0.6],"cs":[1.0],"workers":1})";

}  // namespace

TEST_CASE("version and help exit cleanly") {
    const fs::path dir = workspace("help");
    const CliResult v = run_cli("--version", dir);
    REQUIRE(v.code == 0);
    REQUIRE(v.output.find("0.1.0") != std::string::npos);
    const CliResult h = run_cli("--help", dir);
    REQUIRE(h.code == 0);
    REQUIRE(h.output.find("--config") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("argument and config errors exit with 2") {
    const fs::path dir = workspace("errors");
    REQUIRE(run_cli("--frobnicate", dir).code == 2);
    REQUIRE(run_cli("", dir).code == 2);  // --config is required
    REQUIRE(run_cli("--config " + (dir / "missing.json").string(), dir).code == 2);

    write_file(dir / "broken.json", "{nope");
    REQUIRE(run_cli("--config " + (dir / "broken.json").string(), dir).code == 2);

    write_file(dir / "typo.json", R"({"experiment":"gronwall","gronwal_points":10})");
    const CliResult typo = run_cli("--config " + (dir / "typo.json").string(), dir);
    REQUIRE(typo.code == 2);
    REQUIRE(typo.output.find("gronwal_points") != std::string::npos);

    write_file(dir / "bad.json", R"({"experiment":"gronwall","replicas":1})");
    REQUIRE(run_cli("--config " + (dir / "bad.json").string(), dir).code == 2);
    fs::remove_all(dir);
}

TEST_CASE("runtime failures exit with 3") {
    const fs::path dir = workspace("runtime");
    write_file(dir / "cfg.json", quick_gronwall);
    write_file(dir / "blocker", "not a directory");
    const CliResult r = run_cli("--config " + (dir / "cfg.json").string() + " --out " +
                                    (dir / "blocker").string(),
                                dir);
    REQUIRE(r.code == 3);
    REQUIRE(r.output.find("runtime error") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("assertion failures exit with 1") {
    const fs::path dir = workspace("fail");
    write_file(dir / "cfg.json",
               R"({"experiment":"she-mean","replicas":2,"workers":1,)"
               R"("times":[0.001],"mean_allowance":0})");
    const CliResult r = run_cli("--config " + (dir / "cfg.json").string() + " --out " +
                                    (dir / "out").string(),
                                dir);
    REQUIRE(r.code == 1);
    REQUIRE(r.output.find("RESULT: FAIL") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("command-line overrides land in the manifest") {
    const fs::path dir = workspace("overrides");
    write_file(dir / "cfg.json", quick_gronwall);
    const CliResult r = run_cli("--config " + (dir / "cfg.json").string() + " --out " +
                                    (dir / "out").string() +
                                    " --seed 77 --replicas 55 --workers 2",
                                dir);
    REQUIRE(r.code == 0);
    REQUIRE(r.output.find("RESULT: PASS (gronwall, seed 77)") != std::string::npos);

    const auto manifest =
        nlohmann::ordered_json::parse(slurp(dir / "out" / "gronwall.manifest.json"));
    REQUIRE(manifest["seed"] == 77);
    REQUIRE(manifest["config"]["seed"] == 77);
    REQUIRE(manifest["config"]["replicas"] == 55);
    REQUIRE(manifest["config"]["workers"] == 2);
    REQUIRE(manifest["config"]["out"] == (dir / "out").string());
    fs::remove_all(dir);
}

TEST_CASE("a manifest re-runs to byte-identical csv") {
    const fs::path dir = workspace("rerun");
    write_file(dir / "cfg.json", quick_gronwall);
    REQUIRE(run_cli("--config " + (dir / "cfg.json").string() + " --out " +
                        (dir / "a").string(),
                    dir)
                .code == 0);
    REQUIRE(run_cli("--config " + (dir / "a" / "gronwall.manifest.json").string() +
                        " --out " + (dir / "b").string(),
                    dir)
                .code == 0);
    REQUIRE(slurp(dir / "a" / "gronwall.csv") == slurp(dir / "b" / "gronwall.csv"));
    REQUIRE(slurp(dir / "b" / "gronwall.csv").rfind("gamma,c,depth,", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("worker count does not change the artifacts") {
    const fs::path dir = workspace("workers");
    write_file(dir / "cfg.json",
               R"({"experiment":"noise-check","replicas":200,"seed":5})");
    REQUIRE(run_cli("--config " + (dir / "cfg.json").string() + " --out " +
                        (dir / "w1").string() + " --workers 1",
                    dir)
                .code == 0);
    REQUIRE(run_cli("--config " + (dir / "cfg.json").string() + " --out " +
                        (dir / "w8").string() + " --workers 8",
                    dir)
                .code == 0);
    REQUIRE(slurp(dir / "w1" / "noise-check.csv") == slurp(dir / "w8" / "noise-check.csv"));

    // the manifests differ only in wall time and the echoed out/workers knobs
    auto m1 = nlohmann::ordered_json::parse(slurp(dir / "w1" / "noise-check.manifest.json"));
    auto m8 = nlohmann::ordered_json::parse(slurp(dir / "w8" / "noise-check.manifest.json"));
    REQUIRE(m1["results"].dump() == m8["results"].dump());
    fs::remove_all(dir);
}
