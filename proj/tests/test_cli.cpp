#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"
#include "starlab/csvio.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommandResult {
    int exit_code;
    std::string output;
};

// Runs the built binary with stdout+stderr captured in a scratch file.
CommandResult run_cli(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    const fs::path log = fs::temp_directory_path() /
                         ("starlab_cli_" + std::to_string(::getpid()) + "_" +
                          std::to_string(counter++) + ".log");
    const std::string cmd =
        env + (env.empty() ? "" : " ") + STARLAB_BIN + " " + args + " > " +
        log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    CommandResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.output = starlab::read_file(log.string());
    fs::remove(log);
    return result;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() /
                         ("starlab_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("exact command writes trace and manifest") {
    const fs::path dir = scratch_dir("exact");
    const CommandResult r = run_cli("exact --m 2 --n 2 --delta0 0.1 --gap-tol 1e-6 --out " +
                                    dir.string());
    CHECK(r.exit_code == 0);

    const std::string csv = starlab::read_file((dir / "exact_trace.csv").string());
    CHECK(csv.find("t,delta,alpha,reward,gap\n0,0.1,0.6,0.52,0.4\n") == 0);
    CHECK(csv.find("\n1,0.1923076923076923,") != std::string::npos);

    const json manifest = json::parse(starlab::read_file((dir / "manifest.json").string()));
    CHECK(manifest.at("command") == "exact");
    CHECK(manifest.at("config").at("delta0") == 0.1);
    CHECK(manifest.at("outputs").size() == 1);
    CHECK(manifest.contains("started_at"));

    // Replaying the manifest's config reproduces the CSV byte for byte.
    const fs::path dir2 = scratch_dir("exact_replay");
    run_cli("exact --m 2 --n 2 --delta0 0.1 --gap-tol 1e-6 --out " + dir2.string());
    CHECK(starlab::read_file((dir2 / "exact_trace.csv").string()) == csv);
}

TEST_CASE("exact command closed-form values") {
    const fs::path dir = scratch_dir("exact_m3");
    run_cli("exact --m 3 --n 2 --delta0 0.2 --iters 1 --out " + dir.string());
    const std::string csv = starlab::read_file((dir / "exact_trace.csv").string());
    CHECK(csv.find("\n1,0.3898305084745763") != std::string::npos);

    const fs::path flat = scratch_dir("exact_flat");
    run_cli("exact --m 2 --n 2 --delta0 0 --iters 5 --out " + flat.string());
    const std::string flat_csv = starlab::read_file((flat / "exact_trace.csv").string());
    for (int t = 0; t <= 5; ++t)
        CHECK(flat_csv.find(std::to_string(t) + ",0,0.5,0.5,") != std::string::npos);

    CHECK(run_cli("exact --m 1 --n 2 --delta0 0.1").exit_code == 2);
    CHECK(run_cli("exact --m 2 --n 2 --delta0 0.7").exit_code == 2);
}

TEST_CASE("simulate is reproducible and worker-independent") {
    const fs::path a = scratch_dir("sim_a");
    const fs::path b = scratch_dir("sim_b");
    const fs::path c = scratch_dir("sim_c");
    const std::string base = "simulate --m 2 --n 2 --delta0 0.1 --k 20000 --t 3 --seed 7 ";
    CHECK(run_cli(base + "--svg --out " + a.string()).exit_code == 0);
    CHECK(run_cli(base + "--svg --out " + b.string()).exit_code == 0);
    CHECK(run_cli(base + "--workers 4 --out " + c.string()).exit_code == 0);

    const std::string trace_a = starlab::read_file((a / "empirical_trace.csv").string());
    CHECK(trace_a == starlab::read_file((b / "empirical_trace.csv").string()));
    CHECK(trace_a == starlab::read_file((c / "empirical_trace.csv").string()));
    CHECK(trace_a.find("t,delta,alpha,reward,gap,kept,K,delta_hat_stderr\n") == 0);

    CHECK(fs::exists(a / "exact_trace.csv"));
    const std::string svg = starlab::read_file((a / "delta_vs_iteration.svg").string());
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find(">iteration<") != std::string::npos);
    CHECK(svg.find(">delta<") != std::string::npos);
    CHECK(fs::exists(a / "reward_vs_iteration.svg"));

    const json manifest = json::parse(starlab::read_file((a / "manifest.json").string()));
    CHECK(manifest.at("seed") == 7);
    CHECK(manifest.at("config").at("k") == 20000);
}

TEST_CASE("simulate config file with flag overrides and env seed") {
    const fs::path dir = scratch_dir("sim_cfg");
    const fs::path cfg = dir / "config.json";
    {
        std::ofstream out(cfg);
        out << R"({"m":3,"n":2,"delta0":0.2,"k":5000,"t":2,"seed":5})";
    }
    const CommandResult r = run_cli("simulate --config " + cfg.string() + " --m 2 --out " +
                                    dir.string());
    CHECK(r.exit_code == 0);
    const json manifest = json::parse(starlab::read_file((dir / "manifest.json").string()));
    CHECK(manifest.at("config").at("m") == 2);    // flag wins
    CHECK(manifest.at("config").at("n") == 2);    // from file
    CHECK(manifest.at("config").at("seed") == 5); // file seed beats env fallback

    const fs::path env_dir = scratch_dir("sim_env");
    run_cli("simulate --m 2 --n 2 --delta0 0.1 --k 2000 --t 1 --out " + env_dir.string(),
            "STARLAB_SEED=99");
    const json env_manifest =
        json::parse(starlab::read_file((env_dir / "manifest.json").string()));
    CHECK(env_manifest.at("seed") == 99);
}

TEST_CASE("verify command exit codes and report") {
    const fs::path good = scratch_dir("verify_good");
    const CommandResult ok =
        run_cli("verify --m 2 --n 2,3 --delta0 0.1,0.3 --workers 4 --out " + good.string());
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("ALL PASS") != std::string::npos);
    const json report =
        json::parse(starlab::read_file((good / "verify_report.json").string()));
    CHECK(report.is_array());
    CHECK(!report.empty());
    for (const auto& verdict : report)
        CHECK(verdict.at("pass") == true);

    // Tolerances below double precision must produce witnessed failures.
    const fs::path bad = scratch_dir("verify_bad");
    const CommandResult strict = run_cli(
        "verify --m 3 --n 2,3 --delta0 0.1,0.3 --tol 1e-18 --out " + bad.string());
    CHECK(strict.exit_code == 1);
    CHECK(strict.output.find("FAIL") != std::string::npos);
}

TEST_CASE("oracle command emits the trajectory table and pair-law report") {
    const fs::path dir = scratch_dir("oracle");
    const CommandResult r =
        run_cli("oracle --m 2 --n 2 --delta0 0.1 --out " + dir.string());
    CHECK(r.exit_code == 0);

    const std::string csv = starlab::read_file((dir / "trajectory_table.csv").string());
    std::istringstream lines(csv);
    std::string line;
    int count = 0;
    while (std::getline(lines, line))
        ++count;
    CHECK(count == 9); // header + both starts x 4 paths

    const json report = json::parse(starlab::read_file((dir / "pair_law.json").string()));
    CHECK(report.at("max_entry_deviation").get<double>() < 1e-10);
    CHECK(report.at("equal_within_tol") == true);
    CHECK(report.at("exact_reward").get<double>() == doctest::Approx(0.52));

    const fs::path big = scratch_dir("oracle_cap");
    const CommandResult capped =
        run_cli("oracle --m 10 --n 8 --delta0 0.1 --out " + big.string());
    CHECK(capped.exit_code == 4);
    CHECK(capped.output.find("cap") != std::string::npos);
}

TEST_CASE("binadd command modes") {
    const CommandResult trace = run_cli("binadd --bits 3 --show-trace 101+110");
    CHECK(trace.exit_code == 0);
    CHECK(trace.output == "s0 = x='101+110', z='', y=''\n"
                          "s1 = x='10+11', z='0', y='1'\n"
                          "s2 = x='1+1', z='0', y='11'\n"
                          "s3 = x='', z='1', y='011'\n"
                          "s4 = x='', z='', y='1011'\n");

    const CommandResult collisions = run_cli("binadd --bits 1 --report-collisions");
    CHECK(collisions.exit_code == 0);
    CHECK(collisions.output.find("0+1") != std::string::npos);
    CHECK(collisions.output.find("1+0") != std::string::npos);

    const fs::path dir = scratch_dir("binadd_run");
    const CommandResult run = run_cli(
        "binadd --bits 2 --delta0 0.2 --k 3000 --t 2 --seed 1 --out " + dir.string());
    CHECK(run.exit_code == 0);
    const std::string csv = starlab::read_file((dir / "binadd_trace.csv").string());
    CHECK(csv.find("t,kept,K,reward,accuracy,gap_to_truth\n") == 0);
    CHECK(fs::exists(dir / "chain.json"));
    CHECK(fs::exists(dir / "manifest.json"));

    CHECK(run_cli("binadd --bits 2 --show-trace 101+110").exit_code == 2);
}
