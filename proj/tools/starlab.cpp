// starlab: batch experiment runner for the tabular self-training dynamics.
// Subcommands: exact, simulate, verify, oracle, binadd. Every command writes
// its outputs plus a manifest echoing the effective configuration; CSVs are
// the canonical outputs and re-running a manifest's config reproduces them
// byte for byte.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "starlab/binadd.hpp"
#include "starlab/csvio.hpp"
#include "starlab/errors.hpp"
#include "starlab/oracle.hpp"
#include "starlab/sampler.hpp"
#include "starlab/svg.hpp"
#include "starlab/verifiers.hpp"
#include "starlab/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class ManifestWriter {
public:
    ManifestWriter(std::string command, fs::path out_dir)
        : command_(std::move(command)), dir_(std::move(out_dir)), started_(timestamp_utc()) {
        fs::create_directories(dir_);
    }

    void set_config(json config) { config_ = std::move(config); }
    void set_seed(std::uint64_t seed) { seed_ = seed; }

    void write_output(const std::string& name, const std::string& contents) {
        starlab::write_file_atomic((dir_ / name).string(), contents);
        outputs_.push_back(name);
    }

    void finish() {
        json manifest{{"command", command_},
                      {"config", config_},
                      {"version", starlab::k_version},
                      {"started_at", started_},
                      {"finished_at", timestamp_utc()},
                      {"outputs", outputs_}};
        if (seed_)
            manifest["seed"] = *seed_;
        starlab::write_file_atomic((dir_ / "manifest.json").string(), manifest.dump(2) + "\n");
    }

private:
    std::string command_;
    fs::path dir_;
    std::string started_;
    json config_;
    std::optional<std::uint64_t> seed_;
    std::vector<std::string> outputs_;
};

// Flags override config-file keys; the merged result is what the manifest
// echoes. The seed falls back to STARLAB_SEED when neither source sets it.
starlab::RunConfig merge_run_config(const CLI::App* cmd, const std::string& config_path) {
    starlab::RunConfig cfg;
    bool have_seed = false;
    if (!config_path.empty()) {
        const json j = json::parse(starlab::read_file(config_path));
        cfg = starlab::run_config_from_json(j);
        have_seed = j.contains("seed");
    }

    const auto set = [cmd](const std::string& name) { return cmd->count(name) > 0; };
    if (set("--m")) cfg.states_per_step = cmd->get_option("--m")->as<int>();
    if (set("--n")) cfg.steps = cmd->get_option("--n")->as<int>();
    if (set("--delta0")) cfg.delta0 = cmd->get_option("--delta0")->as<double>();
    if (set("--k")) cfg.samples_per_iter = cmd->get_option("--k")->as<int>();
    if (set("--t")) cfg.iterations = cmd->get_option("--t")->as<int>();
    if (set("--seed")) {
        cfg.seed = cmd->get_option("--seed")->as<std::uint64_t>();
        have_seed = true;
    }
    if (set("--estimator"))
        cfg.estimator =
            starlab::estimator_from_string(cmd->get_option("--estimator")->as<std::string>());
    if (set("--projection"))
        cfg.projection =
            starlab::projection_from_string(cmd->get_option("--projection")->as<std::string>());
    if (set("--smoothing")) cfg.smoothing = cmd->get_option("--smoothing")->as<double>();
    if (set("--workers")) cfg.workers = cmd->get_option("--workers")->as<int>();

    if (!have_seed) {
        if (const char* env = std::getenv("STARLAB_SEED"))
            cfg.seed = std::strtoull(env, nullptr, 10);
    }
    return cfg;
}

int run_exact(int m, int n, double delta0, int iters, double gap_tol,
              const std::string& out_dir) {
    const starlab::SymmetricKernel k0({m, n}, delta0);
    const starlab::IterationTrace trace = starlab::iterate(k0, {iters, gap_tol});

    ManifestWriter manifest("exact", out_dir);
    manifest.set_config(
        {{"m", m}, {"n", n}, {"delta0", delta0}, {"iters", iters}, {"gap_tol", gap_tol}});
    manifest.write_output("exact_trace.csv", starlab::to_csv(trace));
    manifest.finish();

    const starlab::TraceRow& last = trace.rows.back();
    std::cout << "final t=" << last.t << " delta=" << starlab::format_double(last.delta)
              << " J=" << starlab::format_double(last.reward)
              << " gap=" << starlab::format_double(last.gap) << " halt="
              << (trace.halt == starlab::HaltReason::gap_tol ? "gap_tol" : "max_iters")
              << "\n";
    return 0;
}

int run_simulate(const starlab::RunConfig& cfg, bool emit_svg, const std::string& out_dir) {
    const starlab::EmpiricalTrace trace = starlab::run_rl_star(cfg);
    const starlab::IterationTrace exact = starlab::iterate(
        starlab::SymmetricKernel({cfg.states_per_step, cfg.steps}, cfg.delta0),
        {cfg.iterations, 0.0});

    ManifestWriter manifest("simulate", out_dir);
    manifest.set_config(starlab::to_json(cfg));
    manifest.set_seed(cfg.seed);
    manifest.write_output("empirical_trace.csv", starlab::to_csv(trace));
    manifest.write_output("exact_trace.csv", starlab::to_csv(exact));

    if (emit_svg) {
        starlab::Series exact_delta{"closed form", {}};
        starlab::Series exact_reward{"closed form", {}};
        for (const starlab::TraceRow& r : exact.rows) {
            exact_delta.points.emplace_back(r.t, r.delta);
            exact_reward.points.emplace_back(r.t, r.reward);
        }
        starlab::Series emp_delta{"sampled", {}};
        starlab::Series emp_reward{"sampled", {}};
        for (const starlab::EmpiricalRow& r : trace.rows) {
            emp_delta.points.emplace_back(r.t, r.delta_hat);
            // kept/K estimates the reward of the previous kernel.
            emp_reward.points.emplace_back(r.t - 1, r.reward);
        }
        manifest.write_output("delta_vs_iteration.svg",
                              starlab::line_chart_svg("iteration", "delta",
                                                      {exact_delta, emp_delta}));
        manifest.write_output("reward_vs_iteration.svg",
                              starlab::line_chart_svg("iteration", "reward",
                                                      {exact_reward, emp_reward}));
    }
    manifest.finish();

    const starlab::EmpiricalRow& last = trace.rows.back();
    std::cout << "final t=" << last.t << " delta_hat="
              << starlab::format_double(last.delta_hat) << " kept=" << last.kept << "/"
              << last.total << "\n";
    return 0;
}

int run_verify(const starlab::GridSpec& grid, bool tol_set, double tol, int workers,
               const std::string& out_dir) {
    std::vector<starlab::Verdict> verdicts;
    if (!tol_set) {
        verdicts = starlab::verify_all(grid, workers);
    } else {
        // Explicit tolerance: apply it to every claim that compares values.
        for (double d : grid.delta_values)
            if (d > 0.0 && d < 0.5)
                verdicts.push_back(starlab::verify_thm1(d, tol));
        for (int m : grid.m_values)
            for (int n : grid.n_values) {
                for (double d : grid.delta_values) {
                    if (!(d > 0.0 && d < starlab::delta_max(m)))
                        continue;
                    verdicts.push_back(starlab::verify_thm2(m, n, d, tol));
                    verdicts.push_back(starlab::verify_cor1(m, n, d, 200, tol));
                    verdicts.push_back(starlab::verify_cor2(m, n, d));
                    verdicts.push_back(starlab::verify_cor3(m, n, d, tol));
                }
                verdicts.push_back(starlab::verify_cor4(m, n));
            }
    }

    ManifestWriter manifest("verify", out_dir);
    json grid_json{{"m", grid.m_values}, {"n", grid.n_values}, {"delta0", grid.delta_values}};
    if (tol_set)
        grid_json["tol"] = tol;
    manifest.set_config(grid_json);
    manifest.write_output("verify_report.json", starlab::to_json(verdicts).dump(2) + "\n");
    manifest.finish();

    for (const starlab::Verdict& v : verdicts)
        std::cout << starlab::summary_line(v) << "\n";
    const bool ok = starlab::all_pass(verdicts);
    std::cout << (ok ? "ALL PASS" : "FAILURES PRESENT") << " (" << verdicts.size()
              << " verdicts)\n";
    return ok ? 0 : 1;
}

int run_oracle(int m, int n, double delta0, std::uint64_t cap, const std::string& out_dir) {
    const starlab::SymmetricKernel k({m, n}, delta0);
    std::vector<starlab::TrajectoryTable> tables;
    for (int start = 0; start < m; ++start)
        tables.push_back(starlab::enumerate_trajectories(k, start, cap));
    const starlab::UpdateEqualityReport eq = starlab::verify_update_equality(k, 1e-10, cap);
    const starlab::PairLaw law =
        starlab::success_conditioned_pair_law(k, starlab::PairLawMode::pooled, 1, cap);
    const double j = starlab::exact_reward(k, cap);

    ManifestWriter manifest("oracle", out_dir);
    manifest.set_config({{"m", m}, {"n", n}, {"delta0", delta0}, {"cap", cap}});
    manifest.write_output("trajectory_table.csv", starlab::to_csv(tables));
    json report{{"exact_reward", j},
                {"pair_law", starlab::to_json(law.kernel)},
                {"pair_law_flagged_rows", law.flagged_rows},
                {"delta_closed_form", eq.delta_closed_form},
                {"delta_from_pair_law", eq.delta_from_pair_law},
                {"delta_difference", eq.delta_difference},
                {"max_entry_deviation", eq.max_entry_deviation},
                {"equal_within_tol", eq.equal},
                {"tol", eq.tol}};
    manifest.write_output("pair_law.json", report.dump(2) + "\n");
    manifest.finish();

    std::cout << "exact reward J = " << starlab::format_double(j)
              << ", update deviation = " << starlab::format_double(eq.max_entry_deviation)
              << "\n";
    return 0;
}

int run_binadd(int bits, double delta0, int k, int t, std::uint64_t seed, int workers,
               const std::string& show_trace, bool report_collisions,
               const std::string& out_dir) {
    if (!show_trace.empty()) {
        // Print the reasoning trace for one problem; no simulation.
        const std::size_t plus = show_trace.find('+');
        if (plus == std::string::npos ||
            show_trace.size() != static_cast<std::size_t>(2 * bits + 1) ||
            static_cast<int>(plus) != bits)
            throw starlab::ValidationError("expected <bits>+<bits> matching --bits, got " +
                                           show_trace);
        starlab::BinAddState s{show_trace, "", ""};
        std::cout << "s0 = " << s.str() << "\n";
        for (int n = 1; n <= bits + 1; ++n) {
            s = starlab::ground_truth_step(s);
            std::cout << "s" << n << " = " << s.str() << "\n";
        }
        return 0;
    }

    if (report_collisions) {
        const starlab::BinAddChain chain = starlab::build_chain(bits);
        for (const starlab::Collision& c : chain.collisions) {
            std::cout << "step " << c.step << " state "
                      << chain.states[c.step][c.state].str() << " shared by:";
            for (int p : c.problems)
                std::cout << " " << chain.states[0][chain.problems[p].start].x;
            std::cout << "\n";
        }
        std::cout << chain.collisions.size() << " colliding states\n";
        return 0;
    }

    const starlab::BinAddRunResult result =
        starlab::run_star_on_binadd(bits, delta0, k, t, seed, workers);

    ManifestWriter manifest("binadd", out_dir);
    manifest.set_config({{"bits", bits},
                         {"delta0", delta0},
                         {"k", k},
                         {"t", t},
                         {"seed", seed},
                         {"workers", workers}});
    manifest.set_seed(seed);
    manifest.write_output("binadd_trace.csv", starlab::to_csv(result.rows));
    manifest.write_output("chain.json", starlab::to_json(result.chain).dump(2) + "\n");
    manifest.finish();

    std::cout << "initial accuracy = " << starlab::format_double(result.initial_accuracy)
              << ", final accuracy = "
              << starlab::format_double(result.rows.back().accuracy) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tabular self-training dynamics: closed-form iteration, sampling, "
                 "verification, enumeration, and a binary-addition demo"};
    app.require_subcommand(1);

    auto* exact = app.add_subcommand("exact", "closed-form iteration trace");
    int ex_m = 2, ex_n = 2, ex_iters = 10000;
    double ex_delta0 = 0.1, ex_gap_tol = 1e-8;
    std::string ex_out = ".";
    exact->add_option("--m", ex_m, "states per step (M >= 2)");
    exact->add_option("--n", ex_n, "reasoning steps (N >= 1)");
    exact->add_option("--delta0", ex_delta0, "initial signal in [0, 1-1/M]");
    exact->add_option("--iters", ex_iters, "iteration cap");
    exact->add_option("--gap-tol", ex_gap_tol, "halt when the |P-I| gap falls below this");
    exact->add_option("--out", ex_out, "output directory");

    auto* simulate = app.add_subcommand("simulate", "sampled RL-STaR run");
    int si_m = 2, si_n = 2, si_k = 10000, si_t = 1, si_workers = 1;
    double si_delta0 = 0.1, si_smoothing = 0.0;
    std::uint64_t si_seed = 0;
    std::string si_estimator = "pooled", si_projection = "raw_dense";
    std::string si_config, si_out = ".";
    bool si_svg = false;
    simulate->add_option("--m", si_m, "states per step");
    simulate->add_option("--n", si_n, "reasoning steps");
    simulate->add_option("--delta0", si_delta0, "initial signal");
    simulate->add_option("--k", si_k, "trajectories per iteration");
    simulate->add_option("--t", si_t, "iterations");
    simulate->add_option("--seed", si_seed, "stream seed (fallback: STARLAB_SEED)");
    simulate->add_option("--estimator", si_estimator, "pooled | per_step | single_pair");
    simulate->add_option("--projection", si_projection, "raw_dense | project_symmetric");
    simulate->add_option("--smoothing", si_smoothing, "additive count smoothing epsilon");
    simulate->add_option("--workers", si_workers, "sampling threads (never changes output)");
    simulate->add_option("--config", si_config, "JSON config file; flags override");
    simulate->add_flag("--svg", si_svg, "emit line charts");
    simulate->add_option("--out", si_out, "output directory");

    auto* verify = app.add_subcommand("verify", "theorem/corollary verdict suite");
    std::vector<int> ve_m{2, 3, 4};
    std::vector<int> ve_n{2, 3, 4, 5};
    std::vector<double> ve_delta{0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45};
    double ve_tol = 0.0;
    int ve_workers = 1;
    std::string ve_out = ".";
    verify->add_option("--m", ve_m, "grid of M values")->delimiter(',');
    verify->add_option("--n", ve_n, "grid of N values")->delimiter(',');
    verify->add_option("--delta0", ve_delta, "grid of delta0 values")->delimiter(',');
    verify->add_option("--tol", ve_tol, "override comparison tolerance for all claims");
    verify->add_option("--workers", ve_workers, "verification threads");
    verify->add_option("--out", ve_out, "output directory");

    auto* oracle = app.add_subcommand("oracle", "brute-force enumeration tables");
    int or_m = 2, or_n = 2;
    double or_delta0 = 0.1;
    std::uint64_t or_cap = starlab::k_enumeration_cap;
    std::string or_out = ".";
    oracle->add_option("--m", or_m, "states per step");
    oracle->add_option("--n", or_n, "reasoning steps");
    oracle->add_option("--delta0", or_delta0, "signal");
    oracle->add_option("--cap", or_cap, "enumeration row cap");
    oracle->add_option("--out", or_out, "output directory");

    auto* binadd = app.add_subcommand("binadd", "binary-addition chain demo");
    int ba_bits = 2, ba_k = 50000, ba_t = 5, ba_workers = 1;
    double ba_delta0 = 0.1;
    std::uint64_t ba_seed = 0;
    std::string ba_show_trace, ba_out = ".";
    bool ba_collisions = false;
    binadd->add_option("--bits", ba_bits, "operand width in bits (1..4)");
    binadd->add_option("--delta0", ba_delta0, "per-step signal");
    binadd->add_option("--k", ba_k, "trajectories per iteration");
    binadd->add_option("--t", ba_t, "iterations");
    binadd->add_option("--seed", ba_seed, "stream seed (fallback: STARLAB_SEED)");
    binadd->add_option("--workers", ba_workers, "sampling threads");
    binadd->add_option("--show-trace", ba_show_trace,
                       "print the step trace for one problem, e.g. 101+110");
    binadd->add_flag("--report-collisions", ba_collisions, "list shared intermediate states");
    binadd->add_option("--out", ba_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*exact)
            return run_exact(ex_m, ex_n, ex_delta0, ex_iters, ex_gap_tol, ex_out);
        if (*simulate)
            return run_simulate(merge_run_config(simulate, si_config), si_svg, si_out);
        if (*verify) {
            starlab::GridSpec grid;
            grid.m_values = ve_m;
            grid.n_values = ve_n;
            grid.delta_values = ve_delta;
            return run_verify(grid, verify->count("--tol") > 0, ve_tol, ve_workers, ve_out);
        }
        if (*oracle)
            return run_oracle(or_m, or_n, or_delta0, or_cap, or_out);
        if (*binadd) {
            if (binadd->count("--seed") == 0) {
                if (const char* env = std::getenv("STARLAB_SEED"))
                    ba_seed = std::strtoull(env, nullptr, 10);
            }
            return run_binadd(ba_bits, ba_delta0, ba_k, ba_t, ba_seed, ba_workers,
                              ba_show_trace, ba_collisions, ba_out);
        }
    } catch (const starlab::EmptyFilterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const starlab::CapError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const starlab::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    }
    return 0;
}
