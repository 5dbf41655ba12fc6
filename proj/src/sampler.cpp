#include "starlab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "starlab/csvio.hpp"
#include "starlab/errors.hpp"

namespace starlab {

namespace {

bool homogeneous_square(const std::vector<DenseKernel>& steps) {
    for (const DenseKernel& k : steps)
        if (!k.square() || k.rows() != steps.front().rows())
            return false;
    return true;
}

int pick_row_index(const DenseKernel& k, int row, double u) {
    // CDF walk in fixed column order; the fallback covers u landing in the
    // rounding slack above the row sum.
    int last_positive = -1;
    for (int c = 0; c < k.cols(); ++c) {
        const double p = k.at(row, c);
        if (p > 0.0) {
            last_positive = c;
            u -= p;
            if (u < 0.0)
                return c;
        }
    }
    return last_positive;
}

} // namespace

void validate(const RunConfig& cfg) {
    validate(ChainSpec{cfg.states_per_step, cfg.steps});
    if (!(cfg.delta0 >= 0.0 && cfg.delta0 <= delta_max(cfg.states_per_step)))
        throw ValidationError("delta0 outside [0, 1-1/M]");
    if (cfg.samples_per_iter < 1)
        throw ValidationError("samples per iteration must be >= 1");
    if (cfg.iterations < 1)
        throw ValidationError("iteration count must be >= 1");
    if (cfg.smoothing < 0.0)
        throw ValidationError("smoothing epsilon must be >= 0");
    if (cfg.workers < 1)
        throw ValidationError("worker count must be >= 1");
}

std::string to_string(EstimatorMode m) {
    switch (m) {
    case EstimatorMode::pooled: return "pooled";
    case EstimatorMode::per_step: return "per_step";
    case EstimatorMode::single_pair: return "single_pair";
    }
    return "?";
}

std::string to_string(Projection p) {
    return p == Projection::raw_dense ? "raw_dense" : "project_symmetric";
}

EstimatorMode estimator_from_string(const std::string& s) {
    if (s == "pooled") return EstimatorMode::pooled;
    if (s == "per_step") return EstimatorMode::per_step;
    if (s == "single_pair") return EstimatorMode::single_pair;
    throw ValidationError("unknown estimator mode: " + s);
}

Projection projection_from_string(const std::string& s) {
    if (s == "raw_dense") return Projection::raw_dense;
    if (s == "project_symmetric") return Projection::project_symmetric;
    throw ValidationError("unknown projection mode: " + s);
}

nlohmann::json to_json(const RunConfig& cfg) {
    return {{"m", cfg.states_per_step},
            {"n", cfg.steps},
            {"delta0", cfg.delta0},
            {"k", cfg.samples_per_iter},
            {"t", cfg.iterations},
            {"seed", cfg.seed},
            {"estimator", to_string(cfg.estimator)},
            {"projection", to_string(cfg.projection)},
            {"smoothing", cfg.smoothing},
            {"workers", cfg.workers}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    if (j.contains("m")) cfg.states_per_step = j.at("m").get<int>();
    if (j.contains("n")) cfg.steps = j.at("n").get<int>();
    if (j.contains("delta0")) cfg.delta0 = j.at("delta0").get<double>();
    if (j.contains("k")) cfg.samples_per_iter = j.at("k").get<int>();
    if (j.contains("t")) cfg.iterations = j.at("t").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("estimator")) cfg.estimator = estimator_from_string(j.at("estimator"));
    if (j.contains("projection")) cfg.projection = projection_from_string(j.at("projection"));
    if (j.contains("smoothing")) cfg.smoothing = j.at("smoothing").get<double>();
    if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
    return cfg;
}

StreamRng trajectory_stream(std::uint64_t seed, int iteration, int sample_index) {
    return StreamRng(seed, static_cast<std::uint32_t>(iteration),
                     static_cast<std::uint32_t>(sample_index));
}

Trajectory sample_trajectory(const std::vector<DenseKernel>& steps, const Problem& problem,
                             int problem_index, StreamRng& rng) {
    Trajectory t;
    t.problem = problem_index;
    t.states.resize(steps.size() + 1);
    t.states[0] = problem.start;
    for (std::size_t n = 0; n < steps.size(); ++n)
        t.states[n + 1] = pick_row_index(steps[n], t.states[n], rng.uniform());
    return t;
}

FilteredDataset filter_trajectories(const std::vector<Trajectory>& trajectories,
                                    const std::vector<Problem>& problems, int iteration) {
    FilteredDataset data;
    data.iteration = iteration;
    data.total_sampled = static_cast<std::int64_t>(trajectories.size());
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const Trajectory& t = trajectories[i];
        if (t.states.back() == problems[t.problem].answer) {
            data.kept.push_back(t);
            data.kept_indices.push_back(static_cast<int>(i));
        }
    }
    return data;
}

EstimateResult estimate_kernel(const FilteredDataset& data, const RunConfig& cfg,
                               const std::vector<DenseKernel>& previous) {
    if (data.kept.empty())
        throw EmptyFilterError(data.iteration);
    const int n_steps = static_cast<int>(previous.size());

    const bool pooled_like = cfg.estimator != EstimatorMode::per_step;
    if (pooled_like && !homogeneous_square(previous))
        throw ValidationError("pooled estimators need a homogeneous square chain; "
                              "use per_step");

    // One count table per step, or a single shared table for pooled modes.
    const int n_tables = pooled_like ? 1 : n_steps;
    std::vector<std::vector<std::int64_t>> counts(n_tables);
    for (int s = 0; s < n_tables; ++s)
        counts[s].assign(static_cast<std::size_t>(previous[s].rows()) * previous[s].cols(), 0);

    std::int64_t pairs = 0;
    std::int64_t diagonal = 0;
    const bool track_diagonal = homogeneous_square(previous);
    auto tally = [&](int step, int a, int b) {
        const int table = pooled_like ? 0 : step;
        counts[table][static_cast<std::size_t>(a) * previous[table].cols() + b] += 1;
        ++pairs;
        if (track_diagonal && a == b)
            ++diagonal;
    };

    if (cfg.estimator == EstimatorMode::single_pair) {
        // The training protocol draws one step per kept trajectory; the draw
        // comes from the trajectory's own stream (position N+1) so the
        // result does not depend on processing order.
        for (std::size_t i = 0; i < data.kept.size(); ++i) {
            const StreamRng rng =
                trajectory_stream(cfg.seed, data.iteration, data.kept_indices[i]);
            using u128 = unsigned __int128;
            const std::uint64_t bits = rng.bits_at(static_cast<std::uint64_t>(n_steps) + 1);
            const int n = 1 + static_cast<int>((static_cast<u128>(bits) * n_steps) >> 64);
            tally(n - 1, data.kept[i].states[n - 1], data.kept[i].states[n]);
        }
    } else {
        for (const Trajectory& t : data.kept)
            for (int n = 1; n <= n_steps; ++n)
                tally(n - 1, t.states[n - 1], t.states[n]);
    }

    EstimateResult result;
    result.pair_count = pairs;
    result.diagonal_pair_count = diagonal;

    std::vector<DenseKernel> tables;
    for (int s = 0; s < n_tables; ++s) {
        const int rows = previous[s].rows();
        const int cols = previous[s].cols();
        std::vector<double> entries(static_cast<std::size_t>(rows) * cols, 0.0);
        for (int r = 0; r < rows; ++r) {
            double total = 0.0;
            for (int c = 0; c < cols; ++c)
                total += counts[s][static_cast<std::size_t>(r) * cols + c] + cfg.smoothing;
            if (total == 0.0) {
                // Unobserved source row: keep the row the sampler used.
                for (int c = 0; c < cols; ++c)
                    entries[static_cast<std::size_t>(r) * cols + c] = previous[s].at(r, c);
                result.carried_rows.emplace_back(s, r);
            } else {
                for (int c = 0; c < cols; ++c)
                    entries[static_cast<std::size_t>(r) * cols + c] =
                        (counts[s][static_cast<std::size_t>(r) * cols + c] + cfg.smoothing) /
                        total;
            }
        }
        tables.emplace_back(rows, cols, std::move(entries));
    }

    if (pooled_like) {
        result.steps.assign(static_cast<std::size_t>(n_steps), tables[0]);
        // carried_rows from the shared table apply to every step; report them
        // against step 0 only.
    } else {
        result.steps = std::move(tables);
    }
    return result;
}

namespace {

std::vector<Trajectory> sample_iteration(const std::vector<DenseKernel>& kernels,
                                         const std::vector<Problem>& problems,
                                         const RunConfig& cfg, int iteration) {
    const int total = cfg.samples_per_iter;
    std::vector<Trajectory> trajectories(total);
    auto fill_range = [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            StreamRng rng = trajectory_stream(cfg.seed, iteration, i);
            const int p = static_cast<int>(rng.below(problems.size()));
            trajectories[i] = sample_trajectory(kernels, problems[p], p, rng);
        }
    };
    const int workers = std::min(cfg.workers, total);
    if (workers <= 1) {
        fill_range(0, total);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        const int chunk = (total + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const int lo = w * chunk;
            const int hi = std::min(total, lo + chunk);
            if (lo < hi)
                pool.emplace_back(fill_range, lo, hi);
        }
        for (std::thread& th : pool)
            th.join();
    }
    return trajectories;
}

} // namespace

EmpiricalTrace run_rl_star_chain(const std::vector<DenseKernel>& initial,
                                 const std::vector<Problem>& problems, const RunConfig& cfg) {
    if (initial.empty())
        throw ValidationError("chain has no steps");
    if (static_cast<int>(initial.size()) != cfg.steps)
        throw ValidationError("chain length does not match configured step count");
    if (cfg.samples_per_iter < 1 || cfg.iterations < 1 || cfg.workers < 1 ||
        cfg.smoothing < 0.0)
        throw ValidationError("invalid run configuration");
    if (problems.empty())
        throw ValidationError("empty problem set");
    for (std::size_t i = 1; i < initial.size(); ++i)
        if (initial[i].rows() != initial[i - 1].cols())
            throw ValidationError("chain step dimensions do not compose");
    for (const Problem& p : problems) {
        if (p.start < 0 || p.start >= initial.front().rows())
            throw ValidationError("problem start state out of range");
        if (p.answer < 0 || p.answer >= initial.back().cols())
            throw ValidationError("problem answer state out of range");
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    EmpiricalTrace trace;
    std::vector<DenseKernel> kernels = initial;

    for (int t = 1; t <= cfg.iterations; ++t) {
        const std::vector<Trajectory> trajectories =
            sample_iteration(kernels, problems, cfg, t);
        const FilteredDataset data = filter_trajectories(trajectories, problems, t);
        if (data.kept.empty())
            throw EmptyFilterError(t);
        const EstimateResult est = estimate_kernel(data, cfg, kernels);

        EmpiricalRow row;
        row.t = t;
        row.kept = data.kept_count();
        row.total = data.total_sampled;
        row.reward = data.kept_fraction();
        row.delta_hat = nan;
        row.alpha_hat = nan;
        row.delta_stderr = nan;

        if (homogeneous_square(est.steps)) {
            const int m = est.steps.front().rows();
            // Equal-weight average over steps, then the family fit; for
            // pooled modes the steps are identical and this is a no-op.
            std::vector<double> mean(static_cast<std::size_t>(m) * m, 0.0);
            for (const DenseKernel& k : est.steps)
                for (std::size_t i = 0; i < mean.size(); ++i)
                    mean[i] += k.entries()[i] / est.steps.size();
            const SymmetricFit fit = fit_symmetric(DenseKernel(m, m, std::move(mean)), 1e-9);
            row.delta_hat = fit.delta;
            row.alpha_hat = 1.0 / m + fit.delta;
            if (est.pair_count > 0) {
                const double p =
                    static_cast<double>(est.diagonal_pair_count) / est.pair_count;
                row.delta_stderr = std::sqrt(p * (1.0 - p) / est.pair_count);
            }
            if (cfg.projection == Projection::project_symmetric) {
                const DenseKernel projected = to_dense(fit.kernel(cfg.steps));
                kernels.assign(static_cast<std::size_t>(cfg.steps), projected);
            } else {
                kernels = est.steps;
            }
            double gap = 0.0;
            for (const DenseKernel& k : kernels)
                gap = std::max(gap, infinity_gap(k));
            row.gap = gap;
        } else {
            if (cfg.projection == Projection::project_symmetric)
                throw ValidationError("project_symmetric needs a homogeneous square chain");
            kernels = est.steps;
            row.gap = nan;
        }

        trace.rows.push_back(row);
        trace.kernel_history.push_back(kernels);
    }
    return trace;
}

std::string to_csv(const EmpiricalTrace& trace) {
    std::string out = "t,delta,alpha,reward,gap,kept,K,delta_hat_stderr\n";
    for (const EmpiricalRow& r : trace.rows) {
        out += std::to_string(r.t);
        out += ',';
        out += format_double(r.delta_hat);
        out += ',';
        out += format_double(r.alpha_hat);
        out += ',';
        out += format_double(r.reward);
        out += ',';
        out += format_double(r.gap);
        out += ',';
        out += std::to_string(r.kept);
        out += ',';
        out += std::to_string(r.total);
        out += ',';
        out += format_double(r.delta_stderr);
        out += '\n';
    }
    return out;
}

EmpiricalTrace run_rl_star(const RunConfig& cfg) {
    validate(cfg);
    const DenseKernel step0 =
        to_dense(make_symmetric({cfg.states_per_step, cfg.steps}, cfg.delta0));
    const std::vector<DenseKernel> initial(static_cast<std::size_t>(cfg.steps), step0);
    return run_rl_star_chain(initial, diagonal_problems(cfg.states_per_step), cfg);
}

} // namespace starlab
