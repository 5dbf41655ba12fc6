#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "starlab/kernels.hpp"
#include "starlab/philox.hpp"
#include "starlab/trajectory.hpp"

namespace starlab {

enum class EstimatorMode {
    pooled,      // count all N adjacent pairs of every kept trajectory
    per_step,    // one count table per step
    single_pair, // one uniformly chosen pair per kept trajectory
};

enum class Projection {
    raw_dense,         // evolve the estimated matrix as-is
    project_symmetric, // snap the estimate back onto the one-parameter family
};

struct RunConfig {
    int states_per_step = 2; // M
    int steps = 2;           // N
    double delta0 = 0.1;
    int samples_per_iter = 10000; // K
    int iterations = 1;           // T
    std::uint64_t seed = 0;
    EstimatorMode estimator = EstimatorMode::pooled;
    Projection projection = Projection::raw_dense;
    double smoothing = 0.0; // epsilon added to every count cell when > 0
    int workers = 1;
};

void validate(const RunConfig& cfg);
nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);
std::string to_string(EstimatorMode m);
std::string to_string(Projection p);
EstimatorMode estimator_from_string(const std::string& s);
Projection projection_from_string(const std::string& s);

// Stream layout: trajectory i of iteration t draws from stream
// (seed, major=t, minor=i). Draw 0 picks the problem, draws 1..N the steps,
// draw N+1 the training pair in single_pair mode. Results are therefore
// independent of scheduling and worker count.
StreamRng trajectory_stream(std::uint64_t seed, int iteration, int sample_index);

// One rollout: N categorical draws through the per-step kernels, starting at
// the problem's start state. Consumes exactly N draws from the stream.
Trajectory sample_trajectory(const std::vector<DenseKernel>& steps, const Problem& problem,
                             int problem_index, StreamRng& rng);

// Success-only subset: trajectories whose final state is their problem's
// answer. kept_count/total_sampled estimates the reward of the sampling
// kernel.
struct FilteredDataset {
    int iteration = 0;
    std::vector<Trajectory> kept;
    std::vector<int> kept_indices; // sample index of each kept trajectory
    std::int64_t total_sampled = 0;

    std::int64_t kept_count() const { return static_cast<std::int64_t>(kept.size()); }
    double kept_fraction() const {
        return static_cast<double>(kept.size()) / static_cast<double>(total_sampled);
    }
};

FilteredDataset filter_trajectories(const std::vector<Trajectory>& trajectories,
                                    const std::vector<Problem>& problems, int iteration);

// Maximum-likelihood adjacent-pair re-estimate of the per-step kernels from
// a filtered dataset. Rows with no observations are smoothed when epsilon>0,
// otherwise carried over from `previous` and reported in carried_rows.
struct EstimateResult {
    std::vector<DenseKernel> steps;
    std::vector<std::pair<int, int>> carried_rows; // (step, row)
    std::int64_t pair_count = 0;
    std::int64_t diagonal_pair_count = 0; // square chains only; 0 otherwise
};

EstimateResult estimate_kernel(const FilteredDataset& data, const RunConfig& cfg,
                               const std::vector<DenseKernel>& previous);

struct EmpiricalRow {
    int t;
    double delta_hat;    // fitted family parameter (raw, may be negative)
    double alpha_hat;
    double reward;       // kept/K, an estimate of J of the previous kernel
    double gap;          // max over steps of |P_hat - I|, square chains only
    std::int64_t kept;
    std::int64_t total;  // K
    double delta_stderr; // binomial stderr of the diagonal-pair fraction
};

struct EmpiricalTrace {
    std::vector<EmpiricalRow> rows; // t = 1..T
    // Post-update kernels per iteration, for downstream exact evaluation.
    std::vector<std::vector<DenseKernel>> kernel_history;
};

// T iterations of sample / filter / re-estimate over an arbitrary chain.
// delta_hat, alpha_hat and gap are meaningful only for square homogeneous
// chains and are NaN otherwise.
EmpiricalTrace run_rl_star_chain(const std::vector<DenseKernel>& initial,
                                 const std::vector<Problem>& problems, const RunConfig& cfg);

// Theory-core entry point: symmetric starting kernel, diagonal problems.
EmpiricalTrace run_rl_star(const RunConfig& cfg);

// Exact-trace CSV schema plus kept,K,delta_hat_stderr.
std::string to_csv(const EmpiricalTrace& trace);

} // namespace starlab
