#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "starlab/exact_dynamics.hpp"
#include "starlab/kernels.hpp"
#include "starlab/trajectory.hpp"

namespace starlab {

inline constexpr std::uint64_t k_enumeration_cap = 10'000'000;

// One enumerated path from a fixed start: its product probability (without
// the 1/M problem-choice factor), whether it ends on the start branch, and
// its branch-change count l.
struct TrajectoryRow {
    Trajectory traj;
    double prob;
    bool success;
    int off_diagonal;
};

struct TrajectoryTable {
    int start = 0;
    std::vector<TrajectoryRow> rows;
};

// Every branch sequence of length `steps` from `start` under a shared square
// step kernel, in lexicographic order. Probabilities per start sum to 1.
// Deliberately does nothing clever: this module is the ground truth the
// others are checked against.
TrajectoryTable enumerate_trajectories(const DenseKernel& step, int start, int steps,
                                       std::uint64_t cap = k_enumeration_cap);
TrajectoryTable enumerate_trajectories(const SymmetricKernel& k, int start,
                                       std::uint64_t cap = k_enumeration_cap);

// Mean over uniform starts of the total success probability.
double exact_reward(const DenseKernel& step, int steps, std::uint64_t cap = k_enumeration_cap);
double exact_reward(const SymmetricKernel& k, std::uint64_t cap = k_enumeration_cap);

enum class PairLawMode { at_step, pooled };

// Conditional law of branch(s_n) given branch(s_{n-1}) among trajectories
// that end on their own start branch, aggregated over uniform starts.
// pooled mode sums pair mass over all steps before normalizing. Source rows
// with zero conditional mass are filled uniform and flagged.
struct PairLaw {
    DenseKernel kernel;
    std::vector<int> flagged_rows;
};

PairLaw success_conditioned_pair_law(const DenseKernel& step, int steps, PairLawMode mode,
                                     int at_step = 1, std::uint64_t cap = k_enumeration_cap);
PairLaw success_conditioned_pair_law(const SymmetricKernel& k, PairLawMode mode,
                                     int at_step = 1, std::uint64_t cap = k_enumeration_cap);

// Cross-validates the closed-form update against the success-conditioned
// pair law implied by the sampling-and-filtering semantics. Mismatches are
// reported, not thrown.
struct UpdateEqualityReport {
    double delta_closed_form;
    double delta_from_pair_law;
    double delta_difference;     // |closed form - pair law|
    double max_entry_deviation;  // pair law vs symmetric family member
    bool equal;
    double tol;
};

UpdateEqualityReport verify_update_equality(const SymmetricKernel& k, double tol,
                                            std::uint64_t cap = k_enumeration_cap);

// Exact success probability for one problem under per-step kernels, by
// propagating the start distribution through the chain.
double chain_success_probability(const std::vector<DenseKernel>& steps, const Problem& p);

// Mean success probability over a problem set.
double chain_accuracy(const std::vector<DenseKernel>& steps, const std::vector<Problem>& problems);

// CSV export: header start,path,prob,success,l with 1-based branch labels
// and dash-joined paths.
std::string to_csv(const std::vector<TrajectoryTable>& tables);

} // namespace starlab
