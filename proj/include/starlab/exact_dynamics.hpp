#pragma once

#include <string>
#include <vector>

#include "starlab/kernels.hpp"
#include "starlab/trajectory.hpp"

namespace starlab {

// Occupancy after n steps, starting from the problem's own branch: `correct`
// is the mass on the correct branch state, `each_wrong` the mass on each of
// the other M-1 branch states. correct + (M-1)*each_wrong = 1.
struct ForwardVector {
    int step;
    double correct;
    double each_wrong;
};

// n applications of the one-step mixing. Runs in the separation coordinate
// d_n = correct_n - each_wrong_n, which the step multiplies by (alpha-beta);
// this keeps both fixed points of the family exact in floating point.
ForwardVector forward(const SymmetricKernel& k, int steps);

// Probability that a rollout ends on its own answer branch after spec.steps
// steps: the first component of the forward vector.
double reward(const SymmetricKernel& k);

struct StarUpdateOptions {
    // N = 1 has no intermediate step: the filtered data holds only
    // ground-truth pairs. Default leaves the kernel unchanged; n1_jump
    // instead applies the perfect-learning reading and returns the
    // ground-truth kernel (delta = 1 - 1/M).
    bool n1_jump = false;
};

// One closed-form RL-STaR iteration: the success-filtered re-estimate of the
// kernel, which stays in the symmetric family with
//   alpha' = alpha*A / (alpha*A + (M-1)*beta*B),  A,B = forward(k, N-1).
// delta strictly increases on the open interval and is fixed at both
// endpoints.
SymmetricKernel star_update(const SymmetricKernel& k, StarUpdateOptions opts = {});

struct StopRule {
    int max_iters = 10000;
    double gap_tol = 1e-8;
};

enum class HaltReason { gap_tol, max_iters };

struct TraceRow {
    int t;
    double delta;
    double alpha;
    double reward;
    double gap; // max entry of |P_t - I| = 1 - alpha
};

// Closed-form iteration record. Row 0 is the initial kernel; each further row
// is one star_update. delta and reward are nondecreasing in t.
struct IterationTrace {
    std::vector<TraceRow> rows;
    HaltReason halt = HaltReason::max_iters;
};

IterationTrace iterate(const SymmetricKernel& k0, StopRule stop);

// CSV with header t,delta,alpha,reward,gap; doubles in shortest round-trip
// form.
std::string to_csv(const IterationTrace& trace);

// Probability that a rollout (including the uniform 1/M problem choice)
// produces a specific success trajectory with l branch-changing transitions:
// (1/M) * alpha^(N-l) * beta^l. Valid for 2 <= l <= N; success trajectories
// cannot have l = 1.
double incorrect_step_probability(int states_per_step, int steps, double delta,
                                  int off_diagonal);

struct OffDiagonalCounts {
    int off_diagonal;        // l: transitions that change branch
    int wrong_intermediates; // k: intermediate states off the problem branch
};

// Counts l and k for a theory-core trajectory (states are branch indices and
// states[0] must equal the problem branch). k = 0 implies l = 0; no relation
// between l and 2k is assumed.
OffDiagonalCounts count_off_diagonal(const Trajectory& t);

} // namespace starlab
