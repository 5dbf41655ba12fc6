#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "starlab/kernels.hpp"
#include "starlab/sampler.hpp"

namespace starlab {

// One reasoning state of the binary-addition chain: x holds the bits still
// to add (as "left+right" with equal-length remainders), z the carry bit,
// y the output bits accumulated so far.
struct BinAddState {
    std::string x;
    std::string z;
    std::string y;

    bool final() const { return x.empty() && z.empty(); }
    std::string str() const; // prints as x='101+110', z='', y=''
    auto operator<=>(const BinAddState&) const = default;
};

// Start state for `bits`-wide operands; both operands are zero-padded to the
// same width.
BinAddState make_problem(unsigned left, unsigned right, int bits);

// The deterministic reasoner: add the lowest remaining bit pair with carry
// and prepend the sum bit to y; once x is exhausted, flush the final carry
// (a carry of 0 prepends nothing). Throws AlreadyFinalError on final states.
BinAddState ground_truth_step(const BinAddState& s);

// Distinct problems whose paths meet at a shared intermediate state.
struct Collision {
    int step;
    int state;
    std::vector<int> problems;
};

// Reachable per-step state spaces for b-bit addition, the 0/1 ground-truth
// kernels between them, the 4^b question/answer pairs, and the collision
// report. The chain has N = b + 1 steps: b additions plus the carry flush.
struct BinAddChain {
    int bits = 0;
    int steps = 0;
    std::vector<std::vector<BinAddState>> states; // per step 0..N, sorted
    std::vector<DenseKernel> ground_truth;        // rectangular, one 1 per row
    std::vector<Problem> problems;
    std::vector<Collision> collisions;

    int state_index(int step, const BinAddState& s) const;
};

BinAddChain build_chain(int bits); // bits in [1, 4]

// Per-step interpolation between uniform and the ground-truth kernel with a
// shared signal delta0: the correct destination gets 1/M_n + delta0, every
// other destination 1/M_n - delta0/(M_n - 1), where M_n is the step's
// fan-out. delta0 must satisfy delta0 <= 1 - 1/M_n at every step.
std::vector<DenseKernel> noisy_kernel(const BinAddChain& chain, double delta0);

struct BinAddRow {
    int t;
    std::int64_t kept;
    std::int64_t total;
    double reward;       // kept/K
    double accuracy;     // exact answer accuracy of the updated kernels
    double gap_to_truth; // max entry deviation from the ground-truth kernels
};

struct BinAddRunResult {
    BinAddChain chain;
    std::vector<BinAddRow> rows;
    double initial_accuracy;
};

// End-to-end run on the addition chain: per-step estimation over the raw
// dense kernels, with exact accuracy recomputed from the updated kernels
// each iteration. Colliding paths make this a demonstration outside the
// disjoint-path theory; results are reported, not asserted.
BinAddRunResult run_star_on_binadd(int bits, double delta0, int samples_per_iter,
                                   int iterations, std::uint64_t seed, int workers = 1);

// Chain export: states per step and kernel entries.
nlohmann::json to_json(const BinAddChain& chain);

// CSV with header t,kept,K,reward,accuracy,gap_to_truth. The symmetric
// family's delta and alpha columns do not apply to rectangular per-step
// chains, so the demo trace carries its own schema.
std::string to_csv(const std::vector<BinAddRow>& rows);

} // namespace starlab
