#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "starlab/sampler.hpp"

namespace starlab {

// Numerical verdicts for the six convergence claims, checked on a grid of
// (M, N, delta0) points. Verdicts are pure data: the witnesses carry every
// number that was compared so a report can be audited without re-running.
enum class Claim { thm1, thm2, cor1, cor2, cor3, cor4 };

std::string to_string(Claim c);

struct GridPoint {
    int states_per_step = 0;
    int steps = 0;
    double delta0 = 0.0;
};

struct Verdict {
    Claim claim;
    GridPoint point;
    bool pass = false;
    double tolerance = 0.0;
    std::vector<std::pair<std::string, double>> witness;
    std::string note;
};

// Toy-case recurrence at M=2, N=2: the update equals
// delta/(2(1/4+delta^2)), strictly increases, stays below 1/2, and the
// reward matches 2(1/4+delta^2) and brute-force enumeration.
Verdict verify_thm1(double delta0, double tol = 1e-12);

// General update: family closure via the success-conditioned pair law,
// strict increase, strict bound below 1 - 1/M.
Verdict verify_thm2(int m, int n, double delta0, double tol = 1e-10);

// Policy improvement: reward strictly increases along the exact trace for
// interior delta0 and is constant at both endpoints. iters caps the trace;
// interior traces stop at the 1e-8 identity gap.
Verdict verify_cor1(int m, int n, double delta0, int iters = 200, double tol = 1e-12);

// Convergence: the identity gap decreases monotonically and crosses gap_tol
// within max_iters; the witness records the first-crossing iteration.
Verdict verify_cor2(int m, int n, double delta0, double gap_tol = 1e-6, int max_iters = 200);

// Incorrect-step trajectories: every enumerated success trajectory's
// probability equals (1/M) alpha^(N-l) beta^l for its own l, and the
// success-conditional mass on l >= 2 decreases monotonically below 1e-8
// along the exact trace. The (k, l) inventory is reported, not constrained.
// The cap is generous: drift near delta=0 is O(delta^(N-1)), so small-delta
// N=5 traces take ~10^3 iterations to leave the neighborhood of uniform.
Verdict verify_cor3(int m, int n, double delta0, double tol = 1e-12, int max_iters = 10000);

struct Cor4Params {
    int exact_iters = 50;
    int empirical_samples = 100000; // K
    int empirical_iters = 5;        // T
    std::uint64_t seed = 0xC04;
};

// Uniform start: delta stays exactly 0 with reward exactly 1/M along the
// exact trace, and an empirical run's fitted delta stays within 4 standard
// errors of 0 at every iteration.
Verdict verify_cor4(int m, int n, Cor4Params params = {});

struct GridSpec {
    std::vector<int> m_values{2, 3, 4};
    std::vector<int> n_values{2, 3, 4, 5};
    // 9-point default, inside (0, 1/2) so it is interior for every M >= 2.
    std::vector<double> delta_values{0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45};
    bool include_cor4 = true;
};

// Full suite over the grid. delta0 = 0 points route to COR4 only; THM1 runs
// at M=2, N=2. Points verify independently (optionally in parallel) and the
// report is sorted by (claim, M, N, delta0).
std::vector<Verdict> verify_all(const GridSpec& grid, int workers = 1);

bool all_pass(const std::vector<Verdict>& verdicts);
nlohmann::json to_json(const Verdict& v);
nlohmann::json to_json(const std::vector<Verdict>& verdicts);
std::string summary_line(const Verdict& v);

} // namespace starlab
