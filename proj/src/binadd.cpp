#include "starlab/binadd.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "starlab/csvio.hpp"
#include "starlab/errors.hpp"
#include "starlab/oracle.hpp"

namespace starlab {

std::string BinAddState::str() const {
    return "x='" + x + "', z='" + z + "', y='" + y + "'";
}

BinAddState make_problem(unsigned left, unsigned right, int bits) {
    const unsigned top = 1u << bits;
    if (left >= top || right >= top)
        throw ValidationError("operand does not fit in " + std::to_string(bits) + " bits");
    std::string l(bits, '0'), r(bits, '0');
    for (int i = 0; i < bits; ++i) {
        if (left & (1u << i))
            l[bits - 1 - i] = '1';
        if (right & (1u << i))
            r[bits - 1 - i] = '1';
    }
    return {l + "+" + r, "", ""};
}

BinAddState ground_truth_step(const BinAddState& s) {
    if (s.final())
        throw AlreadyFinalError(s.str());

    if (s.x.empty()) {
        // Carry flush: a final carry of 1 is prepended, a 0 just clears.
        BinAddState next = s;
        if (next.z == "1")
            next.y = "1" + next.y;
        next.z.clear();
        return next;
    }

    const std::size_t plus = s.x.find('+');
    if (plus == std::string::npos || plus == 0 || plus + 1 >= s.x.size() ||
        plus != (s.x.size() - 1) / 2)
        throw ValidationError("malformed addition expression: " + s.x);
    const std::string left = s.x.substr(0, plus);
    const std::string right = s.x.substr(plus + 1);

    const int a = left.back() - '0';
    const int b = right.back() - '0';
    const int carry = s.z.empty() ? 0 : s.z[0] - '0';
    const int sum = a + b + carry;

    BinAddState next;
    next.y = static_cast<char>('0' + (sum & 1)) + s.y;
    next.z = (sum >> 1) ? "1" : "0";
    if (left.size() > 1)
        next.x = left.substr(0, left.size() - 1) + "+" + right.substr(0, right.size() - 1);
    return next;
}

int BinAddChain::state_index(int step, const BinAddState& s) const {
    const auto& space = states[step];
    const auto it = std::lower_bound(space.begin(), space.end(), s);
    if (it == space.end() || *it != s)
        throw ValidationError("state not in step " + std::to_string(step) +
                              " space: " + s.str());
    return static_cast<int>(it - space.begin());
}

BinAddChain build_chain(int bits) {
    if (bits < 1 || bits > 4)
        throw ValidationError("operand width must be in [1, 4] bits, got " +
                              std::to_string(bits));

    BinAddChain chain;
    chain.bits = bits;
    chain.steps = bits + 1;

    // Walk every problem forward, collecting reachable states per step.
    const int n_problems = 1 << (2 * bits);
    std::vector<std::vector<BinAddState>> paths(n_problems);
    for (int p = 0; p < n_problems; ++p) {
        const unsigned left = static_cast<unsigned>(p) >> bits;
        const unsigned right = static_cast<unsigned>(p) & ((1u << bits) - 1);
        BinAddState s = make_problem(left, right, bits);
        paths[p].push_back(s);
        for (int n = 0; n < chain.steps; ++n) {
            s = ground_truth_step(s);
            paths[p].push_back(s);
        }
    }

    chain.states.resize(chain.steps + 1);
    for (int n = 0; n <= chain.steps; ++n) {
        std::vector<BinAddState> space;
        for (int p = 0; p < n_problems; ++p)
            space.push_back(paths[p][n]);
        std::sort(space.begin(), space.end());
        space.erase(std::unique(space.begin(), space.end()), space.end());
        chain.states[n] = std::move(space);
    }

    for (int n = 0; n < chain.steps; ++n) {
        const int rows = static_cast<int>(chain.states[n].size());
        const int cols = static_cast<int>(chain.states[n + 1].size());
        std::vector<double> entries(static_cast<std::size_t>(rows) * cols, 0.0);
        for (int r = 0; r < rows; ++r) {
            const BinAddState next = ground_truth_step(chain.states[n][r]);
            entries[static_cast<std::size_t>(r) * cols + chain.state_index(n + 1, next)] = 1.0;
        }
        chain.ground_truth.emplace_back(rows, cols, std::move(entries));
    }

    chain.problems.resize(n_problems);
    for (int p = 0; p < n_problems; ++p)
        chain.problems[p] = {chain.state_index(0, paths[p][0]),
                             chain.state_index(chain.steps, paths[p][chain.steps])};

    // Collision report: intermediate states visited by more than one problem.
    for (int n = 1; n < chain.steps; ++n) {
        std::map<int, std::vector<int>> visitors;
        for (int p = 0; p < n_problems; ++p)
            visitors[chain.state_index(n, paths[p][n])].push_back(p);
        for (auto& [state, problems] : visitors)
            if (problems.size() > 1)
                chain.collisions.push_back({n, state, std::move(problems)});
    }
    return chain;
}

std::vector<DenseKernel> noisy_kernel(const BinAddChain& chain, double delta0) {
    if (delta0 < 0.0)
        throw ValidationError("delta0 must be >= 0");
    std::vector<DenseKernel> noisy;
    for (int n = 0; n < chain.steps; ++n) {
        const DenseKernel& truth = chain.ground_truth[n];
        const int fan_out = truth.cols();
        if (delta0 > delta_max(fan_out))
            throw ValidationError(
                "delta0 = " + std::to_string(delta0) + " infeasible at step " +
                std::to_string(n + 1) + ": fan-out " + std::to_string(fan_out) +
                " caps delta at " + std::to_string(delta_max(fan_out)));
        const double correct = std::min(1.0, 1.0 / fan_out + delta0);
        const double wrong = fan_out == 1 ? 0.0 : (1.0 - correct) / (fan_out - 1);
        std::vector<double> entries(static_cast<std::size_t>(truth.rows()) * fan_out);
        for (int r = 0; r < truth.rows(); ++r)
            for (int c = 0; c < fan_out; ++c)
                entries[static_cast<std::size_t>(r) * fan_out + c] =
                    truth.at(r, c) == 1.0 ? correct : wrong;
        noisy.emplace_back(truth.rows(), fan_out, std::move(entries));
    }
    return noisy;
}

namespace {

double deviation_from_truth(const std::vector<DenseKernel>& kernels,
                            const std::vector<DenseKernel>& truth) {
    double dev = 0.0;
    for (std::size_t n = 0; n < kernels.size(); ++n)
        for (int r = 0; r < kernels[n].rows(); ++r)
            for (int c = 0; c < kernels[n].cols(); ++c)
                dev = std::max(dev, std::abs(kernels[n].at(r, c) - truth[n].at(r, c)));
    return dev;
}

} // namespace

BinAddRunResult run_star_on_binadd(int bits, double delta0, int samples_per_iter,
                                   int iterations, std::uint64_t seed, int workers) {
    BinAddRunResult result;
    result.chain = build_chain(bits);
    const std::vector<DenseKernel> initial = noisy_kernel(result.chain, delta0);
    result.initial_accuracy = chain_accuracy(initial, result.chain.problems);

    RunConfig cfg;
    cfg.states_per_step = 2; // placeholder; the chain carries the real shape
    cfg.steps = result.chain.steps;
    cfg.delta0 = delta0;
    cfg.samples_per_iter = samples_per_iter;
    cfg.iterations = iterations;
    cfg.seed = seed;
    cfg.estimator = EstimatorMode::per_step;
    cfg.projection = Projection::raw_dense;
    cfg.workers = workers;

    const EmpiricalTrace trace = run_rl_star_chain(initial, result.chain.problems, cfg);
    for (std::size_t i = 0; i < trace.rows.size(); ++i) {
        const EmpiricalRow& row = trace.rows[i];
        BinAddRow out;
        out.t = row.t;
        out.kept = row.kept;
        out.total = row.total;
        out.reward = row.reward;
        out.accuracy = chain_accuracy(trace.kernel_history[i], result.chain.problems);
        out.gap_to_truth =
            deviation_from_truth(trace.kernel_history[i], result.chain.ground_truth);
        result.rows.push_back(out);
    }
    return result;
}

std::string to_csv(const std::vector<BinAddRow>& rows) {
    std::string out = "t,kept,K,reward,accuracy,gap_to_truth\n";
    for (const BinAddRow& r : rows) {
        out += std::to_string(r.t);
        out += ',';
        out += std::to_string(r.kept);
        out += ',';
        out += std::to_string(r.total);
        out += ',';
        out += format_double(r.reward);
        out += ',';
        out += format_double(r.accuracy);
        out += ',';
        out += format_double(r.gap_to_truth);
        out += '\n';
    }
    return out;
}

nlohmann::json to_json(const BinAddChain& chain) {
    nlohmann::json states = nlohmann::json::array();
    for (const auto& space : chain.states) {
        nlohmann::json step = nlohmann::json::array();
        for (const BinAddState& s : space)
            step.push_back(s.str());
        states.push_back(std::move(step));
    }
    nlohmann::json kernels = nlohmann::json::array();
    for (const DenseKernel& k : chain.ground_truth)
        kernels.push_back(to_json(k));
    nlohmann::json problems = nlohmann::json::array();
    for (const Problem& p : chain.problems)
        problems.push_back({{"start", p.start}, {"answer", p.answer}});
    nlohmann::json collisions = nlohmann::json::array();
    for (const Collision& c : chain.collisions)
        collisions.push_back({{"step", c.step}, {"state", c.state}, {"problems", c.problems}});
    return {{"bits", chain.bits},     {"steps", chain.steps},       {"states", std::move(states)},
            {"kernels", std::move(kernels)}, {"problems", std::move(problems)},
            {"collisions", std::move(collisions)}};
}

} // namespace starlab
