#include "starlab/oracle.hpp"

#include <cmath>

#include "starlab/csvio.hpp"
#include "starlab/errors.hpp"

namespace starlab {

namespace {

void check_cap(int states, int steps, std::uint64_t cap) {
    const double rows = std::pow(static_cast<double>(states), steps);
    if (rows > static_cast<double>(cap))
        throw CapError(rows, cap);
}

void check_square(const DenseKernel& step) {
    if (!step.square())
        throw ValidationError("trajectory enumeration needs a square step kernel");
}

} // namespace

TrajectoryTable enumerate_trajectories(const DenseKernel& step, int start, int steps,
                                       std::uint64_t cap) {
    check_square(step);
    const int m = step.rows();
    if (start < 0 || start >= m)
        throw ValidationError("start branch out of range");
    if (steps < 1)
        throw ValidationError("enumeration needs at least one step");
    check_cap(m, steps, cap);

    TrajectoryTable table;
    table.start = start;
    table.rows.reserve(static_cast<std::size_t>(std::pow(m, steps)));

    // Depth-first over branch choices, carrying the running product.
    std::vector<int> path(steps + 1, start);
    std::vector<double> prob(steps + 1, 1.0);
    std::vector<int> choice(steps + 1, 0);
    int depth = 1;
    while (depth >= 1) {
        if (choice[depth] == m) {
            choice[depth] = 0;
            --depth;
            ++choice[depth];
            continue;
        }
        path[depth] = choice[depth];
        prob[depth] = prob[depth - 1] * step.at(path[depth - 1], path[depth]);
        if (depth == steps) {
            Trajectory t{start, path};
            table.rows.push_back({t, prob[depth], path[depth] == start,
                                  count_off_diagonal(t).off_diagonal});
            ++choice[depth];
        } else {
            ++depth;
        }
    }
    return table;
}

TrajectoryTable enumerate_trajectories(const SymmetricKernel& k, int start, std::uint64_t cap) {
    return enumerate_trajectories(to_dense(k), start, k.steps(), cap);
}

double exact_reward(const DenseKernel& step, int steps, std::uint64_t cap) {
    check_square(step);
    const int m = step.rows();
    double total = 0.0;
    for (int start = 0; start < m; ++start) {
        const TrajectoryTable table = enumerate_trajectories(step, start, steps, cap);
        double success = 0.0;
        for (const auto& row : table.rows)
            if (row.success)
                success += row.prob;
        total += success;
    }
    return total / m;
}

double exact_reward(const SymmetricKernel& k, std::uint64_t cap) {
    return exact_reward(to_dense(k), k.steps(), cap);
}

PairLaw success_conditioned_pair_law(const DenseKernel& step, int steps, PairLawMode mode,
                                     int at_step, std::uint64_t cap) {
    check_square(step);
    const int m = step.rows();
    if (mode == PairLawMode::at_step && (at_step < 1 || at_step > steps))
        throw ValidationError("pair-law step must be in [1, N], got " + std::to_string(at_step));

    // mass[a][b]: success-filtered probability of the transition a -> b,
    // summed over the selected steps and weighted 1/M per start.
    std::vector<double> mass(static_cast<std::size_t>(m) * m, 0.0);
    for (int start = 0; start < m; ++start) {
        const TrajectoryTable table = enumerate_trajectories(step, start, steps, cap);
        for (const auto& row : table.rows) {
            if (!row.success)
                continue;
            for (int n = 1; n <= steps; ++n) {
                if (mode == PairLawMode::at_step && n != at_step)
                    continue;
                const int a = row.traj.states[n - 1];
                const int b = row.traj.states[n];
                mass[static_cast<std::size_t>(a) * m + b] += row.prob / m;
            }
        }
    }

    std::vector<double> entries(static_cast<std::size_t>(m) * m, 0.0);
    std::vector<int> flagged;
    for (int a = 0; a < m; ++a) {
        double row_mass = 0.0;
        for (int b = 0; b < m; ++b)
            row_mass += mass[static_cast<std::size_t>(a) * m + b];
        if (row_mass <= 0.0) {
            for (int b = 0; b < m; ++b)
                entries[static_cast<std::size_t>(a) * m + b] = 1.0 / m;
            flagged.push_back(a);
        } else {
            for (int b = 0; b < m; ++b)
                entries[static_cast<std::size_t>(a) * m + b] =
                    mass[static_cast<std::size_t>(a) * m + b] / row_mass;
        }
    }
    return {DenseKernel(m, m, std::move(entries)), std::move(flagged)};
}

PairLaw success_conditioned_pair_law(const SymmetricKernel& k, PairLawMode mode, int at_step,
                                     std::uint64_t cap) {
    return success_conditioned_pair_law(to_dense(k), k.steps(), mode, at_step, cap);
}

UpdateEqualityReport verify_update_equality(const SymmetricKernel& k, double tol,
                                            std::uint64_t cap) {
    // n1_jump gives star_update the same perfect-learning semantics the pair
    // law realizes when there is no intermediate step.
    const SymmetricKernel updated = star_update(k, {.n1_jump = true});
    const PairLaw law = success_conditioned_pair_law(k, PairLawMode::pooled, 1, cap);
    const SymmetricFit fit = fit_symmetric(law.kernel, tol);

    UpdateEqualityReport report;
    report.tol = tol;
    report.delta_closed_form = updated.delta();
    report.delta_from_pair_law = fit.delta;
    report.delta_difference = std::abs(updated.delta() - fit.delta);
    double dev = 0.0;
    const DenseKernel closed = to_dense(updated);
    for (int r = 0; r < closed.rows(); ++r)
        for (int c = 0; c < closed.cols(); ++c)
            dev = std::max(dev, std::abs(closed.at(r, c) - law.kernel.at(r, c)));
    report.max_entry_deviation = dev;
    report.equal = report.delta_difference <= tol && dev <= tol;
    return report;
}

double chain_success_probability(const std::vector<DenseKernel>& steps, const Problem& p) {
    if (steps.empty())
        throw ValidationError("chain has no steps");
    if (p.start < 0 || p.start >= steps.front().rows())
        throw ValidationError("problem start state out of range");

    std::vector<double> dist(steps.front().rows(), 0.0);
    dist[p.start] = 1.0;
    for (const DenseKernel& k : steps) {
        if (static_cast<int>(dist.size()) != k.rows())
            throw ValidationError("chain step dimensions do not compose");
        std::vector<double> next(k.cols(), 0.0);
        for (int r = 0; r < k.rows(); ++r) {
            if (dist[r] == 0.0)
                continue;
            for (int c = 0; c < k.cols(); ++c)
                next[c] += dist[r] * k.at(r, c);
        }
        dist.swap(next);
    }
    if (p.answer < 0 || p.answer >= static_cast<int>(dist.size()))
        throw ValidationError("problem answer state out of range");
    return dist[p.answer];
}

double chain_accuracy(const std::vector<DenseKernel>& steps,
                      const std::vector<Problem>& problems) {
    if (problems.empty())
        throw ValidationError("empty problem set");
    double total = 0.0;
    for (const Problem& p : problems)
        total += chain_success_probability(steps, p);
    return total / problems.size();
}

std::string to_csv(const std::vector<TrajectoryTable>& tables) {
    std::string out = "start,path,prob,success,l\n";
    for (const auto& table : tables) {
        for (const auto& row : table.rows) {
            out += std::to_string(table.start + 1); // 1-based labels in exports
            out += ',';
            for (std::size_t i = 0; i < row.traj.states.size(); ++i) {
                if (i)
                    out += '-';
                out += std::to_string(row.traj.states[i] + 1);
            }
            out += ',';
            out += format_double(row.prob);
            out += ',';
            out += row.success ? '1' : '0';
            out += ',';
            out += std::to_string(row.off_diagonal);
            out += '\n';
        }
    }
    return out;
}

} // namespace starlab
