#include "starlab/exact_dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "starlab/csvio.hpp"
#include "starlab/errors.hpp"

namespace starlab {

ForwardVector forward(const SymmetricKernel& k, int steps) {
    if (steps < 0)
        throw ValidationError("forward step count must be >= 0, got " + std::to_string(steps));
    const int m = k.states();
    double sep = 1.0; // A_0 - B_0 with A_0 = 1, B_0 = 0
    for (int i = 0; i < steps; ++i)
        sep *= k.separation();
    return {steps, (1.0 + (m - 1) * sep) / m, (1.0 - sep) / m};
}

double reward(const SymmetricKernel& k) { return forward(k, k.steps()).correct; }

SymmetricKernel star_update(const SymmetricKernel& k, StarUpdateOptions opts) {
    const int m = k.states();
    if (k.steps() == 1)
        return opts.n1_jump ? SymmetricKernel(k.spec(), delta_max(m)) : k;

    const ForwardVector fv = forward(k, k.steps() - 1);
    // delta' = (M-1)(alpha*A - beta*B) / (M(alpha*A + (M-1)*beta*B)); the
    // numerator is evaluated as alpha*(A-B) + B*(alpha-beta) so both factors
    // vanish identically at the uniform fixed point.
    const double sep_n = fv.correct - fv.each_wrong;
    const double num = k.alpha() * sep_n + fv.each_wrong * k.separation();
    const double den = k.alpha() * fv.correct + (m - 1) * k.beta() * fv.each_wrong;
    const double delta1 = (m - 1) * num / (m * den);
    return SymmetricKernel(k.spec(), std::clamp(delta1, 0.0, delta_max(m)));
}

IterationTrace iterate(const SymmetricKernel& k0, StopRule stop) {
    if (stop.max_iters < 1)
        throw ValidationError("max_iters must be >= 1, got " + std::to_string(stop.max_iters));

    IterationTrace trace;
    SymmetricKernel k = k0;
    for (int t = 0;; ++t) {
        const double gap = 1.0 - k.alpha();
        trace.rows.push_back({t, k.delta(), k.alpha(), reward(k), gap});
        if (gap < stop.gap_tol) {
            trace.halt = HaltReason::gap_tol;
            break;
        }
        if (t == stop.max_iters) {
            trace.halt = HaltReason::max_iters;
            break;
        }
        k = star_update(k);
    }
    return trace;
}

std::string to_csv(const IterationTrace& trace) {
    std::string out = "t,delta,alpha,reward,gap\n";
    for (const TraceRow& r : trace.rows) {
        out += std::to_string(r.t);
        out += ',';
        out += format_double(r.delta);
        out += ',';
        out += format_double(r.alpha);
        out += ',';
        out += format_double(r.reward);
        out += ',';
        out += format_double(r.gap);
        out += '\n';
    }
    return out;
}

double incorrect_step_probability(int states_per_step, int steps, double delta,
                                  int off_diagonal) {
    if (off_diagonal < 2 || off_diagonal > steps)
        throw ValidationError("off-diagonal count must satisfy 2 <= l <= N, got l=" +
                              std::to_string(off_diagonal) + " with N=" +
                              std::to_string(steps));
    const SymmetricKernel k({states_per_step, steps}, delta);
    double p = 1.0 / states_per_step;
    for (int i = 0; i < steps - off_diagonal; ++i)
        p *= k.alpha();
    for (int i = 0; i < off_diagonal; ++i)
        p *= k.beta();
    return p;
}

OffDiagonalCounts count_off_diagonal(const Trajectory& t) {
    if (t.states.size() < 2)
        throw ValidationError("trajectory needs at least two states");
    if (t.states.front() != t.problem)
        throw ValidationError("trajectory does not start on its problem branch");
    for (int s : t.states)
        if (s < 0)
            throw ValidationError("negative branch index in trajectory");

    OffDiagonalCounts c{0, 0};
    const int n = static_cast<int>(t.states.size()) - 1;
    for (int i = 1; i <= n; ++i) {
        if (t.states[i] != t.states[i - 1])
            ++c.off_diagonal;
        if (i < n && t.states[i] != t.problem)
            ++c.wrong_intermediates;
    }
    return c;
}

} // namespace starlab
