#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "starlab/errors.hpp"
#include "starlab/exact_dynamics.hpp"

using namespace starlab;

namespace {

// Independent route for the forward occupancy: literal matrix-vector
// products against the dense kernel, no separation-coordinate shortcut.
std::pair<double, double> forward_by_matrix(int m, double delta, int steps) {
    const DenseKernel p = to_dense(SymmetricKernel({m, std::max(steps, 1)}, delta));
    std::vector<double> v(m, 0.0);
    v[0] = 1.0;
    for (int s = 0; s < steps; ++s) {
        std::vector<double> next(m, 0.0);
        for (int c = 0; c < m; ++c)
            for (int r = 0; r < m; ++r)
                next[c] += p.at(r, c) * v[r];
        v = next;
    }
    return {v[0], v[m - 1]};
}

} // namespace

TEST_CASE("forward recurrence matches direct matrix powers") {
    for (int m : {2, 3, 4, 5})
        for (double frac : {0.05, 0.3, 0.7, 1.0})
            for (int n : {0, 1, 2, 3, 5, 8}) {
                const double delta = frac * delta_max(m);
                const ForwardVector fv = forward(SymmetricKernel({m, 8}, delta), n);
                const auto [a, b] = forward_by_matrix(m, delta, n);
                CHECK(fv.correct == doctest::Approx(a).epsilon(1e-12));
                CHECK(fv.each_wrong == doctest::Approx(b).epsilon(1e-12));
            }
}

TEST_CASE("forward examples") {
    const SymmetricKernel k({2, 2}, 0.1);
    const ForwardVector one = forward(k, 1);
    CHECK(one.correct == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(one.each_wrong == doctest::Approx(0.4).epsilon(1e-12));

    const ForwardVector two = forward(k, 2);
    CHECK(two.correct == doctest::Approx(0.52).epsilon(1e-12));
    CHECK(two.each_wrong == doctest::Approx(0.48).epsilon(1e-12));

    // Uniform kernels mix in one step; the result is exactly 1/M.
    for (int m : {2, 3, 5})
        for (int n : {1, 4, 9}) {
            const ForwardVector fv = forward(SymmetricKernel({m, 9}, 0.0), n);
            CHECK(fv.correct == 1.0 / m);
            CHECK(fv.each_wrong == 1.0 / m);
        }

    CHECK(forward(k, 0).correct == 1.0);
    CHECK(forward(k, 0).each_wrong == 0.0);
    CHECK_THROWS_AS(forward(k, -1), ValidationError);
}

TEST_CASE("forward invariants over the grid") {
    for (int m : {2, 3, 4, 5})
        for (double frac : {0.0, 0.2, 0.6, 1.0})
            for (int n = 0; n <= 6; ++n) {
                const ForwardVector fv =
                    forward(SymmetricKernel({m, 6}, frac * delta_max(m)), n);
                CHECK(fv.correct + (m - 1) * fv.each_wrong ==
                      doctest::Approx(1.0).epsilon(1e-12));
                CHECK(fv.correct >= fv.each_wrong);
            }
}

TEST_CASE("reward examples") {
    CHECK(reward(SymmetricKernel({2, 2}, 0.1)) == doctest::Approx(0.52).epsilon(1e-12));
    CHECK(reward(SymmetricKernel({2, 2}, 0.5)) == 1.0);
    CHECK(reward(SymmetricKernel({3, 5}, 0.0)) == 1.0 / 3);

    // M=2, N=2 closed form 2(1/4 + delta^2); 1/2 + 2 delta^2, not (1+2 delta^2)/2.
    for (double d : {0.05, 0.1, 0.2, 0.3, 0.45}) {
        const double j = reward(SymmetricKernel({2, 2}, d));
        CHECK(j == doctest::Approx(2 * (0.25 + d * d)).epsilon(1e-12));
        CHECK(std::abs(j - (1 + 2 * d * d) / 2) > 1e-3);
    }
}

TEST_CASE("star_update examples") {
    const SymmetricKernel toy = star_update(SymmetricKernel({2, 2}, 0.1));
    CHECK(toy.delta() == doctest::Approx(0.1 / 0.52).epsilon(1e-12));

    // N=2 closed form: delta (delta M^2 - 2 delta M + 2M - 2) / (delta^2 M^2 + M - 1).
    const SymmetricKernel g = star_update(SymmetricKernel({3, 2}, 0.2));
    CHECK(g.delta() == doctest::Approx(0.92 / 2.36).epsilon(1e-12));

    // Uniform is an exact fixed point, bit for bit.
    for (int m : {2, 3, 4, 5})
        for (int n : {2, 3, 5})
            CHECK(star_update(SymmetricKernel({m, n}, 0.0)).delta() == 0.0);
}

TEST_CASE("star_update N=1 modes") {
    const SymmetricKernel k({3, 1}, 0.2);
    CHECK(star_update(k).delta() == 0.2);
    CHECK(star_update(k, {.n1_jump = true}).delta() == delta_max(3));
}

TEST_CASE("star_update monotonicity, boundedness, fixed points") {
    for (int m = 2; m <= 5; ++m)
        for (int n = 2; n <= 5; ++n) {
            for (double frac : {0.02, 0.1, 0.35, 0.6, 0.9, 0.99}) {
                const double d = frac * delta_max(m);
                const double d1 = star_update(SymmetricKernel({m, n}, d)).delta();
                CHECK(d1 > d);
                CHECK(d1 < delta_max(m));
                CHECK(reward(SymmetricKernel({m, n}, d1)) >
                      reward(SymmetricKernel({m, n}, d)));
            }
            CHECK(star_update(SymmetricKernel({m, n}, 0.0)).delta() == 0.0);
            const double top = delta_max(m);
            CHECK(std::abs(star_update(SymmetricKernel({m, n}, top)).delta() - top) <= 1e-12);
        }
}

TEST_CASE("toy recurrence specialization") {
    for (double d = 0.02; d < 0.5; d += 0.03) {
        const double updated = star_update(SymmetricKernel({2, 2}, d)).delta();
        CHECK(std::abs(updated - d / (2 * (0.25 + d * d))) <= 1e-12);
    }
}

TEST_CASE("iterate records the delta sequence and halt reason") {
    const IterationTrace trace = iterate(SymmetricKernel({2, 2}, 0.1), {200, 1e-6});
    CHECK(trace.halt == HaltReason::gap_tol);
    CHECK(trace.rows.back().t <= 10);
    CHECK(trace.rows[0].delta == 0.1);
    CHECK(trace.rows[1].delta == doctest::Approx(0.19230769230769232).epsilon(1e-12));
    const double d2 = trace.rows[1].delta / (2 * (0.25 + trace.rows[1].delta * trace.rows[1].delta));
    CHECK(trace.rows[2].delta == doctest::Approx(d2).epsilon(1e-12));
    CHECK(trace.rows[2].delta == doctest::Approx(0.33505154639175255).epsilon(1e-8));
    for (std::size_t i = 1; i < trace.rows.size(); ++i) {
        CHECK(trace.rows[i].delta >= trace.rows[i - 1].delta);
        CHECK(trace.rows[i].reward >= trace.rows[i - 1].reward);
    }

    const IterationTrace fixed = iterate(SymmetricKernel({2, 2}, 0.5), {5, 0.0});
    for (const TraceRow& r : fixed.rows)
        CHECK(r.delta == 0.5);
    CHECK(fixed.halt == HaltReason::max_iters);

    const IterationTrace flat = iterate(SymmetricKernel({4, 3}, 0.0), {50, 1e-8});
    CHECK(flat.rows.size() == 51);
    for (const TraceRow& r : flat.rows) {
        CHECK(r.delta == 0.0);
        CHECK(r.reward == 0.25);
    }
}

TEST_CASE("incorrect step probability") {
    CHECK(incorrect_step_probability(2, 3, 0.1, 2) == doctest::Approx(0.048).epsilon(1e-12));
    CHECK(incorrect_step_probability(2, 3, 0.5, 2) == 0.0);
    CHECK(incorrect_step_probability(3, 2, 0.0, 2) ==
          doctest::Approx(1.0 / 27).epsilon(1e-12));
    CHECK_THROWS_AS(incorrect_step_probability(2, 3, 0.1, 1), ValidationError);
    CHECK_THROWS_AS(incorrect_step_probability(2, 3, 0.1, 4), ValidationError);
}

TEST_CASE("off-diagonal transition counts") {
    CHECK(count_off_diagonal({0, {0, 0, 0}}).off_diagonal == 0);
    CHECK(count_off_diagonal({0, {0, 0, 0}}).wrong_intermediates == 0);

    const OffDiagonalCounts mid = count_off_diagonal({0, {0, 1, 0}});
    CHECK(mid.off_diagonal == 2);
    CHECK(mid.wrong_intermediates == 1);

    const OffDiagonalCounts two = count_off_diagonal({0, {0, 1, 1, 0}});
    CHECK(two.off_diagonal == 2);
    CHECK(two.wrong_intermediates == 2);

    CHECK_THROWS_AS(count_off_diagonal({1, {0, 1, 0}}), ValidationError);
    CHECK_THROWS_AS(count_off_diagonal({0, {0}}), ValidationError);
}

TEST_CASE("trace CSV format") {
    IterationTrace trace;
    trace.rows.push_back({0, 0.1, 0.6, 0.52, 0.4});
    const std::string csv = to_csv(trace);
    CHECK(csv == "t,delta,alpha,reward,gap\n0,0.1,0.6,0.52,0.4\n");
}
