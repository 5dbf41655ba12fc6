#include "doctest.h"

#include <cmath>

#include "starlab/verifiers.hpp"

using namespace starlab;

namespace {

double witness(const Verdict& v, const std::string& name) {
    for (const auto& [key, value] : v.witness)
        if (key == name)
            return value;
    FAIL("missing witness ", name);
    return 0.0;
}

} // namespace

TEST_CASE("toy-case verdict carries the recurrence witness") {
    const Verdict v = verify_thm1(0.1);
    CHECK(v.pass);
    CHECK(witness(v, "delta1") == doctest::Approx(0.19230769230769232).epsilon(1e-12));
    CHECK(witness(v, "reward_oracle") ==
          doctest::Approx(witness(v, "reward_closed_form")).epsilon(1e-12));

    const Verdict edge = verify_thm1(0.49);
    CHECK(edge.pass);
    CHECK(witness(edge, "delta1") < 0.5);
    CHECK(witness(edge, "delta1") == doctest::Approx(0.49 / 0.9802).epsilon(1e-12));

    // delta0 = 0.5 violates the open-interval hypothesis.
    CHECK(!verify_thm1(0.5).pass);
}

TEST_CASE("general-case verdict checks closure and monotonicity") {
    const Verdict a = verify_thm2(3, 2, 0.2);
    CHECK(a.pass);
    CHECK(witness(a, "delta1") == doctest::Approx(0.92 / 2.36).epsilon(1e-12));

    CHECK(verify_thm2(2, 2, 0.1).pass);
    CHECK(verify_thm2(4, 5, 0.5).pass);
    CHECK(!verify_thm2(2, 2, 0.0).pass);
}

TEST_CASE("policy improvement verdict") {
    const Verdict v = verify_cor1(2, 2, 0.1);
    CHECK(v.pass);
    CHECK(witness(v, "reward_first") == doctest::Approx(0.52).epsilon(1e-12));

    CHECK(verify_cor1(4, 4, 0.3).pass);
    // Both endpoints are constant traces.
    CHECK(verify_cor1(3, 3, 0.0).pass);
    CHECK(verify_cor1(2, 2, 0.5).pass);
}

TEST_CASE("convergence verdict records the first crossing") {
    const Verdict v = verify_cor2(2, 2, 0.1);
    CHECK(v.pass);
    CHECK(witness(v, "first_crossing") <= 10);

    CHECK(verify_cor2(4, 3, 0.05).pass);
    CHECK(!verify_cor2(2, 2, 0.0).pass);

    // At N=5 the small-delta drift is quartic; 200 iterations fall short.
    const Verdict slow = verify_cor2(4, 5, 0.05);
    CHECK(!slow.pass);
    CHECK(verify_cor2(4, 5, 0.05, 1e-6, 2000).pass);
}

TEST_CASE("incorrect-step verdict") {
    CHECK(verify_cor3(2, 3, 0.1).pass);
    CHECK(verify_cor3(3, 2, 0.25).pass);
    CHECK(verify_cor3(4, 4, 0.05).pass);
    const Verdict v = verify_cor3(2, 2, 0.3);
    CHECK(v.pass);
    CHECK(witness(v, "l_equal_1_count") == 0);
}

TEST_CASE("uniform-start verdict") {
    Cor4Params quick;
    quick.empirical_samples = 20000;
    const Verdict v = verify_cor4(3, 3, quick);
    CHECK(v.pass);
    CHECK(witness(v, "empirical_worst_sigmas") <= 4.0);
    CHECK(verify_cor4(2, 2, quick).pass);
}

TEST_CASE("suite over a small grid is all-pass, sorted, and stable") {
    GridSpec grid;
    grid.m_values = {2, 3};
    grid.n_values = {2, 3};
    grid.delta_values = {0.1, 0.3};
    const std::vector<Verdict> verdicts = verify_all(grid, 4);
    CHECK(all_pass(verdicts));
    // 2 thm1 + (4 m,n combos x 2 deltas x 4 claims) + 4 cor4
    CHECK(verdicts.size() == 2 + 4 * 2 * 4 + 4);
    for (std::size_t i = 1; i < verdicts.size(); ++i) {
        const auto key = [](const Verdict& v) {
            return std::tuple(static_cast<int>(v.claim), v.point.states_per_step,
                              v.point.steps, v.point.delta0);
        };
        CHECK(key(verdicts[i - 1]) <= key(verdicts[i]));
    }

    // Pure data: a rerun serializes identically.
    CHECK(to_json(verify_all(grid, 1)) == to_json(verdicts));

    const nlohmann::json j = to_json(verdicts[0]);
    CHECK(j.contains("claim"));
    CHECK(j.contains("pass"));
    CHECK(j.contains("witness"));
}

TEST_CASE("summary lines carry claim, grid point, and outcome") {
    const std::string line = summary_line(verify_thm1(0.1));
    CHECK(line.find("THM1") != std::string::npos);
    CHECK(line.find("PASS") != std::string::npos);
    const std::string bad = summary_line(verify_thm1(0.5));
    CHECK(bad.find("FAIL") != std::string::npos);
}
