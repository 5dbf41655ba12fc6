#pragma once

#include <vector>

namespace starlab {

// A rolled-out path: state index per step (length steps+1) plus the index of
// the problem it was sampled for. For the square theory chains the state
// index at every step is the branch index; the binary-addition demo indexes
// into per-step state spaces instead.
struct Trajectory {
    int problem = 0;
    std::vector<int> states;
};

// Question/answer pair as state indices at step 0 and step N.
struct Problem {
    int start = 0;
    int answer = 0;
};

// Theory-core training set: branch m's question pairs with branch m's answer.
std::vector<Problem> diagonal_problems(int branches);

} // namespace starlab
