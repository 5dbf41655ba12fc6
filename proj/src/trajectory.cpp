#include "starlab/trajectory.hpp"

namespace starlab {

std::vector<Problem> diagonal_problems(int branches) {
    std::vector<Problem> p(branches);
    for (int m = 0; m < branches; ++m)
        p[m] = {m, m};
    return p;
}

} // namespace starlab
