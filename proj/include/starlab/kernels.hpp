#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace starlab {

// Chain geometry: M states per step, N steps.
struct ChainSpec {
    int states_per_step = 0; // M >= 2
    int steps = 0;           // N >= 1
};

void validate(const ChainSpec& spec);

// Largest admissible signal delta for M states: 1 - 1/M.
double delta_max(int states_per_step);

// One-parameter transition family: 1/M + delta on the diagonal and
// (1 - alpha)/(M-1) = 1/M - delta/(M-1) off it. delta = 0 is the uniform
// transition, delta = 1 - 1/M the deterministic ground-truth transition.
// Immutable after construction.
class SymmetricKernel {
public:
    SymmetricKernel(ChainSpec spec, double delta);

    const ChainSpec& spec() const { return spec_; }
    int states() const { return spec_.states_per_step; }
    int steps() const { return spec_.steps; }
    double delta() const { return delta_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }

    // alpha - beta = delta * M/(M-1), evaluated without cancellation. This is
    // the contraction factor of the per-step mixing.
    double separation() const { return separation_; }

private:
    ChainSpec spec_;
    double delta_;
    double alpha_;
    double beta_;
    double separation_;
};

SymmetricKernel make_symmetric(ChainSpec spec, double delta);

// Row-stochastic step transition. Square for the closed-form theory; the
// binary-addition demo uses rectangular per-step kernels.
class DenseKernel {
public:
    DenseKernel(int rows, int cols, std::vector<double> entries);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }
    double at(int r, int c) const { return entries_[static_cast<std::size_t>(r) * cols_ + c]; }
    const std::vector<double>& entries() const { return entries_; }

    static DenseKernel uniform(int rows, int cols);
    static DenseKernel identity(int n);

private:
    int rows_;
    int cols_;
    std::vector<double> entries_;
};

DenseKernel to_dense(const SymmetricKernel& k);

// max entry of |d - I|; for a symmetric kernel this equals 1 - alpha.
double infinity_gap(const DenseKernel& d);

// Projection of a square row-stochastic matrix onto the symmetric family.
// delta is the raw estimate mean(diagonal) - 1/M and may fall outside
// [0, delta_max] for noisy inputs; kernel(steps) clamps it into range.
struct SymmetricFit {
    double delta;
    double deviation; // max |input - family member at clamped delta|
    bool clean;       // deviation <= tol

    double clamped_delta(int states) const;
    SymmetricKernel kernel(int steps) const;

    int states = 0;
};

SymmetricFit fit_symmetric(const DenseKernel& d, double tol);

// JSON forms: {"m","n","delta"} and {"rows","cols","entries"}.
nlohmann::json to_json(const SymmetricKernel& k);
nlohmann::json to_json(const DenseKernel& d);
SymmetricKernel symmetric_from_json(const nlohmann::json& j);
DenseKernel dense_from_json(const nlohmann::json& j);

} // namespace starlab
