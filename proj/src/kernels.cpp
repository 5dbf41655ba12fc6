#include "starlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "starlab/errors.hpp"

namespace starlab {

namespace {
constexpr double k_row_sum_tol = 1e-12;
constexpr double k_entry_slack = 1e-12;
} // namespace

void validate(const ChainSpec& spec) {
    if (spec.states_per_step < 2)
        throw ValidationError("states per step must be >= 2, got " +
                              std::to_string(spec.states_per_step));
    if (spec.steps < 1)
        throw ValidationError("step count must be >= 1, got " + std::to_string(spec.steps));
}

double delta_max(int states_per_step) { return 1.0 - 1.0 / states_per_step; }

SymmetricKernel::SymmetricKernel(ChainSpec spec, double delta) : spec_(spec), delta_(delta) {
    validate(spec_);
    const int m = spec_.states_per_step;
    if (!(delta >= 0.0))
        throw ValidationError("delta must be >= 0, got " + std::to_string(delta));
    if (!(delta <= delta_max(m)))
        throw ValidationError("delta must be <= 1 - 1/M = " + std::to_string(delta_max(m)) +
                              ", got " + std::to_string(delta));
    // The clamps absorb one-ulp overshoots at the endpoints: 1/M + (1-1/M)
    // can exceed 1 and 1/M - (1-1/M)/(M-1) can dip below 0 for M = 3, 6.
    // At delta = 0 both formulas reduce to 1/M bit for bit.
    alpha_ = std::min(1.0, 1.0 / m + delta);
    beta_ = std::max(0.0, 1.0 / m - delta / (m - 1));
    separation_ = std::min(1.0, delta * m / (m - 1));
}

SymmetricKernel make_symmetric(ChainSpec spec, double delta) {
    return SymmetricKernel(spec, delta);
}

DenseKernel::DenseKernel(int rows, int cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows_ < 1 || cols_ < 1)
        throw ValidationError("kernel dimensions must be positive");
    if (entries_.size() != static_cast<std::size_t>(rows_) * cols_)
        throw ValidationError("kernel entry count does not match rows*cols");
    for (int r = 0; r < rows_; ++r) {
        double sum = 0.0;
        for (int c = 0; c < cols_; ++c) {
            const double p = at(r, c);
            if (!(p >= -k_entry_slack) || !(p <= 1.0 + k_entry_slack))
                throw ValidationError("kernel entry (" + std::to_string(r) + "," +
                                      std::to_string(c) + ") = " + std::to_string(p) +
                                      " outside [0,1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > k_row_sum_tol)
            throw ValidationError("kernel row " + std::to_string(r) + " sums to " +
                                  std::to_string(sum) + ", not 1");
    }
}

DenseKernel DenseKernel::uniform(int rows, int cols) {
    return DenseKernel(rows, cols,
                       std::vector<double>(static_cast<std::size_t>(rows) * cols, 1.0 / cols));
}

DenseKernel DenseKernel::identity(int n) {
    std::vector<double> e(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        e[static_cast<std::size_t>(i) * n + i] = 1.0;
    return DenseKernel(n, n, std::move(e));
}

DenseKernel to_dense(const SymmetricKernel& k) {
    const int m = k.states();
    std::vector<double> e(static_cast<std::size_t>(m) * m, k.beta());
    for (int i = 0; i < m; ++i)
        e[static_cast<std::size_t>(i) * m + i] = k.alpha();
    return DenseKernel(m, m, std::move(e));
}

double infinity_gap(const DenseKernel& d) {
    if (!d.square())
        throw ValidationError("infinity gap requires a square kernel, got " +
                              std::to_string(d.rows()) + "x" + std::to_string(d.cols()));
    double gap = 0.0;
    for (int r = 0; r < d.rows(); ++r)
        for (int c = 0; c < d.cols(); ++c)
            gap = std::max(gap, std::abs(d.at(r, c) - (r == c ? 1.0 : 0.0)));
    return gap;
}

double SymmetricFit::clamped_delta(int m) const {
    return std::clamp(delta, 0.0, delta_max(m));
}

SymmetricKernel SymmetricFit::kernel(int steps) const {
    return SymmetricKernel({states, steps}, clamped_delta(states));
}

SymmetricFit fit_symmetric(const DenseKernel& d, double tol) {
    if (!d.square())
        throw ValidationError("fit_symmetric requires a square kernel, got " +
                              std::to_string(d.rows()) + "x" + std::to_string(d.cols()));
    const int m = d.rows();
    if (m < 2)
        throw ValidationError("fit_symmetric requires M >= 2");

    // The family has one degree of freedom; the diagonal mean estimates it and
    // row-stochasticity pins the off-diagonal.
    double diag = 0.0;
    for (int i = 0; i < m; ++i)
        diag += d.at(i, i);

    SymmetricFit fit;
    fit.states = m;
    fit.delta = diag / m - 1.0 / m;

    const double alpha = std::min(1.0, 1.0 / m + fit.clamped_delta(m));
    const double beta = (1.0 - alpha) / (m - 1);
    double dev = 0.0;
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c)
            dev = std::max(dev, std::abs(d.at(r, c) - (r == c ? alpha : beta)));
    fit.deviation = dev;
    fit.clean = dev <= tol;
    return fit;
}

nlohmann::json to_json(const SymmetricKernel& k) {
    return {{"m", k.states()}, {"n", k.steps()}, {"delta", k.delta()}};
}

nlohmann::json to_json(const DenseKernel& d) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < d.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < d.cols(); ++c)
            row.push_back(d.at(r, c));
        rows.push_back(std::move(row));
    }
    return {{"rows", d.rows()}, {"cols", d.cols()}, {"entries", std::move(rows)}};
}

SymmetricKernel symmetric_from_json(const nlohmann::json& j) {
    return SymmetricKernel({j.at("m").get<int>(), j.at("n").get<int>()},
                           j.at("delta").get<double>());
}

DenseKernel dense_from_json(const nlohmann::json& j) {
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    std::vector<double> e;
    e.reserve(static_cast<std::size_t>(rows) * cols);
    for (const auto& row : j.at("entries"))
        for (const auto& v : row)
            e.push_back(v.get<double>());
    return DenseKernel(rows, cols, std::move(e));
}

} // namespace starlab
