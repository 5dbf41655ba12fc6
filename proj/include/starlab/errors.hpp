#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace starlab {

// Argument outside an operation's documented domain. The message names the
// violated bound.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Enumeration request above the configured row cap.
class CapError : public std::runtime_error {
public:
    CapError(double requested_rows, std::uint64_t cap)
        : std::runtime_error("enumeration of " + format(requested_rows) +
                             " trajectories exceeds cap " + std::to_string(cap)),
          requested_rows(requested_rows),
          cap(cap) {}

    double requested_rows;
    std::uint64_t cap;

private:
    static std::string format(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.0f", v);
        return buf;
    }
};

// An RL-STaR iteration kept zero trajectories; no update is possible.
class EmptyFilterError : public std::runtime_error {
public:
    explicit EmptyFilterError(int iteration)
        : std::runtime_error("iteration " + std::to_string(iteration) +
                             " filtered every trajectory out (kept_count=0)"),
          iteration(iteration) {}

    int iteration;
};

// ground_truth_step applied to a state that has no successor.
class AlreadyFinalError : public std::logic_error {
public:
    explicit AlreadyFinalError(const std::string& state)
        : std::logic_error("state is already final: " + state) {}
};

} // namespace starlab
