#pragma once

#include <cstddef>

namespace h2hinf {

// Uniform grid t_k = k*h on [0, T], k = 0..N.
class TimeGrid {
public:
    // Throws std::invalid_argument unless horizon > 0 and steps >= 1.
    TimeGrid(double horizon, std::size_t steps);

    [[nodiscard]] double horizon() const { return horizon_; }
    [[nodiscard]] std::size_t steps() const { return steps_; }
    [[nodiscard]] std::size_t nodes() const { return steps_ + 1; }
    [[nodiscard]] double step() const { return step_; }

    // t_N is returned as the horizon itself, not N*h.
    [[nodiscard]] double time(std::size_t k) const;

    // Index of the node at or to the left of t (clamped to [0, N]).
    [[nodiscard]] std::size_t left_node(double t) const;

    // Same horizon, steps multiplied by factor.
    [[nodiscard]] TimeGrid refined(std::size_t factor) const;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double horizon_;
    std::size_t steps_;
    double step_;
};

} // namespace h2hinf
