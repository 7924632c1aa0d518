#include "h2hinf/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace h2hinf {

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps), step_(0.0) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("time grid: horizon must be positive and finite, got " + std::to_string(horizon));
    if (steps < 1)
        throw std::invalid_argument("time grid: steps must be >= 1");
    step_ = horizon / static_cast<double>(steps);
}

double TimeGrid::time(std::size_t k) const {
    if (k >= steps_)
        return k == steps_ ? horizon_ : throw std::out_of_range("time grid: node index out of range");
    return static_cast<double>(k) * step_;
}

std::size_t TimeGrid::left_node(double t) const {
    if (t <= 0.0)
        return 0;
    // The small offset keeps t = t_k from rounding down to k-1.
    const double position = std::floor(t / step_ + 1e-9);
    return std::min(static_cast<std::size_t>(position), steps_);
}

TimeGrid TimeGrid::refined(std::size_t factor) const { return TimeGrid(horizon_, steps_ * factor); }

} // namespace h2hinf
