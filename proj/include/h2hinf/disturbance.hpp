#pragma once

#include <Eigen/Dense>

#include <vector>

namespace h2hinf {

enum class DisturbanceMode { Zero, Constant, WorstCase };

// Active on [start, end).
struct DisturbanceSegment {
    double start = 0.0;
    double end = 0.0;
    DisturbanceMode mode = DisturbanceMode::Zero;
    Eigen::VectorXd value;  // Constant mode only
};

class DisturbancePolicy {
public:
    DisturbancePolicy() = default;
    // Throws std::invalid_argument unless the segments are contiguous, start at 0
    // and every Constant value has the same length.
    explicit DisturbancePolicy(std::vector<DisturbanceSegment> segments);

    static DisturbancePolicy uniform(double horizon, DisturbanceMode mode);
    static DisturbancePolicy constant(double horizon, Eigen::VectorXd value);

    [[nodiscard]] const std::vector<DisturbanceSegment>& segments() const { return segments_; }
    [[nodiscard]] double end() const;

    // Segment covering t; the right end of the last segment belongs to it.
    [[nodiscard]] const DisturbanceSegment& at(double t) const;

    // Same schedule on [0, horizon): segments past the horizon are dropped and
    // the last one is stretched or cut to end exactly there.
    [[nodiscard]] DisturbancePolicy fitted(double horizon) const;

private:
    std::vector<DisturbanceSegment> segments_;
};

} // namespace h2hinf
