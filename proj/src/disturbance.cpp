#include "h2hinf/disturbance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace h2hinf {

DisturbancePolicy::DisturbancePolicy(std::vector<DisturbanceSegment> segments) : segments_(std::move(segments)) {
    if (segments_.empty())
        throw std::invalid_argument("disturbance policy needs at least one segment");
    if (segments_.front().start != 0.0)
        throw std::invalid_argument("disturbance policy must start at t = 0");
    Eigen::Index width = -1;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const auto& s = segments_[i];
        if (!(s.end > s.start))
            throw std::invalid_argument("disturbance segment " + std::to_string(i) + " is empty");
        if (i > 0 && std::abs(s.start - segments_[i - 1].end) > 1e-12 * std::max(1.0, s.start))
            throw std::invalid_argument("disturbance segments " + std::to_string(i - 1) + " and " +
                                        std::to_string(i) + " are not contiguous");
        if (s.mode == DisturbanceMode::Constant) {
            if (width >= 0 && s.value.size() != width)
                throw std::invalid_argument("constant disturbance values differ in length");
            width = s.value.size();
        }
    }
}

DisturbancePolicy DisturbancePolicy::uniform(double horizon, DisturbanceMode mode) {
    return DisturbancePolicy({{0.0, horizon, mode, {}}});
}

DisturbancePolicy DisturbancePolicy::constant(double horizon, Eigen::VectorXd value) {
    return DisturbancePolicy({{0.0, horizon, DisturbanceMode::Constant, std::move(value)}});
}

double DisturbancePolicy::end() const { return segments_.empty() ? 0.0 : segments_.back().end; }

const DisturbanceSegment& DisturbancePolicy::at(double t) const {
    if (segments_.empty())
        throw std::logic_error("empty disturbance policy");
    for (const auto& s : segments_) {
        const double slack = 1e-9 * std::max(1.0, std::abs(s.end));
        if (t < s.end - slack)
            return s;
    }
    return segments_.back();
}

DisturbancePolicy DisturbancePolicy::fitted(double horizon) const {
    std::vector<DisturbanceSegment> out;
    for (const auto& s : segments_) {
        if (s.start >= horizon)
            break;
        out.push_back(s);
    }
    if (out.empty())
        throw std::invalid_argument("disturbance policy has no segment before the horizon");
    out.back().end = horizon;
    return DisturbancePolicy(std::move(out));
}

} // namespace h2hinf
