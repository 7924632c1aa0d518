#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "h2hinf/disturbance.hpp"
#include "h2hinf/filtering.hpp"
#include "h2hinf/model.hpp"
#include "h2hinf/synthesis.hpp"
#include "h2hinf/time_grid.hpp"

namespace h2hinf {

enum class Execution { Serial, Parallel };

struct FailedPath {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    std::string message;
};

// Per-component mean and standard error over the successful paths.
// stderr is NaN ("undefined") with fewer than two paths.
struct EnsembleStats {
    std::size_t count = 0;
    std::vector<double> mean;
    std::vector<double> stderr_of_mean;
};

struct Ensemble {
    // values[i] is empty when path i failed.
    std::vector<std::vector<double>> values;
    std::vector<FailedPath> failures;
    EnsembleStats stats;
};

// Maps (path index, seed) to a fixed-length vector of metrics. Must be safe to
// call concurrently for distinct indices.
using PathMetric = std::function<std::vector<double>(std::size_t index, std::uint64_t seed)>;

// Path i uses seed base_seed + i. Exceptions are recorded per path. The serial
// and parallel schedules produce bit-identical results: each path writes its
// own slot and the reduction runs afterwards in index order.
Ensemble monte_carlo(std::size_t n_paths, std::uint64_t base_seed, const PathMetric& metric,
                     Execution exec = Execution::Parallel);

EnsembleStats summarize(const std::vector<std::vector<double>>& values);

// Closed-loop ensemble; per path [J1, J2, |x(T)|^2].
Ensemble simulate_ensemble(const SystemModel& model, const GainSchedule& gains, const FilterPlan& plan,
                           const TimeGrid& grid, const DisturbancePolicy& policy, std::size_t n_paths,
                           std::uint64_t base_seed, Execution exec = Execution::Parallel);

} // namespace h2hinf
