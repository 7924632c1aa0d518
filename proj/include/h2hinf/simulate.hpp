#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <stdexcept>

#include "h2hinf/disturbance.hpp"
#include "h2hinf/filtering.hpp"
#include "h2hinf/model.hpp"
#include "h2hinf/synthesis.hpp"
#include "h2hinf/time_grid.hpp"

namespace h2hinf {

// Philox stream tags: word 2 of the counter.
inline constexpr std::uint32_t kStreamIncrements = 0;
inline constexpr std::uint32_t kStreamInitialState = 1;
inline constexpr std::uint32_t kStreamPerturbation = 2;

struct BrownianIncrements {
    Path dW;              // r x N
    Path dW_tilde;        // p x N
    Eigen::VectorXd xi;   // standard normals for the initial state draw
};

// Key = seed; step k's normals come from counters (k, j, 0, 0), j = 0, 1, ...,
// two per block, the first r going to dW and the next p to dW~, scaled by sqrt(h).
// The n initial-state normals come from counters (j, 0, 1, 0).
BrownianIncrements sample_brownian(const TimeGrid& grid, Eigen::Index r, Eigen::Index p, std::uint64_t seed,
                                   Eigen::Index n_initial = 0);

struct SimResult {
    Path x;        // n x (N+1)
    Path xhat;     // n x (N+1)
    Path xtilde;   // n x (N+1)
    Path y;        // r x (N+1)
    Path u;        // s x (N+1)
    Path v;        // m x (N+1)
    Path z;        // (n+s) x (N+1)
    Path dIhat;    // r x N normalized innovation increments
    Eigen::VectorXd j1_integrand;  // gamma^2 |v|^2 - |z|^2 at each node
    Eigen::VectorXd j2_integrand;  // |z|^2 at each node
    std::uint64_t seed = 0;
    std::size_t path_index = 0;
};

// Trapezoid rule over nodal values on a uniform step h.
double path_integral(const Eigen::VectorXd& values, double h);

class PathFailure : public std::runtime_error {
public:
    PathFailure(std::size_t node, std::uint64_t seed);
    [[nodiscard]] std::size_t node() const { return node_; }
    [[nodiscard]] std::uint64_t seed() const { return seed_; }

private:
    std::size_t node_;
    std::uint64_t seed_;
};

// Additive offsets to the inputs at each node (s x (N+1) and m x (N+1));
// an empty matrix means none.
struct InputOffsets {
    Path du;
    Path dv;
};

// Euler-Maruyama for state, observation and filter on one grid. The filter is
// driven by y, u, v only.
SimResult simulate_closed_loop(const SystemModel& model, const GainSchedule& gains, const FilterPlan& plan,
                               const TimeGrid& grid, const DisturbancePolicy& policy, std::uint64_t seed,
                               const InputOffsets& offsets = {});

SimResult simulate_closed_loop(const SystemModel& model, const GainSchedule& gains, const FilterPlan& plan,
                               const TimeGrid& grid, const DisturbancePolicy& policy,
                               const BrownianIncrements& noise, const InputOffsets& offsets = {});

enum class BaselineMode {
    Open,        // u = 0, v = 0
    AffineOnly,  // u = U0, v = 0
    Feedback,    // u = U xhat + U0, v = 0
};

// Reference trajectory with v = 0 on the same increments as `seed`.
// Open needs no gains; the other modes need them.
SimResult simulate_baseline(const SystemModel& model, const FilterPlan& plan, const TimeGrid& grid,
                            std::uint64_t seed, BaselineMode mode = BaselineMode::Open,
                            const GainSchedule* gains = nullptr);

} // namespace h2hinf
