#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "h2hinf/disturbance.hpp"
#include "h2hinf/filtering.hpp"
#include "h2hinf/model.hpp"
#include "h2hinf/monte_carlo.hpp"
#include "h2hinf/simulate.hpp"
#include "h2hinf/synthesis.hpp"
#include "h2hinf/time_grid.hpp"

namespace h2hinf {

// Trapezoid rule of gamma^2 |v|^2 - |z|^2 along one path.
double cost_j1(const SimResult& result, double gamma, const TimeGrid& grid);
// Trapezoid rule of |z|^2 along one path.
double cost_j2(const SimResult& result, const TimeGrid& grid);

struct GainReport {
    double numerator = 0.0;    // sqrt of mean ||z~||^2
    double denominator = 0.0;  // sqrt of mean ||v||^2
    double ratio = 0.0;
    double stderr_ratio = 0.0;  // delta method; NaN below two paths
    std::size_t n_paths = 0;
    std::vector<FailedPath> failures;
};

class ZeroDisturbance : public std::runtime_error {
public:
    ZeroDisturbance() : std::runtime_error("disturbance energy is zero on every path; gain ratio undefined") {}
};

struct EnergyGainOptions {
    OutputVariant variant = OutputVariant::ControlAugmented;
    // Reference run the disturbed run is differenced against (same increments).
    BaselineMode baseline = BaselineMode::Feedback;
    Execution exec = Execution::Parallel;
};

// z~ = [Q (x - x_b); N1 U (xhat - xhat_b)] for ControlAugmented, Q (x - x_b) for StateOnly.
GainReport energy_gain(const SystemModel& model, const GainSchedule& gains, const FilterPlan& plan,
                       const TimeGrid& grid, const DisturbancePolicy& policy, std::size_t n_paths,
                       std::uint64_t seed, const EnergyGainOptions& opts = {});

struct NashOptions {
    std::size_t n_perturbations = 20;
    double magnitude = 0.1;
    std::size_t n_paths = 500;
    std::size_t segments = 10;
    double n_stderr = 3.0;
    Execution exec = Execution::Parallel;
};

enum class Player { Disturbance, Control };

struct NashTrial {
    Player player = Player::Disturbance;
    std::size_t index = 0;
    double base = 0.0;        // J1 or J2 at the equilibrium
    double perturbed = 0.0;
    double difference = 0.0;  // perturbed - base, path-averaged
    double pooled_stderr = 0.0;
    double paired_stderr = 0.0;
    bool violated = false;
};

struct NashReport {
    double j1 = 0.0;
    double j1_stderr = 0.0;
    double j2 = 0.0;
    double j2_stderr = 0.0;
    std::vector<NashTrial> trials;
    std::size_t violations = 0;
    std::vector<FailedPath> failures;
};

// Piecewise-constant perturbation of width rows on `segments` equal pieces, entries
// uniform in [-magnitude, magnitude]; a pure function of (seed, trial, player).
Path perturbation_signal(const TimeGrid& grid, Eigen::Index width, std::size_t segments, double magnitude,
                         std::uint64_t seed, std::size_t trial, Player player);

// Both players use their feedback strategies on [0, T]; one player's input is
// shifted at a time on a common seed set. A trial is violated when the
// perturbed mean falls below the equilibrium mean by more than n_stderr
// pooled standard errors.
NashReport nash_check(const SystemModel& model, const GainSchedule& gains, const FilterPlan& plan,
                      const TimeGrid& grid, std::uint64_t seed, const NashOptions& opts = {});

struct ValueReport {
    double j1_simulated = 0.0;
    double j1_stderr = 0.0;
    double j1_formula = 0.0;
    double j2_simulated = 0.0;
    double j2_stderr = 0.0;
    double j2_formula = 0.0;
    std::size_t n_paths = 0;

    // |simulated - formula| <= n_stderr * stderr + floor for both values.
    [[nodiscard]] bool passed(double n_stderr = 3.0, double floor = 0.0) const;
};

ValueReport value_consistency(const SystemModel& model, const SynthesisResult& synthesis, const TimeGrid& grid,
                              std::size_t n_paths, std::uint64_t seed, Execution exec = Execution::Parallel,
                              const AffineOptions& affine = {});

// Per-path terms: J1, J1hat, J1tilde, J1 - J1hat - J1tilde, <xhat, x~> at N/2 and N,
// |x|^2 - |xhat|^2 - |x~|^2 at N/2 and N.
std::vector<double> decomposition_terms(const SystemModel& model, const TimeGrid& grid, const SimResult& result);

struct Estimate {
    double mean = 0.0;
    double stderr_of_mean = 0.0;

    // |mean - reference| <= n_stderr * stderr (exact equality when the stderr is 0).
    [[nodiscard]] bool within(double reference, double n_stderr) const;
};

struct DecompositionReport {
    Estimate j1;
    Estimate j1_hat;
    Estimate j1_tilde;
    Estimate residual;     // J1 - J1hat - J1tilde
    Estimate cross_mid;    // <xhat, x~> at T/2
    Estimate cross_end;    // <xhat, x~> at T
    Estimate variance_mid; // |x|^2 - |xhat|^2 - |x~|^2 at T/2
    Estimate variance_end;
    std::size_t n_paths = 0;

    [[nodiscard]] bool passed(double n_stderr = 3.0) const;
};

DecompositionReport decomposition_check(const SystemModel& model, const TimeGrid& grid,
                                        const std::vector<SimResult>& results);

DecompositionReport decomposition_check(const SystemModel& model, const GainSchedule& gains, const FilterPlan& plan,
                                        const TimeGrid& grid, const DisturbancePolicy& policy, std::size_t n_paths,
                                        std::uint64_t seed, Execution exec = Execution::Parallel);

struct InnovationReport {
    double worst_z = 0.0;  // max |sample mean of dIhat_i dIhat_j - h delta_ij| / stderr
    std::size_t worst_step = 0;
    Eigen::Index worst_i = 0;
    Eigen::Index worst_j = 0;
    double max_abs_deviation = 0.0;
    std::size_t n_paths = 0;

    [[nodiscard]] bool passed(double n_stderr = 5.0) const { return worst_z <= n_stderr; }
};

// Per-step second moments of the normalized innovation increments over paths.
InnovationReport innovation_check(const SystemModel& model, const GainSchedule& gains, const FilterPlan& plan,
                                  const TimeGrid& grid, const DisturbancePolicy& policy, std::size_t n_paths,
                                  std::uint64_t seed, Execution exec = Execution::Parallel);

struct ReportRow {
    std::string name;
    double estimate = 0.0;
    double reference = 0.0;
    double stderr_of_estimate = 0.0;
    bool pass = false;
};

} // namespace h2hinf
