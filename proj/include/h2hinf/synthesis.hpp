#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <utility>

#include "h2hinf/filtering.hpp"
#include "h2hinf/matrix_signal.hpp"
#include "h2hinf/model.hpp"
#include "h2hinf/odeint.hpp"
#include "h2hinf/time_grid.hpp"

namespace h2hinf {

// Cross-coupled game Riccati pair, both zero at t = T:
//   P1' = -P1 (A + B2 U) - (A + B2 U)^T P1 + Q^T Q + U^T U + gamma^-2 P1 B1 B1^T P1
//   P2' = -P2 (A + B1 V) - (A + B1 V)^T P2 - Q^T Q + P2 B2 B2^T P2
// with U = -B2^T P2 and V = -gamma^-2 B1^T P1 substituted pointwise.
struct RiccatiPair {
    MatrixSignal P1;
    MatrixSignal P2;
};

struct AffinePair {
    MatrixSignal eta1;
    MatrixSignal eta2;
};

// u* = U xhat + U0, v* = V xhat + V0.
struct GainSchedule {
    MatrixSignal U;   // s x n
    MatrixSignal U0;  // s x 1
    MatrixSignal V;   // m x n
    MatrixSignal V0;  // m x 1
};

struct LyapunovPair {
    MatrixSignal Pi1;
    MatrixSignal Pi2;
    MatrixSignal phi1;
    MatrixSignal phi2;
    // Max node norm of the integrated (homogeneous, zero terminal) phi equation.
    double phi_integrated_norm = 0.0;
};

struct AffineOptions {
    // Keep the -U^T U0 term that J1's |N1 u|^2 contributes when u = U xhat + U0.
    // false reproduces the affine equation without it.
    bool exact_control_offset = true;
};

// Which regulated output the disturbance player is scored on.
enum class OutputVariant {
    ControlAugmented,  // z = [Q x; N1 u]: Riccati carries -U^T U
    StateOnly,         // z = Q x
};

struct SynthesisOptions {
    IntegrateOptions integrate{true, 1e9};
    AffineOptions affine{};
    FilterOptions filter{};
};

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> coupled_riccati_rates(const SystemModel& model, double t,
                                                                  const Eigen::MatrixXd& P1, const Eigen::MatrixXd& P2);

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> coupled_affine_rates(const SystemModel& model, double t,
                                                                 const Eigen::MatrixXd& P1, const Eigen::MatrixXd& P2,
                                                                 const Eigen::MatrixXd& eta1,
                                                                 const Eigen::MatrixXd& eta2,
                                                                 const AffineOptions& opts = {});

// One joint backward RK4 solve of the stacked [P1 P2]. Throws FiniteEscape when
// no closed-loop equilibrium of Riccati type exists at this gamma and horizon.
RiccatiPair solve_coupled_riccati(const SystemModel& model, const TimeGrid& grid,
                                  const IntegrateOptions& opts = {true, 1e9});

AffinePair solve_coupled_affine(const SystemModel& model, const RiccatiPair& pair, const TimeGrid& grid,
                                const AffineOptions& opts = {});

GainSchedule gains_from(const SystemModel& model, const RiccatiPair& pair, const AffinePair& affine,
                        const TimeGrid& grid);

struct BoundedRealResult {
    bool solvable = false;
    std::optional<MatrixSignal> P;
    std::optional<MatrixSignal> eta;
    std::optional<std::size_t> escape_node;
    double escape_time = 0.0;
};

struct BoundedRealOptions {
    OutputVariant variant = OutputVariant::ControlAugmented;
    // Affine control offset folded into the drift; zero when absent.
    std::optional<MatrixSignal> U0;
    AffineOptions affine{};
    IntegrateOptions integrate{true, 1e9};
};

// Backward indefinite Riccati for the closed loop with feedback U (linearly
// interpolated between nodes):
//   P' = -P (A + B2 U) - (A + B2 U)^T P + Q^T Q [+ U^T U] + gamma^-2 P B1 B1^T P,  P(T) = 0.
// Solvable on [0, T] iff the energy gain from v to the chosen output is below gamma.
BoundedRealResult bounded_real_check(const SystemModel& model, const MatrixSignal& U, const TimeGrid& grid,
                                     const BoundedRealOptions& opts = {});

// Pi1' = -(Pi1 Acal + Acal^T Pi1) + Q^T Q,  Pi2' = -(Pi2 Acal + Acal^T Pi2) - Q^T Q, zero at T.
LyapunovPair solve_lyapunov(const SystemModel& model, const FilterPlan& plan, const TimeGrid& grid);

// Minimized J1 under u = U xhat + U0 and v = v*, by trapezoid quadrature.
double optimal_value_j1(const SystemModel& model, const FilterPlan& plan, const MatrixSignal& P1,
                        const MatrixSignal& eta1, const MatrixSignal& Pi1, const MatrixSignal& U0,
                        const TimeGrid& grid, const AffineOptions& opts = {});

// Minimized J2 under v = V xhat + V0 and u = u*.
double optimal_value_j2(const SystemModel& model, const FilterPlan& plan, const MatrixSignal& P2,
                        const MatrixSignal& eta2, const MatrixSignal& Pi2, const MatrixSignal& V0,
                        const TimeGrid& grid);

struct SynthesisResult {
    FilterPlan plan;
    RiccatiPair riccati;
    AffinePair affine;
    GainSchedule gains;
    LyapunovPair lyapunov;
};

SynthesisResult synthesize(const SystemModel& model, const TimeGrid& grid, const SynthesisOptions& opts = {});

// Centered-difference residuals (max abs entry) of each backward equation.
struct SynthesisResiduals {
    double P1 = 0.0;
    double P2 = 0.0;
    double eta1 = 0.0;
    double eta2 = 0.0;
    double Pi1 = 0.0;
    double Pi2 = 0.0;
};

SynthesisResiduals synthesis_residuals(const SystemModel& model, const SynthesisResult& result, const TimeGrid& grid,
                                       const AffineOptions& opts = {});

} // namespace h2hinf
