#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>

#include "h2hinf/matrix_signal.hpp"
#include "h2hinf/model.hpp"
#include "h2hinf/odeint.hpp"
#include "h2hinf/time_grid.hpp"

namespace h2hinf {

// Columns are grid nodes: a path of an R^d process is d x (N+1); increments are d x N.
using Path = Eigen::MatrixXd;

// Offline part of the Kalman-Bucy filter. Sigma solves the forward covariance Riccati
//   Sigma' = A Sigma + Sigma A^T + C C^T + D D^T - K H K^T,   K = (Sigma E^T + C F^T) H^{-1},  H = F F^T.
struct FilterPlan {
    MatrixSignal Sigma;          // n x n error covariance
    MatrixSignal Sigma_rate;     // n x n, right-hand side evaluated at each node
    MatrixSignal K;              // n x r filter gain
    MatrixSignal H;              // r x r
    MatrixSignal Acal;           // n x n error drift A - Sigma E^T H^{-1} E - C F^{-1} E
    MatrixSignal noise_gain;     // n x r, K F = Sigma E^T F^{-T} + C: estimate noise per unit innovation dIhat
    MatrixSignal error_gain;     // n x r, Sigma E^T F^{-T}: error noise is -error_gain dW + D dW~
    MatrixSignal F_inv;          // r x r
};

class SingularObservationNoise : public std::runtime_error {
public:
    SingularObservationNoise(std::size_t node, double condition);
    [[nodiscard]] std::size_t node() const { return node_; }

private:
    std::size_t node_;
};

struct FilterOptions {
    double max_condition_H = 1e14;
    IntegrateOptions integrate{true, 1e9};
};

FilterPlan solve_filter_covariance(const SystemModel& model, const TimeGrid& grid, const FilterOptions& opts = {});

// Error drift matrix for an arbitrary covariance value, with coefficients at t.
Eigen::MatrixXd error_drift(const SystemModel& model, const Eigen::MatrixXd& Sigma, double t);

// Sigma at any t in [0, T] (cubic Hermite through the stored nodes).
HermiteSignal dense_covariance(const FilterPlan& plan, const TimeGrid& grid);

struct FilterTrajectory {
    Path xhat;             // n x (N+1)
    Path innovation;       // r x (N+1), I
    Path innovation_hat;   // r x (N+1), Ihat = int F^{-1} dI
};

// One Euler step of dxhat = (A xhat + B2 u + B1 v + b) dt + K (dy - (E xhat + beta) dt).
class FilterStepper {
public:
    FilterStepper(const SystemModel& model, const FilterPlan& plan, const TimeGrid& grid);

    struct Step {
        Eigen::VectorXd xhat;
        Eigen::VectorXd dI;
        Eigen::VectorXd dIhat;
    };
    [[nodiscard]] Step step(std::size_t k, const Eigen::VectorXd& xhat, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& v, const Eigen::VectorXd& dy) const;

private:
    const SystemModel& model_;
    const FilterPlan& plan_;
    TimeGrid grid_;
};

// u_path is s x (N+1) or s x N, v_path m x (N+1) or m x N, y_increments r x N.
// Throws std::invalid_argument on length mismatch.
FilterTrajectory run_filter(const SystemModel& model, const FilterPlan& plan, const TimeGrid& grid, const Path& u_path,
                            const Path& v_path, const Path& y_increments);

struct ResidualReport {
    double max_residual = 0.0;
    std::size_t worst_node = 0;
};

// Checks that x~ = x - xhat follows the discretized error SDE
//   dx~ = Acal x~ dt - Sigma E^T F^{-T} dW + D dW~
// driven by the same increments.
ResidualReport error_dynamics_check(const SystemModel& model, const FilterPlan& plan, const TimeGrid& grid,
                                    const Path& x_path, const Path& xhat_path, const Path& dW, const Path& dW_tilde);

} // namespace h2hinf
