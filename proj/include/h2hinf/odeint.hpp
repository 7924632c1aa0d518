#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>

#include "h2hinf/matrix_signal.hpp"
#include "h2hinf/time_grid.hpp"

namespace h2hinf {

enum class Direction { Forward, Backward };

using MatrixField = std::function<Eigen::MatrixXd(double t, const Eigen::MatrixXd& m)>;

// dM/dt = rhs(t, M) with M given at t = 0 (Forward) or t = T (Backward).
struct OdeProblem {
    MatrixField rhs;
    Eigen::MatrixXd boundary;
    Direction direction = Direction::Forward;
};

struct IntegrateOptions {
    // Replace each step's result by its symmetric part. A state of shape
    // n x (k n) is treated as k side-by-side n x n blocks, each symmetrized.
    bool symmetrize = false;
    double blowup_norm = 1e9;
};

class FiniteEscape : public std::runtime_error {
public:
    FiniteEscape(std::size_t node, double time, double norm);
    [[nodiscard]] std::size_t node() const { return node_; }
    [[nodiscard]] double time() const { return time_; }
    [[nodiscard]] double norm() const { return norm_; }

private:
    std::size_t node_;
    double time_;
    double norm_;
};

class NonFinite : public std::runtime_error {
public:
    NonFinite(std::size_t node, double time);
    [[nodiscard]] std::size_t node() const { return node_; }
    [[nodiscard]] double time() const { return time_; }

private:
    std::size_t node_;
    double time_;
};

// Classical fixed-step RK4 on the grid. Returns all N+1 nodes in ascending time
// order regardless of direction. Throws FiniteEscape once the Frobenius norm
// exceeds blowup_norm and NonFinite on NaN.
MatrixSignal integrate(const OdeProblem& problem, const TimeGrid& grid, const IntegrateOptions& opts = {});

struct ConvergenceEstimate {
    double error_coarse = 0.0;
    double error_fine = 0.0;
    // log2(error_coarse / error_fine); empty when both errors vanish ("exact").
    std::optional<double> order;
};

// Errors at the coarse nodes for steps h and h/2, against `reference` when
// given, else against an h/8 solution.
ConvergenceEstimate convergence_order(const OdeProblem& problem, const TimeGrid& coarse,
                                      const std::function<Eigen::MatrixXd(double)>& reference = {},
                                      const IntegrateOptions& opts = {});

// max_k |(M_{k+1} - M_{k-1}) / 2h - derivative(k)| over interior nodes.
double centered_residual(const MatrixSignal& signal, const TimeGrid& grid,
                         const std::function<Eigen::MatrixXd(std::size_t k)>& derivative);

// Cubic Hermite reconstruction of a sampled solution from node values and node
// derivatives; exact at nodes, O(h^4) in between.
class HermiteSignal {
public:
    HermiteSignal(MatrixSignal values, const TimeGrid& grid, const std::function<Eigen::MatrixXd(std::size_t k)>& derivative);

    [[nodiscard]] Eigen::MatrixXd operator()(double t) const;
    [[nodiscard]] const MatrixSignal& values() const { return values_; }

private:
    MatrixSignal values_;
    TimeGrid grid_;
    std::vector<Eigen::MatrixXd> slopes_;
};

} // namespace h2hinf
