#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "h2hinf/time_grid.hpp"

namespace h2hinf {

// A deterministic matrix-valued function of time: either one constant matrix or
// N+1 samples aligned to a TimeGrid. Between nodes a sampled signal holds the
// value of the left node.
class MatrixSignal {
public:
    MatrixSignal() = default;

    static MatrixSignal constant(Eigen::MatrixXd value);
    static MatrixSignal zeros(Eigen::Index rows, Eigen::Index cols);
    // Throws std::invalid_argument if the sample count is not grid.nodes() or shapes differ.
    static MatrixSignal sampled(const TimeGrid& grid, std::vector<Eigen::MatrixXd> samples);
    static MatrixSignal generate(const TimeGrid& grid, const std::function<Eigen::MatrixXd(std::size_t)>& at_node);

    [[nodiscard]] Eigen::Index rows() const { return rows_; }
    [[nodiscard]] Eigen::Index cols() const { return cols_; }
    [[nodiscard]] bool is_constant() const { return !grid_.has_value(); }
    [[nodiscard]] const std::optional<TimeGrid>& grid() const { return grid_; }
    // 1 for a constant signal.
    [[nodiscard]] std::size_t samples() const { return data_.size(); }

    [[nodiscard]] const Eigen::MatrixXd& at_node(std::size_t k) const;
    [[nodiscard]] const Eigen::MatrixXd& at(double t) const;
    // Linear interpolation between neighbouring nodes; equals at(t) for constants.
    [[nodiscard]] Eigen::MatrixXd interpolate(double t) const;

    // Max over samples of the Frobenius norm.
    [[nodiscard]] double max_norm() const;

private:
    Eigen::Index rows_ = 0;
    Eigen::Index cols_ = 0;
    std::vector<Eigen::MatrixXd> data_;
    std::optional<TimeGrid> grid_;
};

// Node-by-node max Frobenius distance; both signals are evaluated on grid.
double max_distance(const MatrixSignal& a, const MatrixSignal& b, const TimeGrid& grid);

} // namespace h2hinf
