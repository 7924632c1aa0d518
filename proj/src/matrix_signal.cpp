#include "h2hinf/matrix_signal.hpp"

#include <algorithm>
#include <stdexcept>

namespace h2hinf {

MatrixSignal MatrixSignal::constant(Eigen::MatrixXd value) {
    MatrixSignal s;
    s.rows_ = value.rows();
    s.cols_ = value.cols();
    s.data_.push_back(std::move(value));
    return s;
}

MatrixSignal MatrixSignal::zeros(Eigen::Index rows, Eigen::Index cols) {
    return constant(Eigen::MatrixXd::Zero(rows, cols));
}

MatrixSignal MatrixSignal::sampled(const TimeGrid& grid, std::vector<Eigen::MatrixXd> samples) {
    if (samples.size() != grid.nodes())
        throw std::invalid_argument("matrix signal: expected " + std::to_string(grid.nodes()) + " samples, got " +
                                    std::to_string(samples.size()));
    const auto rows = samples.front().rows();
    const auto cols = samples.front().cols();
    for (const auto& m : samples)
        if (m.rows() != rows || m.cols() != cols)
            throw std::invalid_argument("matrix signal: samples differ in shape");
    MatrixSignal s;
    s.rows_ = rows;
    s.cols_ = cols;
    s.data_ = std::move(samples);
    s.grid_ = grid;
    return s;
}

MatrixSignal MatrixSignal::generate(const TimeGrid& grid, const std::function<Eigen::MatrixXd(std::size_t)>& at_node) {
    std::vector<Eigen::MatrixXd> samples;
    samples.reserve(grid.nodes());
    for (std::size_t k = 0; k < grid.nodes(); ++k)
        samples.push_back(at_node(k));
    return sampled(grid, std::move(samples));
}

const Eigen::MatrixXd& MatrixSignal::at_node(std::size_t k) const {
    if (data_.empty())
        throw std::logic_error("matrix signal: empty");
    if (!grid_)
        return data_.front();
    if (k >= data_.size())
        throw std::out_of_range("matrix signal: node index out of range");
    return data_[k];
}

const Eigen::MatrixXd& MatrixSignal::at(double t) const {
    if (!grid_)
        return at_node(0);
    return data_[grid_->left_node(t)];
}

Eigen::MatrixXd MatrixSignal::interpolate(double t) const {
    if (!grid_)
        return at_node(0);
    const std::size_t k = grid_->left_node(t);
    if (k >= grid_->steps())
        return data_.back();
    const double s = std::clamp((t - grid_->time(k)) / grid_->step(), 0.0, 1.0);
    return (1.0 - s) * data_[k] + s * data_[k + 1];
}

double MatrixSignal::max_norm() const {
    double worst = 0.0;
    for (const auto& m : data_)
        worst = std::max(worst, m.norm());
    return worst;
}

double max_distance(const MatrixSignal& a, const MatrixSignal& b, const TimeGrid& grid) {
    double worst = 0.0;
    for (std::size_t k = 0; k < grid.nodes(); ++k)
        worst = std::max(worst, (a.at(grid.time(k)) - b.at(grid.time(k))).norm());
    return worst;
}

} // namespace h2hinf
