#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "h2hinf/matrix_signal.hpp"
#include "h2hinf/time_grid.hpp"

namespace h2hinf {

// State n, disturbance m, control s, observation/W r, extra state noise p.
struct Dimensions {
    Eigen::Index n = 0;
    Eigen::Index m = 0;
    Eigen::Index s = 0;
    Eigen::Index r = 0;
    Eigen::Index p = 0;
};

// Linear SDE with partial observation:
//   dx = (A x + B1 v + B2 u + b) dt + C dW + D dW~,   z = [Q x; N1 u]
//   dy = (E x + beta) dt + F dW,                       y(0) = 0
struct SystemModel {
    MatrixSignal A;     // n x n
    MatrixSignal B1;    // n x m
    MatrixSignal B2;    // n x s
    MatrixSignal C;     // n x r
    MatrixSignal D;     // n x p
    MatrixSignal b;     // n x 1
    MatrixSignal E;     // r x n
    MatrixSignal F;     // r x r
    MatrixSignal beta;  // r x 1
    MatrixSignal Q;     // n x n
    MatrixSignal N1;    // s x s
    double gamma = 1.0;
    Eigen::VectorXd x0;
    Eigen::VectorXd xhat0;
    Eigen::MatrixXd Sigma0;

    // Read from A, B1, B2, E and D; does not check consistency.
    [[nodiscard]] Dimensions dims() const;
};

// Mismatches as "field: expected RxC, got RxC"; empty when consistent.
std::vector<std::string> dimension_errors(const SystemModel& model);

struct ValidationOptions {
    double max_condition_F = 1e12;
    double orthonormal_tol = 1e-10;
    double psd_tol = 1e-10;
};

struct CheckResult {
    std::string name;
    bool passed = true;
    double worst_value = 0.0;
    std::optional<std::size_t> worst_node;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckResult> checks;

    [[nodiscard]] bool passed() const;
    [[nodiscard]] const CheckResult* first_failure() const;
    [[nodiscard]] const CheckResult* find(const std::string& name) const;
};

// Runs every check and reports each one; never throws on a bad model.
ValidationReport validate(const SystemModel& model, const TimeGrid& grid, const ValidationOptions& opts = {});

// Symmetric part (M + M^T)/2.
Eigen::MatrixXd symmetric_part(const Eigen::MatrixXd& m);

} // namespace h2hinf
