#include "h2hinf/odeint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace h2hinf {

FiniteEscape::FiniteEscape(std::size_t node, double time, double norm)
    : std::runtime_error("finite escape at node " + std::to_string(node) + " (t = " + std::to_string(time) +
                         ", norm = " + std::to_string(norm) + ")"),
      node_(node), time_(time), norm_(norm) {}

NonFinite::NonFinite(std::size_t node, double time)
    : std::runtime_error("non-finite value at node " + std::to_string(node) + " (t = " + std::to_string(time) + ")"),
      node_(node), time_(time) {}

namespace {

void symmetrize_blocks(Eigen::MatrixXd& m) {
    const Eigen::Index n = m.rows();
    if (n == 0 || m.cols() % n != 0)
        return;
    for (Eigen::Index j = 0; j < m.cols(); j += n) {
        auto block = m.block(0, j, n, n);
        const Eigen::MatrixXd sym = 0.5 * (block + block.transpose());
        block = sym;
    }
}

bool has_nan(const Eigen::MatrixXd& m) { return m.array().isNaN().any(); }

// Overflowing stages count as escape; NaN from finite stages is a defect of the field.
void check_state(const Eigen::MatrixXd& m, bool stages_overflowed, std::size_t node, double t, double blowup) {
    if (has_nan(m)) {
        if (stages_overflowed)
            throw FiniteEscape(node, t, std::numeric_limits<double>::infinity());
        throw NonFinite(node, t);
    }
    const double norm = m.norm();
    if (!(norm <= blowup))
        throw FiniteEscape(node, t, norm);
}

bool overflowed(const Eigen::MatrixXd& m, double blowup) {
    return !has_nan(m) ? !(m.norm() <= blowup) : (m.array().isInf().any());
}

} // namespace

MatrixSignal integrate(const OdeProblem& problem, const TimeGrid& grid, const IntegrateOptions& opts) {
    if (!(opts.blowup_norm > 0.0))
        throw std::invalid_argument("integrate: blowup_norm must be positive");
    if (!problem.rhs)
        throw std::invalid_argument("integrate: missing right-hand side");

    const std::size_t N = grid.steps();
    const double h = grid.step();
    const bool forward = problem.direction == Direction::Forward;
    const double dt = forward ? h : -h;

    std::vector<Eigen::MatrixXd> nodes(grid.nodes());
    Eigen::MatrixXd m = problem.boundary;
    if (opts.symmetrize)
        symmetrize_blocks(m);
    const std::size_t start = forward ? 0 : N;
    check_state(m, false, start, grid.time(start), opts.blowup_norm);
    nodes[start] = m;

    for (std::size_t i = 0; i < N; ++i) {
        const std::size_t from = forward ? i : N - i;
        const std::size_t to = forward ? i + 1 : N - i - 1;
        const double t = grid.time(from);
        const double t_mid = t + 0.5 * dt;
        const double t_end = grid.time(to);

        const Eigen::MatrixXd k1 = problem.rhs(t, m);
        const Eigen::MatrixXd k2 = problem.rhs(t_mid, m + (0.5 * dt) * k1);
        const Eigen::MatrixXd k3 = problem.rhs(t_mid, m + (0.5 * dt) * k2);
        const Eigen::MatrixXd k4 = problem.rhs(t_end, m + dt * k3);
        if (k1.rows() != m.rows() || k1.cols() != m.cols())
            throw std::invalid_argument("integrate: right-hand side changed the state shape");

        const bool stages_overflowed = overflowed(k1, opts.blowup_norm / h) || overflowed(k2, opts.blowup_norm / h) ||
                                       overflowed(k3, opts.blowup_norm / h) || overflowed(k4, opts.blowup_norm / h);
        m += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (opts.symmetrize)
            symmetrize_blocks(m);
        check_state(m, stages_overflowed, to, t_end, opts.blowup_norm);
        nodes[to] = m;
    }
    return MatrixSignal::sampled(grid, std::move(nodes));
}

ConvergenceEstimate convergence_order(const OdeProblem& problem, const TimeGrid& coarse,
                                      const std::function<Eigen::MatrixXd(double)>& reference,
                                      const IntegrateOptions& opts) {
    const TimeGrid fine = coarse.refined(2);
    const MatrixSignal coarse_sol = integrate(problem, coarse, opts);
    const MatrixSignal fine_sol = integrate(problem, fine, opts);
    std::optional<MatrixSignal> ref_sol;
    if (!reference)
        ref_sol = integrate(problem, coarse.refined(8), opts);

    ConvergenceEstimate est;
    double scale = 1.0;
    for (std::size_t k = 0; k < coarse.nodes(); ++k) {
        const Eigen::MatrixXd truth = reference ? reference(coarse.time(k)) : Eigen::MatrixXd(ref_sol->at_node(8 * k));
        scale = std::max(scale, truth.norm());
        est.error_coarse = std::max(est.error_coarse, (coarse_sol.at_node(k) - truth).norm());
        est.error_fine = std::max(est.error_fine, (fine_sol.at_node(2 * k) - truth).norm());
    }
    // Errors at rounding level carry no order information.
    const double noise = 1e-13 * scale;
    if (est.error_coarse <= noise)
        return est;
    if (est.error_fine > noise)
        est.order = std::log2(est.error_coarse / est.error_fine);
    else
        est.order = std::numeric_limits<double>::infinity();
    return est;
}

double centered_residual(const MatrixSignal& signal, const TimeGrid& grid,
                         const std::function<Eigen::MatrixXd(std::size_t k)>& derivative) {
    const double h = grid.step();
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < grid.nodes(); ++k) {
        const Eigen::MatrixXd diff = (signal.at_node(k + 1) - signal.at_node(k - 1)) / (2.0 * h);
        worst = std::max(worst, (diff - derivative(k)).cwiseAbs().maxCoeff());
    }
    return worst;
}

HermiteSignal::HermiteSignal(MatrixSignal values, const TimeGrid& grid,
                             const std::function<Eigen::MatrixXd(std::size_t k)>& derivative)
    : values_(std::move(values)), grid_(grid) {
    if (!values_.is_constant()) {
        slopes_.reserve(grid.nodes());
        for (std::size_t k = 0; k < grid.nodes(); ++k)
            slopes_.push_back(derivative(k));
    }
}

Eigen::MatrixXd HermiteSignal::operator()(double t) const {
    if (values_.is_constant())
        return values_.at_node(0);
    const std::size_t k = grid_.left_node(t);
    if (k >= grid_.steps())
        return values_.at_node(grid_.steps());
    const double h = grid_.step();
    const double s = (t - grid_.time(k)) / h;
    if (std::abs(s) < 1e-12)
        return values_.at_node(k);
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * values_.at_node(k) + (h10 * h) * slopes_[k] + h01 * values_.at_node(k + 1) +
           (h11 * h) * slopes_[k + 1];
}

} // namespace h2hinf
