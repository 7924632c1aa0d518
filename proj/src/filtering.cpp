#include "h2hinf/filtering.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <string>

namespace h2hinf {

SingularObservationNoise::SingularObservationNoise(std::size_t node, double condition)
    : std::runtime_error("observation noise covariance H = F F^T singular or ill-conditioned at node " +
                         std::to_string(node) + " (cond " + std::to_string(condition) + ")"),
      node_(node) {}

namespace {

Eigen::MatrixXd filter_gain(const SystemModel& model, const Eigen::MatrixXd& Sigma, double t) {
    const Eigen::MatrixXd& E = model.E.at(t);
    const Eigen::MatrixXd& F = model.F.at(t);
    const Eigen::MatrixXd H = F * F.transpose();
    const Eigen::MatrixXd lhs = Sigma * E.transpose() + model.C.at(t) * F.transpose();
    // K = lhs H^{-1}  <=>  H K^T = lhs^T (H symmetric)
    return H.partialPivLu().solve(lhs.transpose()).transpose();
}

Eigen::MatrixXd covariance_rate(const SystemModel& model, const Eigen::MatrixXd& Sigma, double t) {
    const Eigen::MatrixXd& A = model.A.at(t);
    const Eigen::MatrixXd& C = model.C.at(t);
    const Eigen::MatrixXd& D = model.D.at(t);
    const Eigen::MatrixXd& F = model.F.at(t);
    const Eigen::MatrixXd K = filter_gain(model, Sigma, t);
    const Eigen::MatrixXd H = F * F.transpose();
    return A * Sigma + Sigma * A.transpose() + C * C.transpose() + D * D.transpose() - K * H * K.transpose();
}

double condition_number(const Eigen::MatrixXd& m) {
    if (m.size() == 0)
        return 1.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    return smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
}

} // namespace

Eigen::MatrixXd error_drift(const SystemModel& model, const Eigen::MatrixXd& Sigma, double t) {
    const Eigen::MatrixXd& E = model.E.at(t);
    const Eigen::MatrixXd& F = model.F.at(t);
    const Eigen::MatrixXd H = F * F.transpose();
    const Eigen::MatrixXd SEt_Hinv = H.partialPivLu().solve(E * Sigma).transpose();  // Sigma E^T H^{-1}
    const Eigen::MatrixXd CFinv = F.transpose().partialPivLu().solve(model.C.at(t).transpose()).transpose();
    return model.A.at(t) - SEt_Hinv * E - CFinv * E;
}

FilterPlan solve_filter_covariance(const SystemModel& model, const TimeGrid& grid, const FilterOptions& opts) {
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        const Eigen::MatrixXd& F = model.F.at(grid.time(k));
        const double cond = condition_number(F * F.transpose());
        if (!(cond < opts.max_condition_H))
            throw SingularObservationNoise(k, cond);
        if (model.F.is_constant())
            break;
    }

    OdeProblem problem;
    problem.direction = Direction::Forward;
    problem.boundary = symmetric_part(model.Sigma0);
    problem.rhs = [&model](double t, const Eigen::MatrixXd& Sigma) { return covariance_rate(model, Sigma, t); };

    FilterPlan plan;
    plan.Sigma = integrate(problem, grid, opts.integrate);

    const auto at = [&](auto&& fn) {
        return MatrixSignal::generate(grid, [&](std::size_t k) -> Eigen::MatrixXd { return fn(k, grid.time(k)); });
    };
    plan.Sigma_rate = at([&](std::size_t k, double t) { return covariance_rate(model, plan.Sigma.at_node(k), t); });
    plan.K = at([&](std::size_t k, double t) { return filter_gain(model, plan.Sigma.at_node(k), t); });
    plan.H = at([&](std::size_t, double t) -> Eigen::MatrixXd {
        const Eigen::MatrixXd& F = model.F.at(t);
        return F * F.transpose();
    });
    plan.Acal = at([&](std::size_t k, double t) { return error_drift(model, plan.Sigma.at_node(k), t); });
    plan.F_inv = at([&](std::size_t, double t) -> Eigen::MatrixXd { return model.F.at(t).inverse(); });
    plan.error_gain = at([&](std::size_t k, double t) -> Eigen::MatrixXd {
        const Eigen::MatrixXd& F = model.F.at(t);
        // Sigma E^T F^{-T} = (F^{-1} E Sigma)^T
        return F.partialPivLu().solve(model.E.at(t) * plan.Sigma.at_node(k)).transpose();
    });
    plan.noise_gain = at([&](std::size_t k, double t) -> Eigen::MatrixXd {
        return plan.error_gain.at_node(k) + model.C.at(t);
    });
    return plan;
}

HermiteSignal dense_covariance(const FilterPlan& plan, const TimeGrid& grid) {
    return HermiteSignal(plan.Sigma, grid, [&plan](std::size_t k) { return plan.Sigma_rate.at_node(k); });
}

FilterStepper::FilterStepper(const SystemModel& model, const FilterPlan& plan, const TimeGrid& grid)
    : model_(model), plan_(plan), grid_(grid) {}

FilterStepper::Step FilterStepper::step(std::size_t k, const Eigen::VectorXd& xhat, const Eigen::VectorXd& u,
                                        const Eigen::VectorXd& v, const Eigen::VectorXd& dy) const {
    const double t = grid_.time(k);
    const double h = grid_.step();
    Step out;
    out.dI = dy - (model_.E.at(t) * xhat + model_.beta.at(t)) * h;
    out.dIhat = plan_.F_inv.at_node(k) * out.dI;
    out.xhat = xhat +
               (model_.A.at(t) * xhat + model_.B2.at(t) * u + model_.B1.at(t) * v + model_.b.at(t)) * h +
               plan_.K.at_node(k) * out.dI;
    return out;
}

FilterTrajectory run_filter(const SystemModel& model, const FilterPlan& plan, const TimeGrid& grid, const Path& u_path,
                            const Path& v_path, const Path& y_increments) {
    const auto d = model.dims();
    const auto N = static_cast<Eigen::Index>(grid.steps());
    const auto check = [&](const Path& p, Eigen::Index rows, bool allow_short, const char* name) {
        const bool len_ok = p.cols() == N + 1 || (allow_short && p.cols() == N);
        if (p.rows() != rows || !len_ok)
            throw std::invalid_argument(std::string("run_filter: ") + name + " has shape " + std::to_string(p.rows()) +
                                        "x" + std::to_string(p.cols()) + ", grid has " + std::to_string(N) + " steps");
    };
    check(u_path, d.s, true, "u_path");
    check(v_path, d.m, true, "v_path");
    if (y_increments.rows() != d.r || y_increments.cols() != N)
        throw std::invalid_argument("run_filter: y_increments must be r x N");

    FilterStepper stepper(model, plan, grid);
    FilterTrajectory traj;
    traj.xhat.resize(d.n, N + 1);
    traj.innovation.resize(d.r, N + 1);
    traj.innovation_hat.resize(d.r, N + 1);
    traj.xhat.col(0) = model.xhat0;
    traj.innovation.col(0).setZero();
    traj.innovation_hat.col(0).setZero();
    for (Eigen::Index k = 0; k < N; ++k) {
        const auto step = stepper.step(static_cast<std::size_t>(k), traj.xhat.col(k), u_path.col(k), v_path.col(k),
                                       y_increments.col(k));
        traj.xhat.col(k + 1) = step.xhat;
        traj.innovation.col(k + 1) = traj.innovation.col(k) + step.dI;
        traj.innovation_hat.col(k + 1) = traj.innovation_hat.col(k) + step.dIhat;
    }
    return traj;
}

ResidualReport error_dynamics_check(const SystemModel& model, const FilterPlan& plan, const TimeGrid& grid,
                                    const Path& x_path, const Path& xhat_path, const Path& dW, const Path& dW_tilde) {
    const double h = grid.step();
    ResidualReport report;
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        const double t = grid.time(k);
        const Eigen::VectorXd err = x_path.col(kk) - xhat_path.col(kk);
        const Eigen::VectorXd err_next = x_path.col(kk + 1) - xhat_path.col(kk + 1);
        Eigen::VectorXd predicted = err + plan.Acal.at_node(k) * err * h - plan.error_gain.at_node(k) * dW.col(kk);
        if (dW_tilde.rows() > 0)
            predicted += model.D.at(t) * dW_tilde.col(kk);
        const double r = (err_next - predicted).cwiseAbs().maxCoeff();
        if (r > report.max_residual) {
            report.max_residual = r;
            report.worst_node = k + 1;
        }
    }
    return report;
}

} // namespace h2hinf
