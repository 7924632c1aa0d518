#include "h2hinf/synthesis.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace h2hinf {

namespace {

Eigen::MatrixXd QtQ(const SystemModel& model, double t) {
    const Eigen::MatrixXd& Q = model.Q.at(t);
    return Q.transpose() * Q;
}

double inv_gamma2(const SystemModel& model) { return 1.0 / (model.gamma * model.gamma); }

Eigen::MatrixXd stack(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
}

std::pair<MatrixSignal, MatrixSignal> split(const MatrixSignal& stacked, const TimeGrid& grid, Eigen::Index left) {
    std::vector<Eigen::MatrixXd> a, b;
    a.reserve(grid.nodes());
    b.reserve(grid.nodes());
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        const Eigen::MatrixXd& m = stacked.at_node(k);
        a.emplace_back(m.leftCols(left));
        b.emplace_back(m.rightCols(m.cols() - left));
    }
    return {MatrixSignal::sampled(grid, std::move(a)), MatrixSignal::sampled(grid, std::move(b))};
}

double trapezoid(const TimeGrid& grid, const std::function<double(std::size_t)>& f) {
    double sum = 0.0;
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        const double w = (k == 0 || k == grid.steps()) ? 0.5 : 1.0;
        sum += w * f(k);
    }
    return sum * grid.step();
}

Eigen::MatrixXd lyapunov_rate(const Eigen::MatrixXd& Pi, const Eigen::MatrixXd& Acal, const Eigen::MatrixXd& forcing) {
    return -(Pi * Acal + Acal.transpose() * Pi) + forcing;
}

// Rates of the bounded-real pair for a given feedback and offset.
Eigen::MatrixXd bounded_real_rate(const SystemModel& model, double t, const Eigen::MatrixXd& P,
                                  const Eigen::MatrixXd& U, bool augmented) {
    const Eigen::MatrixXd& B1 = model.B1.at(t);
    const Eigen::MatrixXd Acl = model.A.at(t) + model.B2.at(t) * U;
    Eigen::MatrixXd rate = -(P * Acl + Acl.transpose() * P) + QtQ(model, t) +
                           inv_gamma2(model) * P * B1 * B1.transpose() * P;
    if (augmented)
        rate += U.transpose() * U;
    return rate;
}

Eigen::MatrixXd bounded_real_affine_rate(const SystemModel& model, double t, const Eigen::MatrixXd& P,
                                         const Eigen::MatrixXd& eta, const Eigen::MatrixXd& U,
                                         const Eigen::MatrixXd& U0, bool augmented, bool exact) {
    const Eigen::MatrixXd& B1 = model.B1.at(t);
    const Eigen::MatrixXd& B2 = model.B2.at(t);
    const Eigen::MatrixXd drift = model.A.at(t) + B2 * U - inv_gamma2(model) * B1 * B1.transpose() * P;
    Eigen::MatrixXd rate = -drift.transpose() * eta - P * (B2 * U0 + model.b.at(t));
    if (augmented && exact)
        rate += U.transpose() * U0;
    return rate;
}

} // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> coupled_riccati_rates(const SystemModel& model, double t,
                                                                  const Eigen::MatrixXd& P1,
                                                                  const Eigen::MatrixXd& P2) {
    const Eigen::MatrixXd& A = model.A.at(t);
    const Eigen::MatrixXd& B1 = model.B1.at(t);
    const Eigen::MatrixXd& B2 = model.B2.at(t);
    const double g2 = inv_gamma2(model);
    const Eigen::MatrixXd U = -B2.transpose() * P2;
    const Eigen::MatrixXd V = -g2 * B1.transpose() * P1;
    const Eigen::MatrixXd A1 = A + B2 * U;
    const Eigen::MatrixXd A2 = A + B1 * V;
    const Eigen::MatrixXd qq = QtQ(model, t);
    Eigen::MatrixXd dP1 = -(P1 * A1 + A1.transpose() * P1) + qq + U.transpose() * U + g2 * P1 * B1 * B1.transpose() * P1;
    Eigen::MatrixXd dP2 = -(P2 * A2 + A2.transpose() * P2) - qq + P2 * B2 * B2.transpose() * P2;
    return {std::move(dP1), std::move(dP2)};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> coupled_affine_rates(const SystemModel& model, double t,
                                                                 const Eigen::MatrixXd& P1, const Eigen::MatrixXd& P2,
                                                                 const Eigen::MatrixXd& eta1,
                                                                 const Eigen::MatrixXd& eta2,
                                                                 const AffineOptions& opts) {
    const Eigen::MatrixXd& A = model.A.at(t);
    const Eigen::MatrixXd& B1 = model.B1.at(t);
    const Eigen::MatrixXd& B2 = model.B2.at(t);
    const Eigen::MatrixXd& b = model.b.at(t);
    const double g2 = inv_gamma2(model);
    const Eigen::MatrixXd U = -B2.transpose() * P2;
    const Eigen::MatrixXd V = -g2 * B1.transpose() * P1;
    const Eigen::MatrixXd U0 = -B2.transpose() * eta2;
    const Eigen::MatrixXd V0 = -g2 * B1.transpose() * eta1;

    const Eigen::MatrixXd drift1 = A + B2 * U - g2 * B1 * B1.transpose() * P1;
    Eigen::MatrixXd d1 = -drift1.transpose() * eta1 - P1 * (B2 * U0 + b);
    if (opts.exact_control_offset)
        d1 += U.transpose() * U0;
    const Eigen::MatrixXd drift2 = A + B1 * V - B2 * B2.transpose() * P2;
    Eigen::MatrixXd d2 = -drift2.transpose() * eta2 - P2 * (B1 * V0 + b);
    return {std::move(d1), std::move(d2)};
}

RiccatiPair solve_coupled_riccati(const SystemModel& model, const TimeGrid& grid, const IntegrateOptions& opts) {
    const Eigen::Index n = model.dims().n;
    OdeProblem problem;
    problem.direction = Direction::Backward;
    problem.boundary = Eigen::MatrixXd::Zero(n, 2 * n);
    problem.rhs = [&model, n](double t, const Eigen::MatrixXd& m) {
        auto [d1, d2] = coupled_riccati_rates(model, t, m.leftCols(n), m.rightCols(n));
        return stack(d1, d2);
    };
    const MatrixSignal stacked = integrate(problem, grid, opts);
    auto [P1, P2] = split(stacked, grid, n);
    return {std::move(P1), std::move(P2)};
}

AffinePair solve_coupled_affine(const SystemModel& model, const RiccatiPair& pair, const TimeGrid& grid,
                                const AffineOptions& opts) {
    const Eigen::Index n = model.dims().n;
    const HermiteSignal P1(pair.P1, grid, [&](std::size_t k) {
        return coupled_riccati_rates(model, grid.time(k), pair.P1.at_node(k), pair.P2.at_node(k)).first;
    });
    const HermiteSignal P2(pair.P2, grid, [&](std::size_t k) {
        return coupled_riccati_rates(model, grid.time(k), pair.P1.at_node(k), pair.P2.at_node(k)).second;
    });

    OdeProblem problem;
    problem.direction = Direction::Backward;
    problem.boundary = Eigen::MatrixXd::Zero(n, 2);
    problem.rhs = [&](double t, const Eigen::MatrixXd& m) {
        auto [d1, d2] = coupled_affine_rates(model, t, P1(t), P2(t), m.col(0), m.col(1), opts);
        return stack(d1, d2);
    };
    const MatrixSignal stacked = integrate(problem, grid, {false, 1e12});
    auto [eta1, eta2] = split(stacked, grid, 1);
    return {std::move(eta1), std::move(eta2)};
}

GainSchedule gains_from(const SystemModel& model, const RiccatiPair& pair, const AffinePair& affine,
                        const TimeGrid& grid) {
    const double g2 = inv_gamma2(model);
    GainSchedule g;
    g.U = MatrixSignal::generate(grid, [&](std::size_t k) -> Eigen::MatrixXd {
        return -model.B2.at(grid.time(k)).transpose() * pair.P2.at_node(k);
    });
    g.U0 = MatrixSignal::generate(grid, [&](std::size_t k) -> Eigen::MatrixXd {
        return -model.B2.at(grid.time(k)).transpose() * affine.eta2.at_node(k);
    });
    g.V = MatrixSignal::generate(grid, [&](std::size_t k) -> Eigen::MatrixXd {
        return -g2 * model.B1.at(grid.time(k)).transpose() * pair.P1.at_node(k);
    });
    g.V0 = MatrixSignal::generate(grid, [&](std::size_t k) -> Eigen::MatrixXd {
        return -g2 * model.B1.at(grid.time(k)).transpose() * affine.eta1.at_node(k);
    });
    return g;
}

BoundedRealResult bounded_real_check(const SystemModel& model, const MatrixSignal& U, const TimeGrid& grid,
                                     const BoundedRealOptions& opts) {
    const Eigen::Index n = model.dims().n;
    const Eigen::Index s = model.dims().s;
    const bool augmented = opts.variant == OutputVariant::ControlAugmented;
    const MatrixSignal U0 = opts.U0 ? *opts.U0 : MatrixSignal::zeros(s, 1);

    BoundedRealResult result;
    OdeProblem problem;
    problem.direction = Direction::Backward;
    problem.boundary = Eigen::MatrixXd::Zero(n, n);
    problem.rhs = [&](double t, const Eigen::MatrixXd& P) {
        return bounded_real_rate(model, t, P, U.interpolate(t), augmented);
    };
    try {
        result.P = integrate(problem, grid, opts.integrate);
    } catch (const FiniteEscape& e) {
        result.escape_node = e.node();
        result.escape_time = e.time();
        return result;
    }
    result.solvable = true;

    const MatrixSignal& P = *result.P;
    const HermiteSignal Pd(P, grid, [&](std::size_t k) {
        const double t = grid.time(k);
        return bounded_real_rate(model, t, P.at_node(k), U.interpolate(t), augmented);
    });
    OdeProblem affine;
    affine.direction = Direction::Backward;
    affine.boundary = Eigen::MatrixXd::Zero(n, 1);
    affine.rhs = [&](double t, const Eigen::MatrixXd& eta) {
        return bounded_real_affine_rate(model, t, Pd(t), eta, U.interpolate(t), U0.interpolate(t), augmented,
                                        opts.affine.exact_control_offset);
    };
    result.eta = integrate(affine, grid, {false, 1e12});
    return result;
}

LyapunovPair solve_lyapunov(const SystemModel& model, const FilterPlan& plan, const TimeGrid& grid) {
    const Eigen::Index n = model.dims().n;
    const HermiteSignal Sigma = dense_covariance(plan, grid);
    const auto Acal = [&](double t) { return error_drift(model, Sigma(t), t); };

    OdeProblem problem;
    problem.direction = Direction::Backward;
    problem.boundary = Eigen::MatrixXd::Zero(n, 2 * n);
    problem.rhs = [&](double t, const Eigen::MatrixXd& m) {
        const Eigen::MatrixXd a = Acal(t);
        const Eigen::MatrixXd qq = QtQ(model, t);
        return stack(lyapunov_rate(m.leftCols(n), a, qq), lyapunov_rate(m.rightCols(n), a, -qq));
    };
    const MatrixSignal stacked = integrate(problem, grid, {true, 1e12});
    auto [Pi1, Pi2] = split(stacked, grid, n);

    OdeProblem phi;
    phi.direction = Direction::Backward;
    phi.boundary = Eigen::MatrixXd::Zero(n, 2);
    phi.rhs = [&](double t, const Eigen::MatrixXd& m) -> Eigen::MatrixXd { return -Acal(t).transpose() * m; };
    const MatrixSignal phis = integrate(phi, grid, {false, 1e12});

    LyapunovPair out;
    out.Pi1 = std::move(Pi1);
    out.Pi2 = std::move(Pi2);
    out.phi_integrated_norm = phis.max_norm();
    auto [phi1, phi2] = split(phis, grid, 1);
    out.phi1 = std::move(phi1);
    out.phi2 = std::move(phi2);
    return out;
}

namespace {

double noise_traces(const SystemModel& model, const FilterPlan& plan, const Eigen::MatrixXd& P,
                    const Eigen::MatrixXd& Pi, std::size_t k, double t) {
    const Eigen::MatrixXd& Gp = plan.noise_gain.at_node(k);
    const Eigen::MatrixXd& Ge = plan.error_gain.at_node(k);
    const Eigen::MatrixXd& D = model.D.at(t);
    double sum = (Gp.transpose() * P * Gp).trace() + (Ge.transpose() * Pi * Ge).trace();
    if (D.cols() > 0)
        sum += (D.transpose() * Pi * D).trace();
    return sum;
}

double initial_terms(const SystemModel& model, const Eigen::MatrixXd& P, const Eigen::MatrixXd& eta,
                     const Eigen::MatrixXd& Pi) {
    const Eigen::VectorXd& x = model.xhat0;
    return x.dot(P * x) + 2.0 * eta.col(0).dot(x) + (Pi * model.Sigma0).trace();
}

} // namespace

double optimal_value_j1(const SystemModel& model, const FilterPlan& plan, const MatrixSignal& P1,
                        const MatrixSignal& eta1, const MatrixSignal& Pi1, const MatrixSignal& U0,
                        const TimeGrid& grid, const AffineOptions& opts) {
    const double g2 = inv_gamma2(model);
    const double running = trapezoid(grid, [&](std::size_t k) {
        const double t = grid.time(k);
        const Eigen::VectorXd eta = eta1.at_node(k).col(0);
        const Eigen::VectorXd u0 = U0.at_node(k).col(0);
        double f = 2.0 * eta.dot(model.B2.at(t) * u0 + model.b.at(t).col(0)) -
                   g2 * (model.B1.at(t).transpose() * eta).squaredNorm();
        if (opts.exact_control_offset)
            f -= u0.squaredNorm();
        return f + noise_traces(model, plan, P1.at_node(k), Pi1.at_node(k), k, t);
    });
    return initial_terms(model, P1.at_node(0), eta1.at_node(0), Pi1.at_node(0)) + running;
}

double optimal_value_j2(const SystemModel& model, const FilterPlan& plan, const MatrixSignal& P2,
                        const MatrixSignal& eta2, const MatrixSignal& Pi2, const MatrixSignal& V0,
                        const TimeGrid& grid) {
    const double running = trapezoid(grid, [&](std::size_t k) {
        const double t = grid.time(k);
        const Eigen::VectorXd eta = eta2.at_node(k).col(0);
        const Eigen::VectorXd v0 = V0.at_node(k).col(0);
        const double f = 2.0 * eta.dot(model.B1.at(t) * v0 + model.b.at(t).col(0)) -
                         (model.B2.at(t).transpose() * eta).squaredNorm();
        return f + noise_traces(model, plan, P2.at_node(k), Pi2.at_node(k), k, t);
    });
    return initial_terms(model, P2.at_node(0), eta2.at_node(0), Pi2.at_node(0)) + running;
}

SynthesisResult synthesize(const SystemModel& model, const TimeGrid& grid, const SynthesisOptions& opts) {
    SynthesisResult r;
    r.plan = solve_filter_covariance(model, grid, opts.filter);
    r.riccati = solve_coupled_riccati(model, grid, opts.integrate);
    r.affine = solve_coupled_affine(model, r.riccati, grid, opts.affine);
    r.gains = gains_from(model, r.riccati, r.affine, grid);
    r.lyapunov = solve_lyapunov(model, r.plan, grid);
    return r;
}

SynthesisResiduals synthesis_residuals(const SystemModel& model, const SynthesisResult& result, const TimeGrid& grid,
                                       const AffineOptions& opts) {
    const auto& P1 = result.riccati.P1;
    const auto& P2 = result.riccati.P2;
    const auto& e1 = result.affine.eta1;
    const auto& e2 = result.affine.eta2;
    const auto riccati = [&](std::size_t k) {
        return coupled_riccati_rates(model, grid.time(k), P1.at_node(k), P2.at_node(k));
    };
    const auto affine = [&](std::size_t k) {
        return coupled_affine_rates(model, grid.time(k), P1.at_node(k), P2.at_node(k), e1.at_node(k), e2.at_node(k),
                                    opts);
    };
    const auto lyap = [&](std::size_t k, const MatrixSignal& Pi, double sign) {
        const double t = grid.time(k);
        return lyapunov_rate(Pi.at_node(k), result.plan.Acal.at_node(k), sign * QtQ(model, t));
    };

    SynthesisResiduals r;
    r.P1 = centered_residual(P1, grid, [&](std::size_t k) { return riccati(k).first; });
    r.P2 = centered_residual(P2, grid, [&](std::size_t k) { return riccati(k).second; });
    r.eta1 = centered_residual(e1, grid, [&](std::size_t k) { return affine(k).first; });
    r.eta2 = centered_residual(e2, grid, [&](std::size_t k) { return affine(k).second; });
    r.Pi1 = centered_residual(result.lyapunov.Pi1, grid, [&](std::size_t k) { return lyap(k, result.lyapunov.Pi1, 1.0); });
    r.Pi2 = centered_residual(result.lyapunov.Pi2, grid, [&](std::size_t k) { return lyap(k, result.lyapunov.Pi2, -1.0); });
    return r;
}

} // namespace h2hinf
