#include "h2hinf/simulate.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <vector>

#include "h2hinf/philox.hpp"

namespace h2hinf {

PathFailure::PathFailure(std::size_t node, std::uint64_t seed)
    : std::runtime_error("non-finite state at node " + std::to_string(node) + " on path with seed " +
                         std::to_string(seed)),
      node_(node), seed_(seed) {}

double path_integral(const Eigen::VectorXd& values, double h) {
    const Eigen::Index n = values.size();
    if (n < 2)
        return 0.0;
    return h * (values.sum() - 0.5 * (values(0) + values(n - 1)));
}

BrownianIncrements sample_brownian(const TimeGrid& grid, Eigen::Index r, Eigen::Index p, std::uint64_t seed,
                                   Eigen::Index n_initial) {
    const Philox4x32 rng(seed);
    const auto N = static_cast<Eigen::Index>(grid.steps());
    const double sqrt_h = std::sqrt(grid.step());
    const Eigen::Index per_step = r + p;

    BrownianIncrements out;
    out.dW.resize(r, N);
    out.dW_tilde.resize(p, N);
    Eigen::VectorXd buf(per_step + 1);
    for (Eigen::Index k = 0; k < N; ++k) {
        for (Eigen::Index j = 0; 2 * j < per_step; ++j) {
            const auto [a, b] = normal_pair(rng({static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(j),
                                                 kStreamIncrements, 0u}));
            buf(2 * j) = a;
            buf(2 * j + 1) = b;
        }
        out.dW.col(k) = sqrt_h * buf.head(r);
        out.dW_tilde.col(k) = sqrt_h * buf.segment(r, p);
    }
    out.xi.resize(n_initial);
    for (Eigen::Index j = 0; 2 * j < n_initial; ++j) {
        const auto [a, b] = normal_pair(rng({static_cast<std::uint32_t>(j), 0u, kStreamInitialState, 0u}));
        out.xi(2 * j) = a;
        if (2 * j + 1 < n_initial)
            out.xi(2 * j + 1) = b;
    }
    return out;
}

namespace {

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& S) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetric_part(S));
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

bool needs_initial_draw(const SystemModel& model) {
    return model.Sigma0.size() > 0 && model.Sigma0.cwiseAbs().maxCoeff() > 0.0;
}

// Shared Euler-Maruyama loop; control(k, t, xhat, u) and disturbance(k, t, xhat, v) fill the inputs.
template <class Control, class Disturbance>
SimResult run_path(const SystemModel& model, const FilterPlan& plan, const TimeGrid& grid,
                   const BrownianIncrements& noise, std::uint64_t seed, Control&& control, Disturbance&& disturbance) {
    const Dimensions d = model.dims();
    const auto N = static_cast<Eigen::Index>(grid.steps());
    const double h = grid.step();
    const double g2 = model.gamma * model.gamma;
    if (noise.dW.rows() != d.r || noise.dW.cols() != N || noise.dW_tilde.rows() != d.p ||
        (d.p > 0 && noise.dW_tilde.cols() != N))
        throw std::invalid_argument("simulate: noise arrays do not match the model and grid");

    SimResult res;
    res.seed = seed;
    res.x.resize(d.n, N + 1);
    res.xhat.resize(d.n, N + 1);
    res.y.resize(d.r, N + 1);
    res.u.resize(d.s, N + 1);
    res.v.resize(d.m, N + 1);
    res.z.resize(d.n + d.s, N + 1);
    res.dIhat.resize(d.r, N);
    res.j1_integrand.resize(N + 1);
    res.j2_integrand.resize(N + 1);

    Eigen::VectorXd x = model.x0;
    if (needs_initial_draw(model)) {
        if (noise.xi.size() != d.n)
            throw std::invalid_argument("simulate: initial-state normals missing");
        x += psd_sqrt(model.Sigma0) * noise.xi;
    }
    Eigen::VectorXd xhat = model.xhat0;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(d.r);
    Eigen::VectorXd u(d.s), v(d.m), drift(d.n), dy(d.r), dI(d.r), fdrift(d.n);

    for (Eigen::Index k = 0;; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        const double t = grid.time(kk);
        control(kk, t, xhat, u);
        disturbance(kk, t, xhat, v);

        res.x.col(k) = x;
        res.xhat.col(k) = xhat;
        res.y.col(k) = y;
        res.u.col(k) = u;
        res.v.col(k) = v;
        res.z.col(k).head(d.n).noalias() = model.Q.at(t) * x;
        res.z.col(k).tail(d.s).noalias() = model.N1.at(t) * u;
        const double zz = res.z.col(k).squaredNorm();
        res.j2_integrand(k) = zz;
        res.j1_integrand(k) = g2 * v.squaredNorm() - zz;
        if (k == N)
            break;

        const Eigen::MatrixXd& A = model.A.at(t);
        const Eigen::MatrixXd& B1 = model.B1.at(t);
        const Eigen::MatrixXd& B2 = model.B2.at(t);
        const Eigen::MatrixXd& b = model.b.at(t);
        const Eigen::MatrixXd& E = model.E.at(t);
        const Eigen::MatrixXd& beta = model.beta.at(t);

        // Inputs common to plant and filter.
        fdrift.noalias() = B1 * v;
        fdrift.noalias() += B2 * u;
        fdrift += b.col(0);

        drift.noalias() = A * x;
        drift += fdrift;
        dy.noalias() = E * x;
        dy += beta.col(0);
        dy *= h;
        dy.noalias() += model.F.at(t) * noise.dW.col(k);

        x += h * drift;
        x.noalias() += model.C.at(t) * noise.dW.col(k);
        if (d.p > 0)
            x.noalias() += model.D.at(t) * noise.dW_tilde.col(k);

        dI.noalias() = E * xhat;
        dI += beta.col(0);
        dI = dy - h * dI;
        res.dIhat.col(k).noalias() = plan.F_inv.at_node(kk) * dI;
        drift.noalias() = A * xhat;
        drift += fdrift;
        xhat += h * drift;
        xhat.noalias() += plan.K.at_node(kk) * dI;
        y += dy;

        if (!x.allFinite() || !xhat.allFinite())
            throw PathFailure(kk + 1, seed);
    }
    res.xtilde = res.x - res.xhat;
    return res;
}

void check_offsets(const InputOffsets& o, const Dimensions& d, Eigen::Index nodes) {
    if (o.du.size() > 0 && (o.du.rows() != d.s || o.du.cols() != nodes))
        throw std::invalid_argument("simulate: du must be s x (N+1)");
    if (o.dv.size() > 0 && (o.dv.rows() != d.m || o.dv.cols() != nodes))
        throw std::invalid_argument("simulate: dv must be m x (N+1)");
}

} // namespace

SimResult simulate_closed_loop(const SystemModel& model, const GainSchedule& gains, const FilterPlan& plan,
                               const TimeGrid& grid, const DisturbancePolicy& policy, std::uint64_t seed,
                               const InputOffsets& offsets) {
    const Dimensions d = model.dims();
    const auto noise = sample_brownian(grid, d.r, d.p, seed, needs_initial_draw(model) ? d.n : 0);
    auto res = simulate_closed_loop(model, gains, plan, grid, policy, noise, offsets);
    res.seed = seed;
    return res;
}

SimResult simulate_closed_loop(const SystemModel& model, const GainSchedule& gains, const FilterPlan& plan,
                               const TimeGrid& grid, const DisturbancePolicy& policy,
                               const BrownianIncrements& noise, const InputOffsets& offsets) {
    const Dimensions d = model.dims();
    check_offsets(offsets, d, static_cast<Eigen::Index>(grid.nodes()));

    std::vector<const DisturbanceSegment*> active(grid.nodes());
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        active[k] = &policy.at(grid.time(k));
        if (active[k]->mode == DisturbanceMode::Constant && active[k]->value.size() != d.m)
            throw std::invalid_argument("simulate: constant disturbance has wrong length");
    }

    const auto control = [&](std::size_t k, double, const Eigen::VectorXd& xhat, Eigen::VectorXd& u) {
        u.noalias() = gains.U.at_node(k) * xhat;
        u += gains.U0.at_node(k).col(0);
        if (offsets.du.size() > 0)
            u += offsets.du.col(static_cast<Eigen::Index>(k));
    };
    const auto disturbance = [&](std::size_t k, double, const Eigen::VectorXd& xhat, Eigen::VectorXd& v) {
        const DisturbanceSegment& seg = *active[k];
        switch (seg.mode) {
        case DisturbanceMode::Zero:
            v.setZero();
            break;
        case DisturbanceMode::Constant:
            v = seg.value;
            break;
        case DisturbanceMode::WorstCase:
            v.noalias() = gains.V.at_node(k) * xhat;
            v += gains.V0.at_node(k).col(0);
            break;
        }
        if (offsets.dv.size() > 0)
            v += offsets.dv.col(static_cast<Eigen::Index>(k));
    };
    return run_path(model, plan, grid, noise, 0, control, disturbance);
}

SimResult simulate_baseline(const SystemModel& model, const FilterPlan& plan, const TimeGrid& grid,
                            std::uint64_t seed, BaselineMode mode, const GainSchedule* gains) {
    const Dimensions d = model.dims();
    if (mode != BaselineMode::Open && gains == nullptr)
        throw std::invalid_argument("simulate_baseline: this mode needs a gain schedule");
    const auto noise = sample_brownian(grid, d.r, d.p, seed, needs_initial_draw(model) ? d.n : 0);
    const auto control = [&](std::size_t k, double, const Eigen::VectorXd& xhat, Eigen::VectorXd& u) {
        if (mode == BaselineMode::Open) {
            u.setZero();
            return;
        }
        u = gains->U0.at_node(k).col(0);
        if (mode == BaselineMode::Feedback)
            u.noalias() += gains->U.at_node(k) * xhat;
    };
    const auto disturbance = [](std::size_t, double, const Eigen::VectorXd&, Eigen::VectorXd& v) { v.setZero(); };
    return run_path(model, plan, grid, noise, seed, control, disturbance);
}

} // namespace h2hinf
