#include "h2hinf/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "h2hinf/philox.hpp"

namespace h2hinf {

double cost_j1(const SimResult& result, double gamma, const TimeGrid& grid) {
    const Eigen::VectorXd f = (gamma * gamma) * result.v.colwise().squaredNorm().transpose() -
                              result.z.colwise().squaredNorm().transpose();
    return path_integral(f, grid.step());
}

double cost_j2(const SimResult& result, const TimeGrid& grid) {
    return path_integral(result.z.colwise().squaredNorm().transpose(), grid.step());
}

GainReport energy_gain(const SystemModel& model, const GainSchedule& gains, const FilterPlan& plan,
                       const TimeGrid& grid, const DisturbancePolicy& policy, std::size_t n_paths,
                       std::uint64_t seed, const EnergyGainOptions& opts) {
    const double h = grid.step();
    const Dimensions d = model.dims();
    const Ensemble ens = monte_carlo(
        n_paths, seed,
        [&](std::size_t, std::uint64_t s) {
            const SimResult run = simulate_closed_loop(model, gains, plan, grid, policy, s);
            const SimResult base = simulate_baseline(model, plan, grid, s, opts.baseline, &gains);
            const auto nodes = static_cast<Eigen::Index>(grid.nodes());
            Eigen::VectorXd zz(nodes);
            for (Eigen::Index k = 0; k < nodes; ++k) {
                const double t = grid.time(static_cast<std::size_t>(k));
                double val = (model.Q.at(t) * (run.x.col(k) - base.x.col(k))).squaredNorm();
                if (opts.variant == OutputVariant::ControlAugmented && d.s > 0)
                    val += (model.N1.at(t) * gains.U.at_node(static_cast<std::size_t>(k)) *
                            (run.xhat.col(k) - base.xhat.col(k)))
                               .squaredNorm();
                zz(k) = val;
            }
            const Eigen::VectorXd vv = run.v.colwise().squaredNorm().transpose();
            return std::vector<double>{path_integral(zz, h), path_integral(vv, h)};
        },
        opts.exec);

    GainReport rep;
    rep.n_paths = ens.stats.count;
    rep.failures = ens.failures;
    if (ens.stats.count == 0)
        throw std::runtime_error("energy_gain: every path failed");
    const double a = ens.stats.mean[0];
    const double b = ens.stats.mean[1];
    if (!(b > 0.0))
        throw ZeroDisturbance();
    rep.numerator = std::sqrt(a);
    rep.denominator = std::sqrt(b);
    rep.ratio = rep.numerator / rep.denominator;

    if (ens.stats.count < 2) {
        rep.stderr_ratio = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    // Delta method for sqrt(a / b) with sample (co)variances of the path energies.
    double var_a = 0.0, var_b = 0.0, cov = 0.0;
    for (const auto& v : ens.values) {
        if (v.empty())
            continue;
        var_a += (v[0] - a) * (v[0] - a);
        var_b += (v[1] - b) * (v[1] - b);
        cov += (v[0] - a) * (v[1] - b);
    }
    const double M = static_cast<double>(ens.stats.count);
    var_a /= (M - 1.0) * M;
    var_b /= (M - 1.0) * M;
    cov /= (M - 1.0) * M;
    const double q = a / b;
    const double var_q = std::max(0.0, var_a / (b * b) - 2.0 * a * cov / (b * b * b) + a * a * var_b / (b * b * b * b));
    rep.stderr_ratio = rep.ratio > 0.0 ? std::sqrt(var_q) / (2.0 * std::sqrt(q)) : 0.0;
    return rep;
}

Path perturbation_signal(const TimeGrid& grid, Eigen::Index width, std::size_t segments, double magnitude,
                         std::uint64_t seed, std::size_t trial, Player player) {
    if (segments == 0)
        throw std::invalid_argument("perturbation_signal: segments must be positive");
    const Philox4x32 rng(seed);
    Eigen::MatrixXd levels(width, static_cast<Eigen::Index>(segments));
    for (std::size_t s = 0; s < segments; ++s) {
        for (Eigen::Index j = 0; 2 * j < width; ++j) {
            const auto [a, b] = uniform_pair(rng({static_cast<std::uint32_t>(trial),
                                                  static_cast<std::uint32_t>(s * 1024 + static_cast<std::size_t>(j)),
                                                  kStreamPerturbation, player == Player::Control ? 1u : 0u}));
            levels(2 * j, static_cast<Eigen::Index>(s)) = magnitude * (2.0 * a - 1.0);
            if (2 * j + 1 < width)
                levels(2 * j + 1, static_cast<Eigen::Index>(s)) = magnitude * (2.0 * b - 1.0);
        }
    }
    Path out(width, static_cast<Eigen::Index>(grid.nodes()));
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        const auto s = std::min(segments - 1, static_cast<std::size_t>(std::floor(
                                                  grid.time(k) / grid.horizon() * static_cast<double>(segments) + 1e-9)));
        out.col(static_cast<Eigen::Index>(k)) = levels.col(static_cast<Eigen::Index>(s));
    }
    return out;
}

NashReport nash_check(const SystemModel& model, const GainSchedule& gains, const FilterPlan& plan,
                      const TimeGrid& grid, std::uint64_t seed, const NashOptions& opts) {
    const Dimensions d = model.dims();
    const auto policy = DisturbancePolicy::uniform(grid.horizon(), DisturbanceMode::WorstCase);

    const Ensemble base = monte_carlo(
        opts.n_paths, seed,
        [&](std::size_t, std::uint64_t s) {
            const SimResult r = simulate_closed_loop(model, gains, plan, grid, policy, s);
            return std::vector<double>{cost_j1(r, model.gamma, grid), cost_j2(r, grid)};
        },
        opts.exec);

    NashReport rep;
    rep.failures = base.failures;
    if (base.stats.count == 0)
        throw std::runtime_error("nash_check: every equilibrium path failed");
    rep.j1 = base.stats.mean[0];
    rep.j1_stderr = base.stats.stderr_of_mean[0];
    rep.j2 = base.stats.mean[1];
    rep.j2_stderr = base.stats.stderr_of_mean[1];

    for (const Player player : {Player::Disturbance, Player::Control}) {
        const bool dist = player == Player::Disturbance;
        const Eigen::Index width = dist ? d.m : d.s;
        const std::size_t column = dist ? 0 : 1;
        for (std::size_t i = 0; i < opts.n_perturbations; ++i) {
            InputOffsets off;
            (dist ? off.dv : off.du) =
                perturbation_signal(grid, width, opts.segments, opts.magnitude, seed, i, player);
            const Ensemble pert = monte_carlo(
                opts.n_paths, seed,
                [&](std::size_t idx, std::uint64_t s) -> std::vector<double> {
                    if (base.values[idx].empty())
                        throw std::runtime_error("equilibrium path failed");
                    const SimResult r = simulate_closed_loop(model, gains, plan, grid, policy, s, off);
                    const double J = dist ? cost_j1(r, model.gamma, grid) : cost_j2(r, grid);
                    return {J, J - base.values[idx][column]};
                },
                opts.exec);
            for (const auto& f : pert.failures)
                rep.failures.push_back(f);

            NashTrial trial;
            trial.player = player;
            trial.index = i;
            trial.base = base.stats.mean[column];
            trial.perturbed = pert.stats.mean.empty() ? std::numeric_limits<double>::quiet_NaN() : pert.stats.mean[0];
            trial.difference = pert.stats.mean.empty() ? std::numeric_limits<double>::quiet_NaN() : pert.stats.mean[1];
            const double se_base = base.stats.stderr_of_mean[column];
            const double se_pert = pert.stats.stderr_of_mean.empty() ? 0.0 : pert.stats.stderr_of_mean[0];
            trial.pooled_stderr = std::sqrt(se_base * se_base + se_pert * se_pert);
            trial.paired_stderr = pert.stats.stderr_of_mean.empty() ? 0.0 : pert.stats.stderr_of_mean[1];
            const double tol = std::isfinite(trial.pooled_stderr) ? opts.n_stderr * trial.pooled_stderr : 0.0;
            trial.violated = !(trial.perturbed >= trial.base - tol);
            if (trial.violated)
                ++rep.violations;
            rep.trials.push_back(trial);
        }
    }
    return rep;
}

bool ValueReport::passed(double n_stderr, double floor) const {
    const auto ok = [&](double sim, double se, double ref) {
        const double s = std::isfinite(se) ? se : 0.0;
        return std::abs(sim - ref) <= n_stderr * s + floor;
    };
    return ok(j1_simulated, j1_stderr, j1_formula) && ok(j2_simulated, j2_stderr, j2_formula);
}

ValueReport value_consistency(const SystemModel& model, const SynthesisResult& synthesis, const TimeGrid& grid,
                              std::size_t n_paths, std::uint64_t seed, Execution exec, const AffineOptions& affine) {
    const auto policy = DisturbancePolicy::uniform(grid.horizon(), DisturbanceMode::WorstCase);
    const Ensemble ens = simulate_ensemble(model, synthesis.gains, synthesis.plan, grid, policy, n_paths, seed, exec);
    if (ens.stats.count == 0)
        throw std::runtime_error("value_consistency: every path failed");
    ValueReport rep;
    rep.n_paths = ens.stats.count;
    rep.j1_simulated = ens.stats.mean[0];
    rep.j1_stderr = ens.stats.stderr_of_mean[0];
    rep.j2_simulated = ens.stats.mean[1];
    rep.j2_stderr = ens.stats.stderr_of_mean[1];
    rep.j1_formula = optimal_value_j1(model, synthesis.plan, synthesis.riccati.P1, synthesis.affine.eta1,
                                      synthesis.lyapunov.Pi1, synthesis.gains.U0, grid, affine);
    rep.j2_formula = optimal_value_j2(model, synthesis.plan, synthesis.riccati.P2, synthesis.affine.eta2,
                                      synthesis.lyapunov.Pi2, synthesis.gains.V0, grid);
    return rep;
}

std::vector<double> decomposition_terms(const SystemModel& model, const TimeGrid& grid, const SimResult& r) {
    const auto nodes = static_cast<Eigen::Index>(grid.nodes());
    const double g2 = model.gamma * model.gamma;
    Eigen::VectorXd hat(nodes), tilde(nodes);
    for (Eigen::Index k = 0; k < nodes; ++k) {
        const double t = grid.time(static_cast<std::size_t>(k));
        const Eigen::MatrixXd& Q = model.Q.at(t);
        hat(k) = g2 * r.v.col(k).squaredNorm() - (Q * r.xhat.col(k)).squaredNorm() -
                 (model.N1.at(t) * r.u.col(k)).squaredNorm();
        tilde(k) = -(Q * r.xtilde.col(k)).squaredNorm();
    }
    const double h = grid.step();
    const double j1 = cost_j1(r, model.gamma, grid);
    const double j1_hat = path_integral(hat, h);
    const double j1_tilde = path_integral(tilde, h);
    const Eigen::Index mid = static_cast<Eigen::Index>(grid.steps() / 2);
    const Eigen::Index last = nodes - 1;
    const auto variance_gap = [&](Eigen::Index k) {
        return r.x.col(k).squaredNorm() - r.xhat.col(k).squaredNorm() - r.xtilde.col(k).squaredNorm();
    };
    return {j1,
            j1_hat,
            j1_tilde,
            j1 - j1_hat - j1_tilde,
            r.xhat.col(mid).dot(r.xtilde.col(mid)),
            r.xhat.col(last).dot(r.xtilde.col(last)),
            variance_gap(mid),
            variance_gap(last)};
}

bool Estimate::within(double reference, double n_stderr) const {
    const double diff = std::abs(mean - reference);
    if (std::isfinite(stderr_of_mean) && stderr_of_mean > 0.0)
        return diff <= n_stderr * stderr_of_mean;
    return diff <= 1e-12 * std::max(1.0, std::abs(reference));
}

bool DecompositionReport::passed(double n_stderr) const {
    return residual.within(0.0, n_stderr) && cross_mid.within(0.0, n_stderr) && cross_end.within(0.0, n_stderr) &&
           variance_mid.within(0.0, n_stderr) && variance_end.within(0.0, n_stderr);
}

namespace {

DecompositionReport decomposition_from(const EnsembleStats& st) {
    DecompositionReport rep;
    rep.n_paths = st.count;
    if (st.count == 0)
        throw std::runtime_error("decomposition_check: no successful paths");
    Estimate* fields[] = {&rep.j1,        &rep.j1_hat,    &rep.j1_tilde,     &rep.residual,
                          &rep.cross_mid, &rep.cross_end, &rep.variance_mid, &rep.variance_end};
    for (std::size_t i = 0; i < 8; ++i)
        *fields[i] = {st.mean[i], st.stderr_of_mean[i]};
    return rep;
}

} // namespace

DecompositionReport decomposition_check(const SystemModel& model, const TimeGrid& grid,
                                        const std::vector<SimResult>& results) {
    std::vector<std::vector<double>> values;
    values.reserve(results.size());
    for (const auto& r : results)
        values.push_back(decomposition_terms(model, grid, r));
    return decomposition_from(summarize(values));
}

DecompositionReport decomposition_check(const SystemModel& model, const GainSchedule& gains, const FilterPlan& plan,
                                        const TimeGrid& grid, const DisturbancePolicy& policy, std::size_t n_paths,
                                        std::uint64_t seed, Execution exec) {
    const Ensemble ens = monte_carlo(
        n_paths, seed,
        [&](std::size_t, std::uint64_t s) {
            return decomposition_terms(model, grid, simulate_closed_loop(model, gains, plan, grid, policy, s));
        },
        exec);
    return decomposition_from(ens.stats);
}

InnovationReport innovation_check(const SystemModel& model, const GainSchedule& gains, const FilterPlan& plan,
                                  const TimeGrid& grid, const DisturbancePolicy& policy, std::size_t n_paths,
                                  std::uint64_t seed, Execution exec) {
    const Eigen::Index r = model.dims().r;
    const auto N = static_cast<Eigen::Index>(grid.steps());
    const Eigen::Index pairs = r * (r + 1) / 2;
    const Ensemble ens = monte_carlo(
        n_paths, seed,
        [&](std::size_t, std::uint64_t s) {
            const SimResult res = simulate_closed_loop(model, gains, plan, grid, policy, s);
            std::vector<double> out;
            out.reserve(static_cast<std::size_t>(pairs * N));
            for (Eigen::Index k = 0; k < N; ++k)
                for (Eigen::Index i = 0; i < r; ++i)
                    for (Eigen::Index j = i; j < r; ++j)
                        out.push_back(res.dIhat(i, k) * res.dIhat(j, k));
            return out;
        },
        exec);

    InnovationReport rep;
    rep.n_paths = ens.stats.count;
    if (ens.stats.count < 2)
        throw std::runtime_error("innovation_check: needs at least two successful paths");
    const double h = grid.step();
    std::size_t idx = 0;
    for (Eigen::Index k = 0; k < N; ++k)
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = i; j < r; ++j, ++idx) {
                const double target = i == j ? h : 0.0;
                const double dev = std::abs(ens.stats.mean[idx] - target);
                const double z = dev / ens.stats.stderr_of_mean[idx];
                rep.max_abs_deviation = std::max(rep.max_abs_deviation, dev);
                if (z > rep.worst_z) {
                    rep.worst_z = z;
                    rep.worst_step = static_cast<std::size_t>(k);
                    rep.worst_i = i;
                    rep.worst_j = j;
                }
            }
    return rep;
}

} // namespace h2hinf
