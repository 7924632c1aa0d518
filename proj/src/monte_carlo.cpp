#include "h2hinf/monte_carlo.hpp"

#include <cmath>
#include <exception>
#include <limits>

#include "h2hinf/simulate.hpp"

namespace h2hinf {

EnsembleStats summarize(const std::vector<std::vector<double>>& values) {
    EnsembleStats st;
    std::size_t width = 0;
    for (const auto& v : values) {
        if (!v.empty()) {
            width = v.size();
            break;
        }
    }
    st.mean.assign(width, 0.0);
    st.stderr_of_mean.assign(width, std::numeric_limits<double>::quiet_NaN());
    for (const auto& v : values) {
        if (v.empty())
            continue;
        ++st.count;
        for (std::size_t j = 0; j < width; ++j)
            st.mean[j] += v[j];
    }
    if (st.count == 0)
        return st;
    for (auto& m : st.mean)
        m /= static_cast<double>(st.count);
    if (st.count < 2)
        return st;
    std::vector<double> ss(width, 0.0);
    for (const auto& v : values) {
        if (v.empty())
            continue;
        for (std::size_t j = 0; j < width; ++j) {
            const double dev = v[j] - st.mean[j];
            ss[j] += dev * dev;
        }
    }
    const double M = static_cast<double>(st.count);
    for (std::size_t j = 0; j < width; ++j)
        st.stderr_of_mean[j] = std::sqrt(ss[j] / (M - 1.0) / M);
    return st;
}

Ensemble monte_carlo(std::size_t n_paths, std::uint64_t base_seed, const PathMetric& metric, Execution exec) {
    if (n_paths == 0)
        throw std::invalid_argument("monte_carlo: n_paths must be at least 1");
    Ensemble ens;
    ens.values.resize(n_paths);
    std::vector<std::string> errors(n_paths);

    const auto run_one = [&](std::size_t i) {
        try {
            ens.values[i] = metric(i, base_seed + i);
        } catch (const std::exception& e) {
            ens.values[i].clear();
            errors[i] = e.what();
            if (errors[i].empty())
                errors[i] = "path failed";
        }
    };

    const auto n = static_cast<long long>(n_paths);
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (long long i = 0; i < n; ++i)
            run_one(static_cast<std::size_t>(i));
    } else {
        for (long long i = 0; i < n; ++i)
            run_one(static_cast<std::size_t>(i));
    }

    for (std::size_t i = 0; i < n_paths; ++i)
        if (!errors[i].empty())
            ens.failures.push_back({i, base_seed + i, errors[i]});
    ens.stats = summarize(ens.values);
    return ens;
}

Ensemble simulate_ensemble(const SystemModel& model, const GainSchedule& gains, const FilterPlan& plan,
                           const TimeGrid& grid, const DisturbancePolicy& policy, std::size_t n_paths,
                           std::uint64_t base_seed, Execution exec) {
    const double h = grid.step();
    return monte_carlo(
        n_paths, base_seed,
        [&](std::size_t, std::uint64_t seed) {
            const SimResult r = simulate_closed_loop(model, gains, plan, grid, policy, seed);
            return std::vector<double>{path_integral(r.j1_integrand, h), path_integral(r.j2_integrand, h),
                                       r.x.col(r.x.cols() - 1).squaredNorm()};
        },
        exec);
}

} // namespace h2hinf
