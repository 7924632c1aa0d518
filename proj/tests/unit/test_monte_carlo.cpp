#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "h2hinf/monte_carlo.hpp"
#include "support.hpp"

using namespace h2hinf;

TEST_CASE("path i runs on seed base + i") {
    const Ensemble e = monte_carlo(
        5, 100, [](std::size_t i, std::uint64_t s) { return std::vector<double>{double(i), double(s)}; });
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(e.values[i][0] == double(i));
        CHECK(e.values[i][1] == double(100 + i));
    }
}

TEST_CASE("summary statistics") {
    const EnsembleStats s = summarize({{1.0}, {2.0}, {3.0}, {4.0}});
    CHECK(s.count == 4);
    CHECK(s.mean[0] == 2.5);
    CHECK(s.stderr_of_mean[0] == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));

    const EnsembleStats one = summarize({{7.0, 8.0}});
    CHECK(one.count == 1);
    CHECK(one.mean[1] == 8.0);
    CHECK(std::isnan(one.stderr_of_mean[0]));
}

TEST_CASE("failing paths are recorded and excluded") {
    const Ensemble e = monte_carlo(10, 0, [](std::size_t i, std::uint64_t) -> std::vector<double> {
        if (i % 3 == 0)
            throw std::runtime_error("boom");
        return {double(i)};
    });
    CHECK(e.failures.size() == 4);
    CHECK(e.failures[1].index == 3);
    CHECK(e.failures[1].message == "boom");
    CHECK(e.values[0].empty());
    CHECK(e.stats.count == 6);
    CHECK(e.stats.mean[0] == doctest::Approx((1 + 2 + 4 + 5 + 7 + 8) / 6.0));
}

TEST_CASE("serial and parallel ensembles are bit-identical") {
    const auto sc = load_scenario(testing::scenario_path("scalar_noisy.json"));
    const SynthesisResult r = synthesize(sc.model, sc.grid);
    const auto policy = DisturbancePolicy::uniform(sc.grid.horizon(), DisturbanceMode::WorstCase);
    const Ensemble s = simulate_ensemble(sc.model, r.gains, r.plan, sc.grid, policy, 24, 3, Execution::Serial);
    const Ensemble p = simulate_ensemble(sc.model, r.gains, r.plan, sc.grid, policy, 24, 3, Execution::Parallel);
    CHECK(s.values == p.values);
    CHECK(s.stats.mean == p.stats.mean);
    CHECK(s.stats.stderr_of_mean == p.stats.stderr_of_mean);
    CHECK(s.values[5].size() == 3);
}
