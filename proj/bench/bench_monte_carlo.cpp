#include <benchmark/benchmark.h>

#include "h2hinf/monte_carlo.hpp"
#include "h2hinf/scenario.hpp"
#include "h2hinf/synthesis.hpp"

namespace {

using namespace h2hinf;

struct Fixture {
    Scenario sc = load_scenario(std::string(H2HINF_SCENARIO_DIR) + "/uav.json");
    SynthesisResult syn = synthesize(sc.model, sc.grid);
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

void run(benchmark::State& state, Execution exec) {
    const Fixture& f = fixture();
    const auto paths = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        const Ensemble ens =
            simulate_ensemble(f.sc.model, f.syn.gains, f.syn.plan, f.sc.grid, *f.sc.disturbance, paths, 1, exec);
        benchmark::DoNotOptimize(ens.stats.mean.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EnsembleSerial(benchmark::State& state) { run(state, Execution::Serial); }
void BM_EnsembleParallel(benchmark::State& state) { run(state, Execution::Parallel); }

BENCHMARK(BM_EnsembleSerial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleParallel)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
