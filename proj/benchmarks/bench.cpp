#include <benchmark/benchmark.h>

#include <sicra/analytics.hpp>
#include <sicra/sim.hpp>

using namespace sicra;

namespace {

void channel_draw(benchmark::State& state) {
    Rng rng(42);
    double sink = 0.0;
    for (auto _ : state) {
        const CsiDraw draw = sample_csi_pair(2.0, 0.1, 0.5, rng);
        sink += draw.estimated_power;
    }
    benchmark::DoNotOptimize(sink);
}
BENCHMARK(channel_draw);

void sic_decode(benchmark::State& state) {
    const int m = int(state.range(0));
    ChannelParams params;
    params.noise_power = 0.01;
    Rng rng(7);
    SlotReception reception;
    reception.entries.resize(m);
    long decoded = 0;
    for (auto _ : state) {
        state.PauseTiming();
        for (int i = 0; i < m; ++i) {
            const CsiDraw draw = sample_csi_pair(1.0, 0.05, 1.0, rng);
            reception.entries[i] = {i, draw.true_power, draw.estimated_power,
                                    draw.residual_power};
        }
        state.ResumeTiming();
        const DecodeResult result =
            decode_slot(reception, params, CsiMode::Imperfect);
        decoded += result.decoded_count;
    }
    benchmark::DoNotOptimize(decoded);
}
BENCHMARK(sic_decode)->Arg(4)->Arg(16)->Arg(50);

void sim_slots(benchmark::State& state) {
    ScenarioConfig config;
    config.n_nodes = int(state.range(0));
    config.tx_prob = 2.0 / config.n_nodes;
    config.arrival_prob = 0.4;
    config.snr_db = 40.0;
    config.n_slots = 2000;
    config.n_runs = 1;
    double sink = 0.0;
    int run_index = 0;
    for (auto _ : state) sink += run_single(config, run_index++).throughput;
    state.SetItemsProcessed(state.iterations() * config.n_slots);
    benchmark::DoNotOptimize(sink);
}
BENCHMARK(sim_slots)->Arg(10)->Arg(50);

void closed_forms(benchmark::State& state) {
    const LinkBudget budget =
        LinkBudget::equal_snr(40.0, 1.0, 50, 0.05, 0.4, 5);
    double sink = 0.0;
    for (auto _ : state) sink += analytic_report(budget).throughput;
    benchmark::DoNotOptimize(sink);
}
BENCHMARK(closed_forms);

}  // namespace

BENCHMARK_MAIN();
