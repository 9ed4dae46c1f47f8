#include "hyptrack/combinatorics.hpp"
#include "hyptrack/likelihood.hpp"
#include "hyptrack/mcmc_sampler.hpp"
#include "hyptrack/scenario_io.hpp"
#include "hyptrack/simulator.hpp"
#include "hyptrack/target_filter.hpp"
#include "hyptrack/tracker.hpp"

#include <benchmark/benchmark.h>

using namespace hyptrack;

static void BM_PredictTrack(benchmark::State& state) {
    GaussianTrack t{TrackLabel{1}, circular_state(20000.0, 0.3), StateCovariance::Identity()};
    DynamicsConfig dyn;
    dyn.integrator_substeps = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(predict_track(t, dyn));
}
BENCHMARK(BM_PredictTrack)->Arg(1)->Arg(10)->Arg(100);

static void BM_CountGrandchildren(benchmark::State& state) {
    const auto n = state.range(0);
    for (auto _ : state) benchmark::DoNotOptimize(count_grandchildren(n, 10, n));
}
BENCHMARK(BM_CountGrandchildren)->Arg(10)->Arg(30)->Arg(60);

// One parent's child sampling on a frame drawn from the twenty-object preset.
static void BM_SampleChildren(benchmark::State& state) {
    const ScenarioFile file = preset_file("twenty-object");
    const Simulation sim = simulate(file.scenario);
    const MeasurementFrame& frame = sim.frames[49];
    std::vector<GaussianTrack> tracks;
    for (const auto& o : sim.truth[49].objects) {
        if (in_fov(o.state, file.scenario.sensor)) {
            tracks.push_back({TrackLabel{static_cast<std::uint64_t>(o.id + 1)}, o.state,
                              StateCovariance::Identity()});
        }
    }
    const auto matrix = build_matrix(tracks, frame, file.scenario.sensor, file.scenario.clutter,
                                     file.tracker.birth_death);
    const PriorContext ctx{static_cast<int>(tracks.size()), static_cast<int>(frame.returns.size()),
                           file.scenario.sensor.p_d, file.tracker.birth_death};
    const ChainScorer scorer(matrix, ctx);
    SamplerConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(sample_children(scorer, cfg));
    state.counters["objects"] = static_cast<double>(tracks.size());
    state.counters["returns"] = static_cast<double>(frame.returns.size());
}
BENCHMARK(BM_SampleChildren)->Unit(benchmark::kMillisecond);

static void BM_TrackerScan(benchmark::State& state) {
    const ScenarioFile file = preset_file("twenty-object");
    const Simulation sim = simulate(file.scenario);
    for (auto _ : state) {
        state.PauseTiming();
        Tracker tracker(file.tracker, file.scenario.sensor, file.scenario.dynamics, file.scenario.clutter,
                        initial_tracks(file.scenario), 0.0, 1);
        state.ResumeTiming();
        for (std::size_t k = 0; k < 10; ++k) benchmark::DoNotOptimize(tracker.step(sim.frames[k]));
    }
}
BENCHMARK(BM_TrackerScan)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
