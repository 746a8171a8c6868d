#include <benchmark/benchmark.h>

#include <cmath>

#include "cluttersim/config.hpp"
#include "cluttersim/effector.hpp"
#include "cluttersim/harness.hpp"
#include "cluttersim/physics.hpp"
#include "cluttersim/scene.hpp"

namespace {

using namespace clutter;

SceneSpec empty_scene() {
    SceneSpec spec;
    spec.seed = 1;
    spec.style = SceneStyle::Continuous;
    spec.goal = {0.0, 0.33};
    return spec;
}

void BM_PhysicsStepQuiet(benchmark::State& state) {
    World world = World::create(empty_scene(), PhysicsConfig{});
    world.set_effector_drive({{0.0, 0.01}, 0.0, true});
    for (auto _ : state) {
        world.step();
        benchmark::DoNotOptimize(world.effector_tip());
    }
}
BENCHMARK(BM_PhysicsStepQuiet);

void BM_PhysicsStepCluttered(benchmark::State& state) {
    SceneGenParams params;
    params.count_min = 30;
    const SceneSpec spec = generate_continuous_scene(12, params);
    World world = World::create(spec, PhysicsConfig{});
    for (auto _ : state) {
        const double t = world.time();
        world.set_effector_drive({{0.02 * std::sin(2.0 * t), 0.045}, 0.05 * std::cos(t), true});
        world.step();
        benchmark::DoNotOptimize(world.contacts().size());
    }
    state.counters["contacts"] = static_cast<double>(world.contacts().size());
}
BENCHMARK(BM_PhysicsStepCluttered);

void BM_SceneGeneration(benchmark::State& state) {
    SceneGenParams params;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(generate_continuous_scene(seed++, params));
    }
}
BENCHMARK(BM_SceneGeneration);

void BM_SampleTaxels(benchmark::State& state) {
    // Link pressed flat against the side wall: every sample sees contacts.
    World world = World::create(empty_scene(), PhysicsConfig{});
    world.set_effector_drive({{0.0, 0.045}, 0.0, true});
    for (int i = 0; i < 1680; ++i) world.step();
    world.set_effector_drive({{-0.045, 0.0}, 0.0, true});
    for (int i = 0; i < 1560; ++i) world.step();

    SensorConfig config;
    Rng rng(5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_taxels(world, config, rng, world.time()));
    }
}
BENCHMARK(BM_SampleTaxels);

void BM_RansacPlaneFit(benchmark::State& state) {
    SensorConfig config;
    TaxelGrid grid;
    grid.side = Side::Left;
    grid.rows = config.rows;
    grid.cols = config.cols;
    grid.taxels.assign(static_cast<std::size_t>(config.rows) * config.cols, Taxel{});
    Rng noise(9);
    for (int r = 0; r < config.rows; ++r)
        for (int c = 0; c < config.cols; ++c)
            grid.at(r, c).fy = 0.08 * c - 0.03 * r + 0.2 + noise.normal(0.0, 0.005);
    grid.at(2, 4).fy += 5.0;
    grid.at(2, 5).fy += 4.0;

    Rng rng(17);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ransac_plane_compensate(grid, config, rng));
    }
}
BENCHMARK(BM_RansacPlaneFit);

void BM_WilcoxonExact(benchmark::State& state) {
    Rng rng(31);
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < 25; ++i) pairs.push_back({rng.normal(0.1, 1.0), rng.normal(0.0, 1.0)});
    for (auto _ : state) {
        benchmark::DoNotOptimize(wilcoxon_signed_rank(pairs));
    }
}
BENCHMARK(BM_WilcoxonExact);

void BM_FullTrial(benchmark::State& state) {
    ExperimentConfig config = default_config();
    config.t_tot = 30.0;
    config.finalize();
    const SceneSpec scene = make_scene(3, config);
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_trial(scene, StrategyKind::HybridEvent, config));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FullTrial)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
