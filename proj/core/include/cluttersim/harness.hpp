#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cluttersim/analysis.hpp"
#include "cluttersim/config.hpp"

namespace clutter {

struct HarnessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scene for a given seed in the configured style.
SceneSpec make_scene(std::uint64_t scene_seed, const ExperimentConfig& config);

// Scene seed used for the i-th scene of a batch or sweep run.
std::uint64_t scene_seed_for(const ExperimentConfig& config, int index, bool sweep);

struct TrialDebug {
    std::vector<std::string> tactile_log;  // one JSON object per sensor sample
    std::uint64_t final_state_hash = 0;
};

// One simulated reach: physics at 1/dt Hz, control at control_rate, tactile
// sampling at sensor.rate with plane refits at sensor.compensation_rate.
// Ends on goal entry, the t_tot timeout, or a physics fault.
TrialResult run_trial(const SceneSpec& scene, StrategyKind strategy,
                      const ExperimentConfig& config, TrialDebug* debug = nullptr);

struct BatchResult {
    std::vector<std::uint64_t> scene_seeds;
    std::vector<TrialResult> results;  // ordered by (scene index, strategy index)
    int faulted = 0;
    double fault_rate = 0.0;
};

// Paired design: every strategy runs on every scene. Trials execute on
// config.parallelism workers; results land in preassigned slots, so the
// output is identical for any worker count.
BatchResult run_batch(const ExperimentConfig& config,
                      const std::vector<StrategyKind>& strategies);

struct SweepOutput {
    StrategyKind strategy = StrategyKind::Burrow;
    SweepSurface distance_raw;
    SweepSurface time_raw;
    SweepSurface distance_smoothed;
    SweepSurface time_smoothed;
    int trials = 0;
    int faulted = 0;
    double fault_rate = 0.0;
};

// Straight-line baseline plus every grid cell on the same scene set.
// Burrow sweeps a_bur x f_bur; excavate sweeps t_excv x t_trig.
SweepOutput run_sweep(const ExperimentConfig& config, StrategyKind strategy);

// Persist outputs under dir (created if needed); returns the file paths.
std::vector<std::string> write_batch_outputs(const std::string& dir, const BatchResult& batch);
std::vector<std::string> write_sweep_outputs(const std::string& dir, const SweepOutput& sweep);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace clutter
