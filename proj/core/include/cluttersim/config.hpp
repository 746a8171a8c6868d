#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cluttersim/analysis.hpp"
#include "cluttersim/effector.hpp"
#include "cluttersim/physics.hpp"
#include "cluttersim/scene.hpp"
#include "cluttersim/strategies.hpp"

namespace clutter {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Inclusive arithmetic progression "lo:step:hi".
struct SweepRange {
    double lo = 0.0;
    double step = 1.0;
    double hi = 0.0;
    std::vector<double> values() const;
};

// Everything a run needs, in one place. Defaults reproduce the reference
// setup: 38 x 53 cm scene, 0.045 m/s / 0.1 rad/s velocity caps, 15 N / 4.5
// N*m wrench limits, and the nominal primitive parameters.
struct ExperimentConfig {
    PhysicsConfig physics;
    SceneStyle scene_style = SceneStyle::Continuous;
    SceneGenParams scene_gen;
    double object_side_min = 0.043;
    double object_side_max = 0.088;
    double object_mass_min = 0.143;
    double object_mass_max = 0.570;
    int catalog_size = 8;

    StrategyParams strategy;
    EventThresholds events;
    SensorConfig sensor;
    WrenchLimits limits;
    double taper_radius = 0.05;   // m, goal-approach speed taper
    double taper_floor = 0.2;     // fraction of full speed at the goal
    double backoff_recovery = 1.15;

    double t_tot = 240.0;         // s, trial time limit
    double goal_radius = 0.0075;  // m
    double control_rate = 20.0;   // Hz

    int scenes = 300;
    std::uint64_t seed = 1;
    int parallelism = 1;
    double max_fault_rate = 0.05;

    int sweep_scenes = 50;
    double sweep_sigma = 1.0;
    SweepRange sweep_a_bur{0.45, 0.05, 0.90};
    SweepRange sweep_f_bur{0.5, 0.125, 1.625};
    SweepRange sweep_t_excv{1.875, 0.625, 7.5};
    SweepRange sweep_t_trig{1.875, 0.625, 7.5};

    std::string output_dir = "out";

    // Derived helpers keeping dependent fields consistent.
    void finalize();  // copies effector length into the strategy params, builds catalog
};

ExperimentConfig default_config();

// Applies one "key = value" assignment. Throws ConfigError on unknown keys or
// malformed values, naming the key.
void apply_config_value(ExperimentConfig& config, const std::string& key,
                        const std::string& value);

// Parses the documented key-value format: one assignment per line,
// '#' starts a comment, blank lines ignored.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Serializes every key with its current value and a short comment; doubles
// as the format documentation.
std::string config_to_string(const ExperimentConfig& config);

}  // namespace clutter
