#include "cluttersim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

namespace clutter {

SceneSpec make_scene(std::uint64_t scene_seed, const ExperimentConfig& config) {
    return config.scene_style == SceneStyle::Grid
               ? generate_grid_scene(scene_seed, config.scene_gen)
               : generate_continuous_scene(scene_seed, config.scene_gen);
}

std::uint64_t scene_seed_for(const ExperimentConfig& config, int index, bool sweep) {
    const std::uint64_t stream = sweep ? 0x7377656570ULL : 0x6261746368ULL;
    return mix_seed(mix_seed(config.seed, stream), static_cast<std::uint64_t>(index));
}

namespace {

long rate_to_steps(double dt, double rate_hz, const char* what) {
    if (rate_hz <= 0.0) throw HarnessError(std::string(what) + " rate must be positive");
    const long steps = std::lround(1.0 / (dt * rate_hz));
    return std::max(1L, steps);
}

}  // namespace

TrialResult run_trial(const SceneSpec& scene, StrategyKind strategy,
                      const ExperimentConfig& config, TrialDebug* debug) {
    World world = World::create(scene, config.physics);
    Rng rng(mix_seed(mix_seed(config.seed, scene.seed),
                     static_cast<std::uint64_t>(strategy) + 1));
    TactilePipeline pipeline(config.sensor);
    StrategyMode mode;
    BackoffState backoff;
    ContactSummary summary{};

    const double dt = config.physics.dt;
    const long steps_per_tick = rate_to_steps(dt, config.control_rate, "control");
    const long steps_per_sample = rate_to_steps(dt, config.sensor.sensor_rate, "sensor");
    const long total_steps = std::lround(config.t_tot / dt);
    const Vec2 goal = scene.goal;

    TrialResult result;
    result.scene_seed = scene.seed;
    result.strategy = strategy;

    bool success = false;
    double t_comp = config.t_tot;
    for (long step = 0; step < total_steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        if (step % steps_per_sample == 0) {
            summary = pipeline.process(world, t, rng);
            if (debug) debug->tactile_log.push_back(contact_summary_to_json(summary));
        }
        if (step % steps_per_tick == 0) {
            const EffectorState state = effector_state_from(world);
            const double dist = (goal - state.tip_position).norm();
            const VelocityCmd raw = policy_step(strategy, mode, state, summary, goal, t,
                                                config.strategy, config.events, rng);
            const VelocityCmd cmd =
                govern_command(raw, state.net_wrench, config.limits, backoff, dist,
                               config.taper_radius, config.taper_floor,
                               config.backoff_recovery);
            world.set_effector_drive(to_effector_drive(cmd));
        }
        world.step();
        if (world.faulted()) {
            result.faulted = true;
            break;
        }
        if ((world.effector_tip() - goal).norm() <= config.goal_radius) {
            success = true;
            t_comp = world.time();
            break;
        }
    }

    result.success = success && !result.faulted;
    result.d_goal = (world.effector_tip() - goal).norm();
    result.t_comp = result.success ? t_comp : config.t_tot;
    result.norm_distance = result.d_goal / scene.bounds.depth;
    result.norm_time = result.success ? result.t_comp / config.t_tot : 1.0;
    result.excavates = mode.excavate_count;
    result.burrow_episodes = mode.burrow_episodes;
    result.pushed_out = world.pushed_out_count();
    if (debug) debug->final_state_hash = world.state_hash();
    return result;
}

namespace {

void run_tasks(int parallelism, int total, const std::function<void(int)>& task) {
    const int workers = std::max(1, std::min(parallelism, total));
    if (workers == 1) {
        for (int i = 0; i < total; ++i) task(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::atomic<bool> failed{false};
    std::string error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= total || failed.load()) break;
                try {
                    task(i);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    error = e.what();
                    failed.store(true);
                    break;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failed.load()) throw HarnessError("worker failed: " + error);
}

}  // namespace

BatchResult run_batch(const ExperimentConfig& config,
                      const std::vector<StrategyKind>& strategies) {
    if (config.scenes < 1) throw HarnessError("batch needs at least one scene");
    if (strategies.empty()) throw HarnessError("batch needs at least one strategy");

    BatchResult batch;
    std::vector<SceneSpec> scenes;
    scenes.reserve(static_cast<std::size_t>(config.scenes));
    for (int i = 0; i < config.scenes; ++i) {
        const std::uint64_t seed = scene_seed_for(config, i, false);
        batch.scene_seeds.push_back(seed);
        scenes.push_back(make_scene(seed, config));
    }

    const int k = static_cast<int>(strategies.size());
    const int total = config.scenes * k;
    batch.results.resize(static_cast<std::size_t>(total));
    run_tasks(config.parallelism, total, [&](int task) {
        const int si = task / k;
        const int ki = task % k;
        batch.results[static_cast<std::size_t>(task)] =
            run_trial(scenes[static_cast<std::size_t>(si)], strategies[static_cast<std::size_t>(ki)], config);
    });

    for (const TrialResult& r : batch.results)
        if (r.faulted) ++batch.faulted;
    batch.fault_rate = total > 0 ? static_cast<double>(batch.faulted) / total : 0.0;
    return batch;
}

SweepOutput run_sweep(const ExperimentConfig& config, StrategyKind strategy) {
    if (strategy != StrategyKind::Burrow && strategy != StrategyKind::Excavate)
        throw HarnessError("sweep strategy must be burrow or excavate");
    if (config.sweep_scenes < 1) throw HarnessError("sweep needs at least one scene");

    const bool burrow = strategy == StrategyKind::Burrow;
    const std::string x_name = burrow ? "a_bur" : "t_excv";
    const std::string y_name = burrow ? "f_bur" : "t_trig";
    const std::vector<double> xs =
        burrow ? config.sweep_a_bur.values() : config.sweep_t_excv.values();
    const std::vector<double> ys =
        burrow ? config.sweep_f_bur.values() : config.sweep_t_trig.values();
    const int nx = static_cast<int>(xs.size());
    const int ny = static_cast<int>(ys.size());

    std::vector<SceneSpec> scenes;
    for (int i = 0; i < config.sweep_scenes; ++i)
        scenes.push_back(make_scene(scene_seed_for(config, i, true), config));
    const int s = static_cast<int>(scenes.size());

    // Task layout: cell 0 is the straight-line baseline, cells 1..nx*ny are
    // the grid in row-major (iy * nx + ix) order; each cell runs every scene.
    const int cells = nx * ny + 1;
    const int total = cells * s;
    std::vector<TrialResult> trials(static_cast<std::size_t>(total));
    run_tasks(config.parallelism, total, [&](int task) {
        const int cell = task / s;
        const int scene_idx = task % s;
        ExperimentConfig trial_config = config;
        StrategyKind kind = StrategyKind::Straight;
        if (cell > 0) {
            kind = strategy;
            const int ix = (cell - 1) % nx;
            const int iy = (cell - 1) / nx;
            if (burrow) {
                trial_config.strategy.a_bur = xs[static_cast<std::size_t>(ix)];
                trial_config.strategy.f_bur = ys[static_cast<std::size_t>(iy)];
            } else {
                trial_config.strategy.t_excv = xs[static_cast<std::size_t>(ix)];
                trial_config.strategy.t_trig = ys[static_cast<std::size_t>(iy)];
            }
        }
        trials[static_cast<std::size_t>(task)] =
            run_trial(scenes[static_cast<std::size_t>(scene_idx)], kind, trial_config);
    });

    SweepOutput out;
    out.strategy = strategy;
    out.trials = total;
    for (const TrialResult& r : trials)
        if (r.faulted) ++out.faulted;
    out.fault_rate = static_cast<double>(out.faulted) / total;

    std::vector<double> baseline_dist, baseline_time;
    for (int i = 0; i < s; ++i) {
        const TrialResult& r = trials[static_cast<std::size_t>(i)];
        if (r.faulted) continue;
        baseline_dist.push_back(r.norm_distance);
        baseline_time.push_back(r.norm_time);
    }
    std::vector<std::vector<double>> cell_dist(static_cast<std::size_t>(nx) * ny);
    std::vector<std::vector<double>> cell_time(static_cast<std::size_t>(nx) * ny);
    for (int cell = 1; cell < cells; ++cell)
        for (int i = 0; i < s; ++i) {
            const TrialResult& r = trials[static_cast<std::size_t>(cell * s + i)];
            if (r.faulted) continue;
            cell_dist[static_cast<std::size_t>(cell - 1)].push_back(r.norm_distance);
            cell_time[static_cast<std::size_t>(cell - 1)].push_back(r.norm_time);
        }

    const std::string name = to_string(strategy);
    out.distance_raw = build_sweep_surface(name, "distance", x_name, y_name, xs, ys, cell_dist,
                                           baseline_dist);
    out.time_raw =
        build_sweep_surface(name, "time", x_name, y_name, xs, ys, cell_time, baseline_time);
    out.distance_smoothed = gaussian_smooth(out.distance_raw, config.sweep_sigma);
    out.time_smoothed = gaussian_smooth(out.time_raw, config.sweep_sigma);
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw HarnessError("cannot write '" + path + "'");
    f << content;
    if (!f) throw HarnessError("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw HarnessError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::string> write_batch_outputs(const std::string& dir, const BatchResult& batch) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> paths;
    const auto put = [&](const std::string& name, const std::string& content) {
        const std::string path = (std::filesystem::path(dir) / name).string();
        write_text_file(path, content);
        paths.push_back(path);
    };
    put("trials.csv", trial_results_to_csv(batch.results));
    put("summary.json", comparison_summary_json(batch.results));
    put("report.md", comparison_report_markdown(batch.results));
    return paths;
}

std::vector<std::string> write_sweep_outputs(const std::string& dir, const SweepOutput& sweep) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> paths;
    const std::string name = to_string(sweep.strategy);
    const auto put = [&](const std::string& file, const std::string& content) {
        const std::string path = (std::filesystem::path(dir) / file).string();
        write_text_file(path, content);
        paths.push_back(path);
    };
    put("sweep_" + name + "_distance_raw.csv", surface_to_csv(sweep.distance_raw));
    put("sweep_" + name + "_distance_smoothed.csv", surface_to_csv(sweep.distance_smoothed));
    put("sweep_" + name + "_time_raw.csv", surface_to_csv(sweep.time_raw));
    put("sweep_" + name + "_time_smoothed.csv", surface_to_csv(sweep.time_smoothed));
    put("sweep_" + name + "_distance.json", surface_to_json(sweep.distance_smoothed));
    put("sweep_" + name + "_time.json", surface_to_json(sweep.time_smoothed));
    return paths;
}

}  // namespace clutter
