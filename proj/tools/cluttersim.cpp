#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cluttersim/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitFaultRate = 3;

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> sets;  // key=value overrides
    std::string output_dir;         // --out flag; empty means unset
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Config file (key = value lines)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--set", opts.sets, "Override a config key, e.g. --set trial.seed=7");
    cmd->add_option("--out", opts.output_dir, "Output directory");
}

clutter::ExperimentConfig build_config(const CommonOpts& opts) {
    clutter::ExperimentConfig config = opts.config_path.empty()
                                           ? clutter::default_config()
                                           : clutter::load_config_file(opts.config_path);
    for (const std::string& kv : opts.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw clutter::ConfigError("--set expects key=value, got '" + kv + "'");
        clutter::apply_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    config.finalize();
    return config;
}

// Precedence: --out flag, then CLUTTERSIM_OUTPUT_DIR, then the config value.
std::string resolve_output_dir(const CommonOpts& opts, const clutter::ExperimentConfig& config) {
    if (!opts.output_dir.empty()) return opts.output_dir;
    if (const char* env = std::getenv("CLUTTERSIM_OUTPUT_DIR"); env && *env) return env;
    return config.output_dir;
}

clutter::StrategyKind parse_strategy(const std::string& name) {
    try {
        return clutter::strategy_from_string(name);
    } catch (const std::exception& e) {
        throw clutter::ConfigError(e.what());
    }
}

std::vector<clutter::StrategyKind> parse_strategies(const std::string& csv) {
    std::vector<clutter::StrategyKind> kinds;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const std::size_t comma = csv.find(',', start);
        const std::string name =
            csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!name.empty()) kinds.push_back(parse_strategy(name));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (kinds.empty()) throw clutter::ConfigError("no strategies given");
    return kinds;
}

int check_fault_rate(double fault_rate, double max_fault_rate) {
    if (fault_rate > max_fault_rate) {
        std::fprintf(stderr, "fault rate %.4f exceeds limit %.4f\n", fault_rate, max_fault_rate);
        return kExitFaultRate;
    }
    return kExitOk;
}

int cmd_gen_scenes(const CommonOpts& opts, int count) {
    const clutter::ExperimentConfig config = build_config(opts);
    const std::string dir = resolve_output_dir(opts, config);
    std::filesystem::create_directories(dir);
    for (int i = 0; i < count; ++i) {
        const std::uint64_t seed = clutter::scene_seed_for(config, i, false);
        const clutter::SceneSpec scene = clutter::make_scene(seed, config);
        char name[64];
        std::snprintf(name, sizeof(name), "scene_%03d_%llu.json", i,
                      static_cast<unsigned long long>(seed));
        const std::string path = (std::filesystem::path(dir) / name).string();
        clutter::write_text_file(path, clutter::scene_to_json(scene));
        std::printf("%s\n", path.c_str());
    }
    return kExitOk;
}

int cmd_run(const CommonOpts& opts, std::uint64_t scene_seed, const std::string& strategy_name,
            bool log_tactile) {
    const clutter::ExperimentConfig config = build_config(opts);
    const clutter::StrategyKind kind = parse_strategy(strategy_name);
    const clutter::SceneSpec scene = clutter::make_scene(scene_seed, config);

    clutter::TrialDebug debug;
    const clutter::TrialResult result =
        clutter::run_trial(scene, kind, config, log_tactile ? &debug : nullptr);

    std::printf("scene_seed=%llu strategy=%s success=%d faulted=%d d_goal=%.6f t_comp=%.3f "
                "excavates=%d burrows=%d pushed_out=%d\n",
                static_cast<unsigned long long>(result.scene_seed),
                clutter::to_string(result.strategy), result.success ? 1 : 0,
                result.faulted ? 1 : 0, result.d_goal, result.t_comp, result.excavates,
                result.burrow_episodes, result.pushed_out);

    const std::string dir = resolve_output_dir(opts, config);
    std::filesystem::create_directories(dir);
    const std::string csv_path = (std::filesystem::path(dir) / "trial.csv").string();
    clutter::write_text_file(csv_path, clutter::trial_results_to_csv({result}));
    if (log_tactile) {
        std::string log = "[";
        for (std::size_t i = 0; i < debug.tactile_log.size(); ++i) {
            if (i) log += ",";
            log += "\n  " + debug.tactile_log[i];
        }
        log += "\n]\n";
        const std::string log_path = (std::filesystem::path(dir) / "tactile.json").string();
        clutter::write_text_file(log_path, log);
    }
    return check_fault_rate(result.faulted ? 1.0 : 0.0, config.max_fault_rate);
}

int cmd_batch(const CommonOpts& opts, int scenes, const std::string& strategies_csv,
              int parallelism) {
    clutter::ExperimentConfig config = build_config(opts);
    if (scenes > 0) config.scenes = scenes;
    if (parallelism > 0) config.parallelism = parallelism;
    const std::vector<clutter::StrategyKind> kinds = parse_strategies(strategies_csv);

    const clutter::BatchResult batch = clutter::run_batch(config, kinds);
    const std::string dir = resolve_output_dir(opts, config);
    for (const std::string& path : clutter::write_batch_outputs(dir, batch))
        std::printf("%s\n", path.c_str());

    for (const clutter::StrategyAggregate& agg : clutter::aggregate_results(batch.results))
        std::printf("%-16s success=%5.1f%%  dist=%.4f  time=%.4f\n", clutter::to_string(agg.strategy),
                    100.0 * agg.success_rate, agg.mean_norm_distance, agg.mean_norm_time);
    std::printf("trials=%zu faulted=%d fault_rate=%.4f\n", batch.results.size(), batch.faulted,
                batch.fault_rate);
    return check_fault_rate(batch.fault_rate, config.max_fault_rate);
}

int cmd_sweep(const CommonOpts& opts, const std::string& strategy_name,
              const std::vector<std::string>& grids, int scenes, int parallelism) {
    clutter::ExperimentConfig config = build_config(opts);
    if (scenes > 0) config.sweep_scenes = scenes;
    if (parallelism > 0) config.parallelism = parallelism;
    for (const std::string& grid : grids) {
        const auto eq = grid.find('=');
        if (eq == std::string::npos)
            throw clutter::ConfigError("--grid expects name=lo:step:hi, got '" + grid + "'");
        clutter::apply_config_value(config, "sweep." + grid.substr(0, eq), grid.substr(eq + 1));
    }

    const clutter::StrategyKind kind = parse_strategy(strategy_name);
    const clutter::SweepOutput sweep = clutter::run_sweep(config, kind);
    const std::string dir = resolve_output_dir(opts, config);
    for (const std::string& path : clutter::write_sweep_outputs(dir, sweep))
        std::printf("%s\n", path.c_str());
    std::printf("trials=%d faulted=%d fault_rate=%.4f\n", sweep.trials, sweep.faulted,
                sweep.fault_rate);
    std::printf("distance ratio: mean=%.3f  time ratio: mean=%.3f\n",
                sweep.distance_smoothed.mean(), sweep.time_smoothed.mean());
    return check_fault_rate(sweep.fault_rate, config.max_fault_rate);
}

int cmd_compare(const CommonOpts& opts, const std::vector<std::string>& inputs) {
    const clutter::ExperimentConfig config = build_config(opts);
    std::vector<clutter::TrialResult> results;
    for (const std::string& path : inputs) {
        const std::vector<clutter::TrialResult> part =
            clutter::trial_results_from_csv(clutter::read_text_file(path));
        results.insert(results.end(), part.begin(), part.end());
    }
    if (results.empty()) throw clutter::AnalysisError("no trials in input files");

    const std::string dir = resolve_output_dir(opts, config);
    std::filesystem::create_directories(dir);
    const std::string report = clutter::comparison_report_markdown(results);
    const std::string report_path = (std::filesystem::path(dir) / "report.md").string();
    const std::string summary_path = (std::filesystem::path(dir) / "summary.json").string();
    clutter::write_text_file(report_path, report);
    clutter::write_text_file(summary_path, clutter::comparison_summary_json(results));
    std::printf("%s", report.c_str());
    std::printf("\nwrote %s and %s\n", report_path.c_str(), summary_path.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Planar clutter-reaching simulator and experiment harness"};
    app.require_subcommand(1);

    CommonOpts gen_opts;
    int gen_count = 10;
    CLI::App* gen = app.add_subcommand("gen-scenes", "Generate scene files");
    add_common(gen, gen_opts);
    gen->add_option("--scenes", gen_count, "Number of scenes")->check(CLI::PositiveNumber);

    CommonOpts run_opts;
    std::uint64_t run_seed = 1;
    std::string run_strategy = "hybrid_event";
    bool run_log_tactile = false;
    CLI::App* run = app.add_subcommand("run", "Run a single trial");
    add_common(run, run_opts);
    run->add_option("--scene-seed", run_seed, "Scene seed");
    run->add_option("--strategy", run_strategy,
                    "straight|burrow|excavate|hybrid_clock|hybrid_event");
    run->add_flag("--log-tactile", run_log_tactile, "Write per-sample tactile summaries");

    CommonOpts batch_opts;
    int batch_scenes = 0;
    int batch_parallelism = 0;
    std::string batch_strategies =
        "straight,burrow,excavate,hybrid_clock,hybrid_event";
    CLI::App* batch = app.add_subcommand("batch", "Run every strategy over a scene set");
    add_common(batch, batch_opts);
    batch->add_option("--scenes", batch_scenes, "Number of scenes (overrides config)");
    batch->add_option("--strategies", batch_strategies, "Comma-separated strategy names");
    batch->add_option("--parallelism", batch_parallelism, "Worker threads (overrides config)");

    CommonOpts sweep_opts;
    std::string sweep_strategy = "burrow";
    std::vector<std::string> sweep_grids;
    int sweep_scenes = 0;
    int sweep_parallelism = 0;
    CLI::App* sweep = app.add_subcommand("sweep", "Parameter sweep with a straight-line baseline");
    add_common(sweep, sweep_opts);
    sweep->add_option("--strategy", sweep_strategy, "burrow or excavate");
    sweep->add_option("--grid", sweep_grids, "Axis override, e.g. --grid a_bur=0.45:0.05:0.90");
    sweep->add_option("--scenes", sweep_scenes, "Scenes per cell (overrides config)");
    sweep->add_option("--parallelism", sweep_parallelism, "Worker threads (overrides config)");

    CommonOpts compare_opts;
    std::vector<std::string> compare_inputs;
    CLI::App* compare = app.add_subcommand("compare", "Re-analyze stored trial CSVs");
    add_common(compare, compare_opts);
    compare->add_option("--input", compare_inputs, "trials.csv file(s)")
        ->required()
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (gen->parsed()) return cmd_gen_scenes(gen_opts, gen_count);
        if (run->parsed()) return cmd_run(run_opts, run_seed, run_strategy, run_log_tactile);
        if (batch->parsed())
            return cmd_batch(batch_opts, batch_scenes, batch_strategies, batch_parallelism);
        if (sweep->parsed())
            return cmd_sweep(sweep_opts, sweep_strategy, sweep_grids, sweep_scenes,
                             sweep_parallelism);
        if (compare->parsed()) return cmd_compare(compare_opts, compare_inputs);
    } catch (const clutter::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitOk;
}
