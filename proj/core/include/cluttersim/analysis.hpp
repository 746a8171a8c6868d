#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cluttersim/strategies.hpp"

namespace clutter {

struct AnalysisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrialResult {
    std::uint64_t scene_seed = 0;
    StrategyKind strategy = StrategyKind::Straight;
    bool success = false;
    bool faulted = false;
    double d_goal = 0.0;         // m, tip-to-goal distance when the trial ended
    double t_comp = 0.0;         // s
    double norm_distance = 0.0;  // d_goal / d_scene
    double norm_time = 0.0;      // t_comp / t_tot; exactly 1 for failures
    int excavates = 0;
    int burrow_episodes = 0;
    int pushed_out = 0;
};

struct WilcoxonResult {
    double w_plus = 0.0;   // sum of ranks of positive differences
    double w_minus = 0.0;
    double statistic = 0.0;  // min(w_plus, w_minus)
    double p_value = 1.0;    // two-sided
    int n = 0;               // non-zero differences used
    bool exact = false;      // exact enumeration (n <= 25) vs normal approximation
};

// Paired signed-rank test on (a, b) samples: differences a - b, zeros
// dropped, ties get average ranks. Exact tie-aware null distribution for
// n <= 25; normal approximation with tie and continuity corrections above.
// Throws AnalysisError when every difference is zero.
WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs);

// "****" p<0.0001, "***" p<0.001, "**" p<0.01, "*" p<0.05, else "ns".
std::string significance_marker(double p);

// Ratio-to-baseline surface over a 2D parameter grid. values is row-major:
// values[iy * x_values.size() + ix]. Orientation: baseline mean divided by
// cell mean, so > 1 means the cell beats the baseline.
struct SweepSurface {
    std::string strategy;
    std::string metric;  // "distance" or "time"
    std::string x_name;
    std::string y_name;
    std::vector<double> x_values;
    std::vector<double> y_values;
    std::vector<double> values;
    std::string orientation = "baseline_mean / cell_mean";

    int nx() const { return static_cast<int>(x_values.size()); }
    int ny() const { return static_cast<int>(y_values.size()); }
    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * nx() + ix]; }
    double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * nx() + ix]; }
    double mean() const;
};

// Separable Gaussian blur in grid-index units, kernel truncated at 4 sigma,
// half-sample symmetric reflection at the borders (preserves the mean).
// sigma = 0 returns the surface unchanged.
SweepSurface gaussian_smooth(const SweepSurface& surface, double sigma);

// cell_metrics[iy * nx + ix] holds the per-scene metric values of one grid
// cell. Throws AnalysisError listing any cell with no data.
SweepSurface build_sweep_surface(const std::string& strategy, const std::string& metric,
                                 const std::string& x_name, const std::string& y_name,
                                 const std::vector<double>& x_values,
                                 const std::vector<double>& y_values,
                                 const std::vector<std::vector<double>>& cell_metrics,
                                 const std::vector<double>& baseline_metrics);

std::string surface_to_csv(const SweepSurface& surface);
std::string surface_to_json(const SweepSurface& surface);

// Per-strategy aggregate over the non-faulted trials.
struct StrategyAggregate {
    StrategyKind strategy = StrategyKind::Straight;
    int trials = 0;
    int faulted = 0;
    int successes = 0;
    double success_rate = 0.0;
    double mean_norm_distance = 0.0;
    double median_norm_distance = 0.0;
    double mean_norm_time = 0.0;
    double median_norm_time = 0.0;
    int excavates = 0;
    int burrow_episodes = 0;
    int pushed_out = 0;
};

std::vector<StrategyAggregate> aggregate_results(const std::vector<TrialResult>& results);

// Scene-paired metric values for two strategies (both trials non-faulted).
// metric: "distance" or "time".
std::vector<std::pair<double, double>> paired_metric(const std::vector<TrialResult>& results,
                                                     StrategyKind a, StrategyKind b,
                                                     const std::string& metric);

// One row per trial; %.17g floats so replays are byte-identical.
std::string trial_results_to_csv(const std::vector<TrialResult>& results);
std::vector<TrialResult> trial_results_from_csv(const std::string& text);

// Success table plus pairwise signed-rank tests with significance markers.
std::string comparison_report_markdown(const std::vector<TrialResult>& results);

// Machine-readable version of the same summary.
std::string comparison_summary_json(const std::vector<TrialResult>& results);

}  // namespace clutter
