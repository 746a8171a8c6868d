#include "cluttersim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace clutter {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs) {
    std::vector<double> diffs;
    diffs.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
        const double d = a - b;
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.empty())
        throw AnalysisError("signed-rank test undefined: identical samples (all differences zero)");

    const int n = static_cast<int>(diffs.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return std::abs(diffs[i]) < std::abs(diffs[j]); });

    std::vector<double> ranks(n, 0.0);
    for (int i = 0; i < n;) {
        int j = i;
        while (j + 1 < n && std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]])) ++j;
        const double avg = 0.5 * (i + j) + 1.0;  // 1-based positions i..j averaged
        for (int k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }

    WilcoxonResult r;
    r.n = n;
    for (int i = 0; i < n; ++i)
        if (diffs[i] > 0.0) r.w_plus += ranks[i];
    const double total = 0.5 * n * (n + 1);
    r.w_minus = total - r.w_plus;
    r.statistic = std::min(r.w_plus, r.w_minus);

    if (n <= 25) {
        r.exact = true;
        // Average ranks are multiples of 1/2; scale by 2 for integer sums.
        const long total2 = std::lround(2.0 * total);
        std::vector<unsigned long long> dp(static_cast<std::size_t>(total2) + 1, 0ULL);
        dp[0] = 1;
        for (int i = 0; i < n; ++i) {
            const long r2 = std::lround(2.0 * ranks[i]);
            for (long s = total2; s >= r2; --s) dp[s] += dp[s - r2];
        }
        const long w2 = std::lround(2.0 * r.statistic);
        unsigned long long count_le = 0;
        for (long s = 0; s <= w2; ++s) count_le += dp[s];
        // The null distribution is symmetric, so the two-sided p doubles the
        // lower tail of min(W+, W-).
        const double p = 2.0 * static_cast<double>(count_le) / std::ldexp(1.0, n);
        r.p_value = std::min(1.0, p);
    } else {
        r.exact = false;
        const double mu = 0.5 * total;
        double var = 0.0;
        for (double rank : ranks) var += rank * rank;
        var *= 0.25;  // each rank enters with an independent +/- of probability 1/2
        const double z = std::max(0.0, (std::abs(r.w_plus - mu) - 0.5) / std::sqrt(var));
        r.p_value = std::erfc(z / std::sqrt(2.0));
    }
    return r;
}

std::string significance_marker(double p) {
    if (p < 0.0001) return "****";
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "ns";
}

double SweepSurface::mean() const {
    if (values.empty()) return 0.0;
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

namespace {

int reflect_index(int i, int n) {
    // Half-sample symmetric: ... d c b a | a b c d | d c b a ...
    if (n == 1) return 0;
    const int period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

void smooth_axis(std::vector<double>& values, int nx, int ny, bool along_x,
                 const std::vector<double>& kernel) {
    const int radius = static_cast<int>(kernel.size()) - 1;
    std::vector<double> out(values.size(), 0.0);
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const double w = kernel[static_cast<std::size_t>(std::abs(k))];
                int sx = x, sy = y;
                if (along_x)
                    sx = reflect_index(x + k, nx);
                else
                    sy = reflect_index(y + k, ny);
                acc += w * values[static_cast<std::size_t>(sy) * nx + sx];
            }
            out[static_cast<std::size_t>(y) * nx + x] = acc;
        }
    values = std::move(out);
}

}  // namespace

SweepSurface gaussian_smooth(const SweepSurface& surface, double sigma) {
    if (sigma < 0.0) throw AnalysisError("smoothing sigma must be >= 0");
    SweepSurface out = surface;
    if (sigma == 0.0 || surface.values.empty()) return out;

    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(radius) + 1);
    double norm = 0.0;
    for (int k = 0; k <= radius; ++k) {
        kernel[static_cast<std::size_t>(k)] = std::exp(-0.5 * (double(k) * k) / (sigma * sigma));
        norm += (k == 0 ? 1.0 : 2.0) * kernel[static_cast<std::size_t>(k)];
    }
    for (double& w : kernel) w /= norm;

    smooth_axis(out.values, out.nx(), out.ny(), true, kernel);
    smooth_axis(out.values, out.nx(), out.ny(), false, kernel);
    return out;
}

SweepSurface build_sweep_surface(const std::string& strategy, const std::string& metric,
                                 const std::string& x_name, const std::string& y_name,
                                 const std::vector<double>& x_values,
                                 const std::vector<double>& y_values,
                                 const std::vector<std::vector<double>>& cell_metrics,
                                 const std::vector<double>& baseline_metrics) {
    const int nx = static_cast<int>(x_values.size());
    const int ny = static_cast<int>(y_values.size());
    if (static_cast<int>(cell_metrics.size()) != nx * ny)
        throw AnalysisError("sweep cell count " + std::to_string(cell_metrics.size()) +
                            " does not match grid " + std::to_string(nx) + "x" +
                            std::to_string(ny));
    if (baseline_metrics.empty()) throw AnalysisError("sweep baseline has no trials");

    std::string missing;
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            if (cell_metrics[static_cast<std::size_t>(iy) * nx + ix].empty()) {
                if (!missing.empty()) missing += ", ";
                missing += x_name + "=" + fmt_short(x_values[ix]) + "/" + y_name + "=" +
                           fmt_short(y_values[iy]);
            }
    if (!missing.empty()) throw AnalysisError("sweep cells without data: " + missing);

    double baseline_mean = 0.0;
    for (double v : baseline_metrics) baseline_mean += v;
    baseline_mean /= static_cast<double>(baseline_metrics.size());

    SweepSurface s;
    s.strategy = strategy;
    s.metric = metric;
    s.x_name = x_name;
    s.y_name = y_name;
    s.x_values = x_values;
    s.y_values = y_values;
    s.values.resize(static_cast<std::size_t>(nx) * ny);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const auto& cell = cell_metrics[static_cast<std::size_t>(iy) * nx + ix];
            double mean = 0.0;
            for (double v : cell) mean += v;
            mean /= static_cast<double>(cell.size());
            s.at(ix, iy) = baseline_mean / std::max(mean, 1e-12);
        }
    return s;
}

std::string surface_to_csv(const SweepSurface& s) {
    std::ostringstream os;
    os << "# strategy=" << s.strategy << " metric=" << s.metric
       << " orientation=" << s.orientation << "\n";
    os << s.y_name << "\\" << s.x_name;
    for (double x : s.x_values) os << "," << fmt_double(x);
    os << "\n";
    for (int iy = 0; iy < s.ny(); ++iy) {
        os << fmt_double(s.y_values[iy]);
        for (int ix = 0; ix < s.nx(); ++ix) os << "," << fmt_double(s.at(ix, iy));
        os << "\n";
    }
    return os.str();
}

std::string surface_to_json(const SweepSurface& s) {
    nlohmann::json j;
    j["strategy"] = s.strategy;
    j["metric"] = s.metric;
    j["orientation"] = s.orientation;
    j["x_name"] = s.x_name;
    j["y_name"] = s.y_name;
    j["x_values"] = s.x_values;
    j["y_values"] = s.y_values;
    j["values"] = s.values;
    return j.dump(2);
}

std::vector<StrategyAggregate> aggregate_results(const std::vector<TrialResult>& results) {
    const StrategyKind kinds[] = {StrategyKind::Straight, StrategyKind::Burrow,
                                  StrategyKind::Excavate, StrategyKind::HybridClock,
                                  StrategyKind::HybridEvent};
    std::vector<StrategyAggregate> out;
    for (StrategyKind kind : kinds) {
        StrategyAggregate agg;
        agg.strategy = kind;
        std::vector<double> dist, time;
        for (const TrialResult& r : results) {
            if (r.strategy != kind) continue;
            ++agg.trials;
            if (r.faulted) {
                ++agg.faulted;
                continue;
            }
            if (r.success) ++agg.successes;
            dist.push_back(r.norm_distance);
            time.push_back(r.norm_time);
            agg.excavates += r.excavates;
            agg.burrow_episodes += r.burrow_episodes;
            agg.pushed_out += r.pushed_out;
        }
        if (agg.trials == 0) continue;
        const int used = agg.trials - agg.faulted;
        if (used > 0) {
            agg.success_rate = static_cast<double>(agg.successes) / used;
            auto mean = [](std::vector<double>& v) {
                double s = 0.0;
                for (double x : v) s += x;
                return s / static_cast<double>(v.size());
            };
            auto median = [](std::vector<double>& v) {
                std::sort(v.begin(), v.end());
                const std::size_t m = v.size() / 2;
                return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
            };
            agg.mean_norm_distance = mean(dist);
            agg.mean_norm_time = mean(time);
            agg.median_norm_distance = median(dist);
            agg.median_norm_time = median(time);
        }
        out.push_back(agg);
    }
    return out;
}

std::vector<std::pair<double, double>> paired_metric(const std::vector<TrialResult>& results,
                                                     StrategyKind a, StrategyKind b,
                                                     const std::string& metric) {
    const bool use_time = metric == "time";
    if (!use_time && metric != "distance")
        throw AnalysisError("unknown metric '" + metric + "' (expected distance or time)");
    std::map<std::uint64_t, std::pair<const TrialResult*, const TrialResult*>> by_scene;
    for (const TrialResult& r : results) {
        if (r.faulted) continue;
        if (r.strategy == a) by_scene[r.scene_seed].first = &r;
        if (r.strategy == b) by_scene[r.scene_seed].second = &r;
    }
    std::vector<std::pair<double, double>> pairs;
    for (const auto& [seed, pr] : by_scene) {
        if (!pr.first || !pr.second) continue;
        if (use_time)
            pairs.emplace_back(pr.first->norm_time, pr.second->norm_time);
        else
            pairs.emplace_back(pr.first->norm_distance, pr.second->norm_distance);
    }
    return pairs;
}

std::string trial_results_to_csv(const std::vector<TrialResult>& results) {
    std::ostringstream os;
    os << "scene_seed,strategy,success,faulted,d_goal,t_comp,norm_distance,norm_time,"
          "excavates,burrow_episodes,pushed_out\n";
    for (const TrialResult& r : results) {
        os << r.scene_seed << ',' << to_string(r.strategy) << ',' << (r.success ? 1 : 0) << ','
           << (r.faulted ? 1 : 0) << ',' << fmt_double(r.d_goal) << ',' << fmt_double(r.t_comp)
           << ',' << fmt_double(r.norm_distance) << ',' << fmt_double(r.norm_time) << ','
           << r.excavates << ',' << r.burrow_episodes << ',' << r.pushed_out << '\n';
    }
    return os.str();
}

std::vector<TrialResult> trial_results_from_csv(const std::string& text) {
    std::vector<TrialResult> out;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("scene_seed,", 0) == 0) continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 11)
            throw AnalysisError("trial CSV line " + std::to_string(line_no) + ": expected 11 fields, got " +
                                std::to_string(fields.size()));
        try {
            TrialResult r;
            r.scene_seed = std::stoull(fields[0]);
            r.strategy = strategy_from_string(fields[1]);
            r.success = fields[2] == "1";
            r.faulted = fields[3] == "1";
            r.d_goal = std::stod(fields[4]);
            r.t_comp = std::stod(fields[5]);
            r.norm_distance = std::stod(fields[6]);
            r.norm_time = std::stod(fields[7]);
            r.excavates = std::stoi(fields[8]);
            r.burrow_episodes = std::stoi(fields[9]);
            r.pushed_out = std::stoi(fields[10]);
            out.push_back(r);
        } catch (const std::exception& e) {
            throw AnalysisError("trial CSV line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

namespace {

struct PairwiseRow {
    StrategyKind a, b;
    std::string metric;
    bool valid = false;
    WilcoxonResult test;
    std::string note;
};

std::vector<PairwiseRow> pairwise_tests(const std::vector<TrialResult>& results,
                                        const std::vector<StrategyAggregate>& aggs) {
    std::vector<PairwiseRow> rows;
    for (std::size_t i = 0; i < aggs.size(); ++i)
        for (std::size_t j = i + 1; j < aggs.size(); ++j)
            for (const char* metric : {"distance", "time"}) {
                PairwiseRow row;
                row.a = aggs[i].strategy;
                row.b = aggs[j].strategy;
                row.metric = metric;
                const auto pairs = paired_metric(results, row.a, row.b, metric);
                if (pairs.empty()) {
                    row.note = "no paired scenes";
                } else {
                    try {
                        row.test = wilcoxon_signed_rank(pairs);
                        row.valid = true;
                    } catch (const AnalysisError&) {
                        row.note = "identical samples";
                    }
                }
                rows.push_back(row);
            }
    return rows;
}

}  // namespace

std::string comparison_report_markdown(const std::vector<TrialResult>& results) {
    const auto aggs = aggregate_results(results);
    std::ostringstream os;
    os << "# Strategy comparison\n\n";
    os << "| strategy | trials | faulted | success rate | mean dist | median dist | "
          "mean time | median time | excavates | pushed out |\n";
    os << "|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& a : aggs) {
        os << "| " << to_string(a.strategy) << " | " << a.trials << " | " << a.faulted << " | "
           << fmt_short(a.success_rate) << " | " << fmt_short(a.mean_norm_distance) << " | "
           << fmt_short(a.median_norm_distance) << " | " << fmt_short(a.mean_norm_time)
           << " | " << fmt_short(a.median_norm_time) << " | " << a.excavates << " | "
           << a.pushed_out << " |\n";
    }
    os << "\nDistance and time are normalized (d_goal / d_scene, t_comp / t_tot); lower is "
          "better. Faulted trials are excluded from the statistics.\n";
    os << "\n## Pairwise Wilcoxon signed-rank tests (paired by scene)\n\n";
    os << "| a | b | metric | n | W | p | significance |\n";
    os << "|---|---|---|---|---|---|---|\n";
    for (const auto& row : pairwise_tests(results, aggs)) {
        os << "| " << to_string(row.a) << " | " << to_string(row.b) << " | " << row.metric
           << " | ";
        if (row.valid) {
            os << row.test.n << " | " << fmt_short(row.test.statistic) << " | "
               << fmt_short(row.test.p_value) << " | " << significance_marker(row.test.p_value)
               << " |\n";
        } else {
            os << "- | - | - | " << row.note << " |\n";
        }
    }
    return os.str();
}

std::string comparison_summary_json(const std::vector<TrialResult>& results) {
    const auto aggs = aggregate_results(results);
    nlohmann::json j;
    j["trials"] = results.size();
    j["strategies"] = nlohmann::json::array();
    for (const auto& a : aggs) {
        nlohmann::json s;
        s["strategy"] = to_string(a.strategy);
        s["trials"] = a.trials;
        s["faulted"] = a.faulted;
        s["successes"] = a.successes;
        s["success_rate"] = a.success_rate;
        s["mean_norm_distance"] = a.mean_norm_distance;
        s["median_norm_distance"] = a.median_norm_distance;
        s["mean_norm_time"] = a.mean_norm_time;
        s["median_norm_time"] = a.median_norm_time;
        s["excavates"] = a.excavates;
        s["burrow_episodes"] = a.burrow_episodes;
        s["pushed_out"] = a.pushed_out;
        j["strategies"].push_back(s);
    }
    j["pairwise"] = nlohmann::json::array();
    for (const auto& row : pairwise_tests(results, aggs)) {
        nlohmann::json t;
        t["a"] = to_string(row.a);
        t["b"] = to_string(row.b);
        t["metric"] = row.metric;
        if (row.valid) {
            t["n"] = row.test.n;
            t["w"] = row.test.statistic;
            t["p"] = row.test.p_value;
            t["exact"] = row.test.exact;
            t["significance"] = significance_marker(row.test.p_value);
        } else {
            t["note"] = row.note;
        }
        j["pairwise"].push_back(t);
    }
    return j.dump(2);
}

}  // namespace clutter
