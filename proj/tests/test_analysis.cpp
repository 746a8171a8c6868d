#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "cluttersim/analysis.hpp"
#include "cluttersim/rng.hpp"

using namespace clutter;

namespace {

// Brute-force reference for the exact two-sided signed-rank p-value:
// enumerate all 2^n sign assignments over the actual (tied, averaged) ranks.
struct BruteResult {
    double w_plus;
    double w_minus;
    double p;
    int n;
};

BruteResult brute_force_wilcoxon(const std::vector<double>& diffs) {
    std::vector<double> mags;
    std::vector<int> signs;
    for (double d : diffs) {
        if (d == 0.0) continue;
        mags.push_back(std::fabs(d));
        signs.push_back(d > 0.0 ? 1 : -1);
    }
    const int n = static_cast<int>(mags.size());
    REQUIRE(n > 0);

    std::vector<int> order(mags.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return mags[a] < mags[b]; });
    std::vector<double> ranks(mags.size(), 0.0);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && mags[order[j + 1]] == mags[order[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }

    double w_plus = 0.0, total = 0.0;
    for (std::size_t k = 0; k < ranks.size(); ++k) {
        total += ranks[k];
        if (signs[k] > 0) w_plus += ranks[k];
    }
    const double w_minus = total - w_plus;
    const double w_obs = std::min(w_plus, w_minus);

    // P(min(W+, W-) <= w_obs) over all equally likely sign vectors.
    const std::uint64_t combos = 1ULL << n;
    std::uint64_t hits = 0;
    for (std::uint64_t mask = 0; mask < combos; ++mask) {
        double wp = 0.0;
        for (int b = 0; b < n; ++b)
            if (mask & (1ULL << b)) wp += ranks[static_cast<std::size_t>(b)];
        const double w = std::min(wp, total - wp);
        if (w <= w_obs + 1e-12) ++hits;
    }
    return {w_plus, w_minus, static_cast<double>(hits) / static_cast<double>(combos), n};
}

std::vector<std::pair<double, double>> as_pairs(const std::vector<double>& diffs) {
    std::vector<std::pair<double, double>> pairs;
    for (double d : diffs) pairs.push_back({d, 0.0});
    return pairs;
}

TrialResult make_trial(std::uint64_t seed, StrategyKind k, bool success, double nd, double nt) {
    TrialResult r;
    r.scene_seed = seed;
    r.strategy = k;
    r.success = success;
    r.d_goal = nd * 0.38;
    r.t_comp = nt * 120.0;
    r.norm_distance = nd;
    r.norm_time = nt;
    return r;
}

}  // namespace

TEST_CASE("wilcoxon matches hand-computed textbook case") {
    // diffs 1..5, all positive: W- = 0, exact two-sided p = 2/2^5 = 0.0625.
    auto r = wilcoxon_signed_rank(as_pairs({1, 2, 3, 4, 5}));
    CHECK(r.n == 5);
    CHECK(r.exact);
    CHECK(r.w_plus == doctest::Approx(15.0));
    CHECK(r.w_minus == doctest::Approx(0.0));
    CHECK(r.p_value == doctest::Approx(0.0625).epsilon(1e-12));
}

TEST_CASE("wilcoxon symmetric pair gives p = 1") {
    auto r = wilcoxon_signed_rank(as_pairs({1.0, -1.0}));
    CHECK(r.n == 2);
    CHECK(r.p_value == doctest::Approx(1.0));
}

TEST_CASE("wilcoxon drops zero differences") {
    auto r = wilcoxon_signed_rank(as_pairs({0.0, 0.0, 1.0, 2.0, 0.0, 3.0}));
    CHECK(r.n == 3);
    CHECK(r.w_plus == doctest::Approx(6.0));
}

TEST_CASE("wilcoxon all-zero differences is an error") {
    CHECK_THROWS_AS(wilcoxon_signed_rank(as_pairs({0.0, 0.0, 0.0})), AnalysisError);
    CHECK_THROWS_AS(wilcoxon_signed_rank({}), AnalysisError);
}

TEST_CASE("wilcoxon exact p matches brute-force enumeration on random cases") {
    Rng rng(20240817);
    for (int iter = 0; iter < 1000; ++iter) {
        const int n = 1 + static_cast<int>(rng.uniform_index(10));
        std::vector<double> diffs;
        bool any_nonzero = false;
        for (int k = 0; k < n; ++k) {
            // Small integer grid forces plenty of ties and some zeros.
            const int v = rng.uniform_int(-4, 4);
            diffs.push_back(static_cast<double>(v));
            any_nonzero |= v != 0;
        }
        if (!any_nonzero) diffs.push_back(1.0);

        const BruteResult want = brute_force_wilcoxon(diffs);
        const WilcoxonResult got = wilcoxon_signed_rank(as_pairs(diffs));
        CAPTURE(iter);
        REQUIRE(got.n == want.n);
        CHECK(got.exact);
        CHECK(got.w_plus == doctest::Approx(want.w_plus).epsilon(1e-12));
        CHECK(got.w_minus == doctest::Approx(want.w_minus).epsilon(1e-12));
        CHECK(got.p_value == doctest::Approx(std::min(1.0, want.p)).epsilon(1e-12));
    }
}

TEST_CASE("wilcoxon large n uses normal approximation and stays sane") {
    std::vector<std::pair<double, double>> pairs;
    Rng rng(7);
    for (int i = 0; i < 60; ++i) pairs.push_back({rng.uniform(0.0, 1.0) + 0.4, 0.0});
    auto r = wilcoxon_signed_rank(pairs);
    CHECK_FALSE(r.exact);
    CHECK(r.n == 60);
    CHECK(r.p_value < 1e-6);

    // Balanced signs: nowhere near significant.
    pairs.clear();
    for (int i = 0; i < 60; ++i) pairs.push_back({(i % 2 ? 1.0 : -1.0) * (1.0 + 0.001 * i), 0.0});
    r = wilcoxon_signed_rank(pairs);
    CHECK_FALSE(r.exact);
    CHECK(r.p_value > 0.5);
}

TEST_CASE("significance markers") {
    CHECK(significance_marker(0.00005) == "****");
    CHECK(significance_marker(0.0005) == "***");
    CHECK(significance_marker(0.005) == "**");
    CHECK(significance_marker(0.03) == "*");
    CHECK(significance_marker(0.05) == "ns");
    CHECK(significance_marker(0.9) == "ns");
}

TEST_CASE("surface ratio orientation: baseline mean over cell mean") {
    // baseline mean 3.0, cell mean 1.0 -> ratio 3.0 (cell beats baseline).
    SweepSurface s = build_sweep_surface("burrow", "distance", "x", "y", {0.1}, {0.2},
                                         {{1.0, 1.0, 1.0}}, {2.0, 3.0, 4.0});
    CHECK(s.at(0, 0) == doctest::Approx(3.0));

    // baseline mean 2.5, cell mean 2.0 -> 1.25.
    s = build_sweep_surface("burrow", "time", "x", "y", {0.1}, {0.2}, {{1.5, 2.5}},
                            {2.0, 3.0});
    CHECK(s.at(0, 0) == doctest::Approx(1.25));
}

TEST_CASE("surface with an empty cell is an error") {
    CHECK_THROWS_AS(build_sweep_surface("burrow", "distance", "x", "y", {0.1, 0.2}, {0.2},
                                        {{1.0}, {}}, {1.0}),
                    AnalysisError);
}

TEST_CASE("gaussian smoothing preserves the mean and handles edge kernels") {
    SweepSurface s;
    s.strategy = "burrow";
    s.metric = "distance";
    s.x_name = "x";
    s.y_name = "y";
    for (int i = 0; i < 10; ++i) s.x_values.push_back(i);
    for (int j = 0; j < 7; ++j) s.y_values.push_back(j);
    Rng rng(99);
    for (int j = 0; j < 7; ++j)
        for (int i = 0; i < 10; ++i) s.values.push_back(rng.uniform(0.2, 5.0));

    const double before = s.mean();
    for (double sigma : {0.5, 1.0, 2.0, 5.0}) {
        SweepSurface sm = gaussian_smooth(s, sigma);
        CHECK(sm.mean() == doctest::Approx(before).epsilon(1e-9));
    }

    SUBCASE("sigma zero is the identity") {
        SweepSurface sm = gaussian_smooth(s, 0.0);
        for (std::size_t k = 0; k < s.values.size(); ++k) CHECK(sm.values[k] == s.values[k]);
    }

    SUBCASE("impulse spreads symmetrically") {
        SweepSurface imp = s;
        std::fill(imp.values.begin(), imp.values.end(), 0.0);
        imp.at(5, 3) = 1.0;
        SweepSurface sm = gaussian_smooth(imp, 1.0);
        CHECK(sm.at(5, 3) > sm.at(4, 3));
        CHECK(sm.at(4, 3) == doctest::Approx(sm.at(6, 3)).epsilon(1e-12));
        CHECK(sm.at(5, 2) == doctest::Approx(sm.at(5, 4)).epsilon(1e-12));
        // Separable kernel: diagonal = product / center.
        CHECK(sm.at(4, 2) == doctest::Approx(sm.at(4, 3) * sm.at(5, 2) / sm.at(5, 3)));
    }
}

TEST_CASE("trial results round-trip through CSV byte-identically") {
    Rng rng(5);
    std::vector<TrialResult> rows;
    for (int i = 0; i < 40; ++i) {
        TrialResult r = make_trial(rng.next_u64(), static_cast<StrategyKind>(i % 5), rng.flip(),
                                   rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0));
        r.faulted = i % 11 == 0;
        r.excavates = static_cast<int>(rng.uniform_index(20));
        r.burrow_episodes = static_cast<int>(rng.uniform_index(20));
        r.pushed_out = static_cast<int>(rng.uniform_index(4));
        rows.push_back(r);
    }
    const std::string csv = trial_results_to_csv(rows);
    const std::vector<TrialResult> back = trial_results_from_csv(csv);
    REQUIRE(back.size() == rows.size());
    CHECK(trial_results_to_csv(back) == csv);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].scene_seed == rows[i].scene_seed);
        CHECK(back[i].strategy == rows[i].strategy);
        CHECK(back[i].success == rows[i].success);
        CHECK(back[i].norm_distance == rows[i].norm_distance);  // exact: %.17g
        CHECK(back[i].norm_time == rows[i].norm_time);
    }
}

TEST_CASE("aggregates and paired metrics skip faulted trials") {
    std::vector<TrialResult> rows;
    rows.push_back(make_trial(1, StrategyKind::Straight, true, 0.1, 0.2));
    rows.push_back(make_trial(1, StrategyKind::Burrow, true, 0.05, 0.3));
    rows.push_back(make_trial(2, StrategyKind::Straight, false, 0.5, 1.0));
    TrialResult f = make_trial(2, StrategyKind::Burrow, false, 0.9, 1.0);
    f.faulted = true;
    rows.push_back(f);

    const auto aggs = aggregate_results(rows);
    REQUIRE(aggs.size() == 2);
    std::map<StrategyKind, StrategyAggregate> by;
    for (const auto& a : aggs) by[a.strategy] = a;
    CHECK(by[StrategyKind::Straight].trials == 2);
    CHECK(by[StrategyKind::Straight].success_rate == doctest::Approx(0.5));
    CHECK(by[StrategyKind::Burrow].faulted == 1);
    CHECK(by[StrategyKind::Burrow].success_rate == doctest::Approx(1.0));

    const auto pairs =
        paired_metric(rows, StrategyKind::Straight, StrategyKind::Burrow, "distance");
    REQUIRE(pairs.size() == 1);  // scene 2 dropped: burrow trial faulted
    CHECK(pairs[0].first == doctest::Approx(0.1));
    CHECK(pairs[0].second == doctest::Approx(0.05));
}

TEST_CASE("comparison report contains every strategy and test row") {
    Rng rng(11);
    std::vector<TrialResult> rows;
    for (std::uint64_t s = 1; s <= 12; ++s)
        for (StrategyKind k : {StrategyKind::Straight, StrategyKind::Burrow}) {
            const double nd = rng.uniform(0.0, 0.5) + (k == StrategyKind::Straight ? 0.2 : 0.0);
            rows.push_back(make_trial(s, k, nd < 0.3, nd, rng.uniform(0.1, 1.0)));
        }
    const std::string md = comparison_report_markdown(rows);
    CHECK(md.find("straight") != std::string::npos);
    CHECK(md.find("burrow") != std::string::npos);
    CHECK(md.find("Wilcoxon") != std::string::npos);
    const std::string js = comparison_summary_json(rows);
    CHECK(js.find("\"strategies\"") != std::string::npos);
    CHECK(js.find("\"pairwise\"") != std::string::npos);
}
