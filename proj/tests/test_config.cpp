#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "cluttersim/config.hpp"

using namespace clutter;

TEST_CASE("defaults reproduce the reference setup") {
    const ExperimentConfig c = default_config();
    CHECK(c.scene_gen.bounds.depth == doctest::Approx(0.38));
    CHECK(c.scene_gen.bounds.width == doctest::Approx(0.53));
    CHECK(c.strategy.v_max == doctest::Approx(0.045));
    CHECK(c.strategy.omega_max == doctest::Approx(0.1));
    CHECK(c.limits.f_max == doctest::Approx(15.0));
    CHECK(c.limits.m_max == doctest::Approx(4.5));
    CHECK(c.physics.dt == doctest::Approx(1.0 / 240.0));
    CHECK(c.sensor.rows == 4);
    CHECK(c.sensor.cols == 10);
    // finalize() keeps dependent fields consistent.
    CHECK(c.strategy.effector_length == doctest::Approx(c.physics.effector_length));
    CHECK(c.strategy.t_deadline == doctest::Approx(c.t_tot));
    CHECK(c.scene_gen.catalog.size() == 8);
}

TEST_CASE("apply_config_value sets keys and rejects junk") {
    ExperimentConfig c = default_config();
    apply_config_value(c, "strategy.a_bur", "0.7");
    CHECK(c.strategy.a_bur == doctest::Approx(0.7));
    apply_config_value(c, "batch.scenes", "42");
    CHECK(c.scenes == 42);
    apply_config_value(c, "output.dir", "results/run1");
    CHECK(c.output_dir == "results/run1");
    apply_config_value(c, "scene.style", "grid");
    CHECK(c.scene_style == SceneStyle::Grid);

    CHECK_THROWS_AS(apply_config_value(c, "strategy.warp_speed", "1"), ConfigError);
    CHECK_THROWS_AS(apply_config_value(c, "strategy.a_bur", "fast"), ConfigError);
    CHECK_THROWS_AS(apply_config_value(c, "batch.scenes", "many"), ConfigError);

    // Unknown keys name the key in the message.
    try {
        apply_config_value(c, "nope.nothing", "0");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("nope.nothing") != std::string::npos);
    }
}

TEST_CASE("parse_config reads assignments, comments, and blank lines") {
    const std::string text =
        "# experiment overrides\n"
        "\n"
        "trial.t_tot = 60      # shorter trials\n"
        "strategy.f_bur=2.5\n"
        "  sweep.a_bur = 0.5:0.1:0.9  \n";
    const ExperimentConfig c = parse_config(text);
    CHECK(c.t_tot == doctest::Approx(60.0));
    CHECK(c.strategy.f_bur == doctest::Approx(2.5));
    CHECK(c.sweep_a_bur.lo == doctest::Approx(0.5));
    CHECK(c.sweep_a_bur.step == doctest::Approx(0.1));
    CHECK(c.sweep_a_bur.hi == doctest::Approx(0.9));

    CHECK_THROWS_AS(parse_config("trial.t_tot 60\n"), ConfigError);   // missing '='
    CHECK_THROWS_AS(parse_config("made.up = 1\n"), ConfigError);
}

TEST_CASE("config round-trips through its own serialization") {
    ExperimentConfig c = default_config();
    apply_config_value(c, "strategy.t_excv", "3.125");
    apply_config_value(c, "event.f_push_min", "0.6");
    apply_config_value(c, "scene.count_max", "20");
    apply_config_value(c, "sweep.t_trig", "2:0.5:4");
    c.finalize();

    const std::string text = config_to_string(c);
    const ExperimentConfig back = parse_config(text);
    CHECK(back.strategy.t_excv == c.strategy.t_excv);
    CHECK(back.events.f_push_min == c.events.f_push_min);
    CHECK(back.scene_gen.count_max == c.scene_gen.count_max);
    CHECK(back.sweep_t_trig.lo == c.sweep_t_trig.lo);
    CHECK(back.sweep_t_trig.step == c.sweep_t_trig.step);
    CHECK(back.sweep_t_trig.hi == c.sweep_t_trig.hi);
    // Fixed point: serializing the parsed config reproduces the text.
    CHECK(config_to_string(back) == text);
}

TEST_CASE("sweep ranges enumerate inclusive grids") {
    const SweepRange r{1.875, 0.625, 7.5};
    const auto v = r.values();
    REQUIRE(v.size() == 10);
    CHECK(v.front() == doctest::Approx(1.875));
    CHECK(v[1] == doctest::Approx(2.5));
    CHECK(v.back() == doctest::Approx(7.5));

    const SweepRange single{2.0, 1.0, 2.0};
    CHECK(single.values().size() == 1);

    // Endpoint reached despite accumulated floating point error.
    const SweepRange fine{0.0, 0.1, 1.0};
    CHECK(fine.values().size() == 11);
    CHECK(fine.values().back() == doctest::Approx(1.0));

    CHECK_THROWS_AS((SweepRange{1.0, 0.0, 2.0}).values(), ConfigError);
    CHECK_THROWS_AS((SweepRange{2.0, 0.5, 1.0}).values(), ConfigError);
}

TEST_CASE("malformed ranges name the key") {
    ExperimentConfig c = default_config();
    CHECK_THROWS_AS(apply_config_value(c, "sweep.a_bur", "0.5:0.9"), ConfigError);
    CHECK_THROWS_AS(apply_config_value(c, "sweep.a_bur", "a:b:c"), ConfigError);
    try {
        apply_config_value(c, "sweep.f_bur", "oops");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("sweep.f_bur") != std::string::npos);
    }
}

TEST_CASE("finalize builds the object catalog from the stated ranges") {
    ExperimentConfig c = default_config();
    apply_config_value(c, "scene.catalog_size", "4");
    apply_config_value(c, "scene.object_side_min", "0.05");
    apply_config_value(c, "scene.object_side_max", "0.08");
    c.finalize();
    REQUIRE(c.scene_gen.catalog.size() == 4);
    CHECK(c.scene_gen.catalog.front().side == doctest::Approx(0.05));
    CHECK(c.scene_gen.catalog.back().side == doctest::Approx(0.08));
    for (std::size_t i = 1; i < c.scene_gen.catalog.size(); ++i)
        CHECK(c.scene_gen.catalog[i].mass > c.scene_gen.catalog[i - 1].mass);
}

TEST_CASE("strategy names round-trip") {
    for (StrategyKind s : {StrategyKind::Straight, StrategyKind::Burrow, StrategyKind::Excavate,
                           StrategyKind::HybridClock, StrategyKind::HybridEvent})
        CHECK(strategy_from_string(to_string(s)) == s);
    CHECK_THROWS(strategy_from_string("teleport"));
}
