#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cluttersim/strategies.hpp"

using namespace clutter;

namespace {

EffectorState state_at(Vec2 tip, double theta) {
    EffectorState s;
    s.tip_position = tip;
    s.theta = theta;
    s.length = 0.30;
    return s;
}

ContactSummary quiet_summary(double t) {
    ContactSummary s;
    s.timestamp = t;
    return s;
}

ContactSummary loaded_summary(double t, double peak, Region region, double tip_force) {
    ContactSummary s;
    s.timestamp = t;
    s.peak_force = peak;
    s.peak_region = region;
    s.tip_force = tip_force;
    return s;
}

}  // namespace

TEST_CASE("straight line: aligned, bearing turn, and at-goal cases") {
    StrategyParams p;

    VelocityCmd cmd = straight_line_command(state_at({0, 0}, 0.0), {0, 0.38}, p);
    CHECK(cmd.linear.x == doctest::Approx(0.0));
    CHECK(cmd.linear.y == doctest::Approx(0.045));
    CHECK(cmd.angular == 0.0);

    // Goal to the right: phi = pi/2 > theta -> positive turn at omega_max.
    cmd = straight_line_command(state_at({0, 0}, 0.0), {0.38, 0}, p);
    CHECK(cmd.linear.x == doctest::Approx(0.045));
    CHECK(cmd.linear.y == doctest::Approx(0.0));
    CHECK(cmd.angular == doctest::Approx(0.1));

    cmd = straight_line_command(state_at({0.2, 0.1}, 0.3), {0.2, 0.1}, p);
    CHECK(cmd.linear.x == 0.0);
    CHECK(cmd.linear.y == 0.0);
    CHECK(cmd.angular == 0.0);
}

TEST_CASE("straight line: heading deadband suppresses chatter") {
    StrategyParams p;
    // phi = 0.01 rad off the current heading, inside the 0.02 deadband.
    const double phi = 0.01;
    const Vec2 goal{0.38 * std::sin(phi), 0.38 * std::cos(phi)};
    VelocityCmd cmd = straight_line_command(state_at({0, 0}, 0.0), goal, p);
    CHECK(cmd.angular == 0.0);

    const Vec2 goal2{0.38 * std::sin(0.05), 0.38 * std::cos(0.05)};
    cmd = straight_line_command(state_at({0, 0}, 0.0), goal2, p);
    CHECK(cmd.angular == doctest::Approx(0.1));
}

TEST_CASE("burrow with zero amplitude is bitwise straight line") {
    StrategyParams p;
    p.a_bur = 0.0;
    Rng rng(123);
    for (int i = 0; i < 1000; ++i) {
        const EffectorState s =
            state_at({rng.uniform(-0.25, 0.25), rng.uniform(0.0, 0.38)}, rng.uniform(-1.5, 1.5));
        const Vec2 goal{rng.uniform(-0.25, 0.25), rng.uniform(0.0, 0.38)};
        const double t = rng.uniform(0.0, 120.0);
        const VelocityCmd a = burrow_command(s, goal, t, p);
        const VelocityCmd b = straight_line_command(s, goal, p);
        REQUIRE(a.linear.x == b.linear.x);
        REQUIRE(a.linear.y == b.linear.y);
        REQUIRE(a.angular == b.angular);
    }
}

TEST_CASE("burrow at sin = 0 equals straight line") {
    StrategyParams p;  // a_bur = 0.83 nominal
    const EffectorState s = state_at({0.05, 0.1}, 0.2);
    const Vec2 goal{-0.1, 0.3};
    const VelocityCmd a = burrow_command(s, goal, 0.0, p);  // sin(0) = 0
    const VelocityCmd b = straight_line_command(s, goal, p);
    CHECK(a.linear.x == b.linear.x);
    CHECK(a.linear.y == b.linear.y);
}

TEST_CASE("burrow hand value: A=0.5, unit sine") {
    StrategyParams p;
    p.a_bur = 0.5;
    p.f_bur = 1.0;
    // d_hat = (0,1), sin(2 pi t) = 1 at t = 0.25; d_hat x z_hat = (1, 0).
    const VelocityCmd cmd = burrow_command(state_at({0, 0}, 0.0), {0, 0.38}, 0.25, p);
    CHECK(cmd.linear.x == doctest::Approx(0.045 / std::sqrt(2.0)).epsilon(1e-9));
    CHECK(cmd.linear.y == doctest::Approx(0.045 / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("burrow speed is exactly v_max for any amplitude") {
    StrategyParams p;
    Rng rng(77);
    for (int i = 0; i < 200; ++i) {
        p.a_bur = rng.uniform(0.0, 0.99);
        const EffectorState s = state_at({rng.uniform(-0.2, 0.2), rng.uniform(0.0, 0.3)}, 0.0);
        const VelocityCmd cmd = burrow_command(s, {0.0, 0.38}, rng.uniform(0.0, 10.0), p);
        CHECK(cmd.linear.norm() == doctest::Approx(p.v_max).epsilon(1e-12));
    }
}

TEST_CASE("excavate hand values at t_frac 0, 0.25, 1") {
    StrategyParams p;  // v_max 0.045, omega_max 0.1, s_excv 2, L 0.30

    VelocityCmd cmd = excavate_command(state_at({0, 0.2}, 0.0), 0.0, TurnDir::CCW, p);
    CHECK(std::fabs(cmd.angular - 0.0) < 1e-9);
    CHECK(std::fabs(cmd.linear.x - 0.0) < 1e-9);
    CHECK(std::fabs(cmd.linear.y - -0.0225) < 1e-9);

    cmd = excavate_command(state_at({0, 0.2}, 0.0), 1.0, TurnDir::CCW, p);
    CHECK(std::fabs(cmd.angular - 0.0) < 1e-9);
    CHECK(std::fabs(cmd.linear.x - -0.045) < 1e-9);
    CHECK(std::fabs(cmd.linear.y - 0.0) < 1e-9);

    // K = (1 + 1*0.25)/2 = 0.625; omega = -K omega_max sin(pi/2) = -0.0625.
    cmd = excavate_command(state_at({0, 0.2}, 0.0), 0.25, TurnDir::CCW, p);
    CHECK(std::fabs(cmd.angular - -0.0625) < 1e-9);
}

TEST_CASE("excavate CW mirrors CCW exactly on a 100-point grid") {
    StrategyParams p;
    for (int i = 0; i <= 100; ++i) {
        const double t_frac = i / 100.0;
        // theta = 0 keeps the rotation out so the mirror is visible directly.
        const VelocityCmd ccw = excavate_command(state_at({0, 0.2}, 0.0), t_frac, TurnDir::CCW, p);
        const VelocityCmd cw = excavate_command(state_at({0, 0.2}, 0.0), t_frac, TurnDir::CW, p);
        CHECK(std::fabs(cw.linear.x + ccw.linear.x) < 1e-12);
        CHECK(std::fabs(cw.linear.y - ccw.linear.y) < 1e-12);
        CHECK(std::fabs(cw.angular + ccw.angular) < 1e-12);
    }
}

TEST_CASE("excavate speed never exceeds scaled bound") {
    StrategyParams p;
    for (int i = 0; i <= 100; ++i) {
        const double t_frac = i / 100.0;
        const VelocityCmd cmd = excavate_command(state_at({0, 0.2}, 0.4), t_frac, TurnDir::CCW, p);
        // |linear| <= K v_max sqrt(1 + (L w)^2 + ...); generous envelope check.
        CHECK(cmd.linear.norm() <= p.v_max * (1.0 + p.effector_length * p.omega_max) + 1e-12);
        CHECK(std::fabs(cmd.angular) <= p.omega_max + 1e-12);
    }
}

TEST_CASE("excavate mode emits exactly ceil(t_excv / dt) commands") {
    const double control_dt = 0.05;
    for (double t_excv : {5.0, 1.875, 7.5}) {
        StrategyParams p;
        p.t_excv = t_excv;
        p.t_trig = 5.0;
        EventThresholds thr;
        StrategyMode mode;
        Rng rng(9);
        int excavate_ticks = 0;
        bool started = false;
        for (int tick = 0; tick < 4000; ++tick) {
            const double t = tick * control_dt;
            const EffectorState s = state_at({0, 0.1}, 0.0);
            policy_step(StrategyKind::Excavate, mode, s, quiet_summary(t), {0, 0.38}, t, p, thr,
                        rng);
            if (mode.phase == StrategyMode::Phase::Excavate) {
                ++excavate_ticks;
                started = true;
            } else if (started) {
                break;
            }
        }
        CHECK(excavate_ticks == static_cast<int>(std::ceil(t_excv / control_dt)));
    }
}

TEST_CASE("excavate strategy first triggers at t_trig") {
    StrategyParams p;
    EventThresholds thr;
    StrategyMode mode;
    Rng rng(4);
    const double dt = 0.05;
    double entered = -1.0;
    for (int tick = 0; tick < 400; ++tick) {
        const double t = tick * dt;
        policy_step(StrategyKind::Excavate, mode, state_at({0, 0.1}, 0.0), quiet_summary(t),
                    {0, 0.38}, t, p, thr, rng);
        if (mode.phase == StrategyMode::Phase::Excavate) {
            entered = t;
            break;
        }
    }
    CHECK(entered == doctest::Approx(5.0));
}

TEST_CASE("hybrid event: immediate mode choice follows peak force") {
    StrategyParams p;
    EventThresholds thr;
    StrategyMode mode;
    Rng rng(2);
    const EffectorState s = state_at({0, 0.1}, 0.0);
    const Vec2 goal{0, 0.38};

    // Peak 6 N >= F_bur -> burrow (nonzero lateral weave at t = 0.3).
    VelocityCmd cmd = policy_step(StrategyKind::HybridEvent, mode, s,
                                  loaded_summary(0.3, 6.0, Region::Left, 0.0), goal, 0.3, p, thr,
                                  rng);
    const VelocityCmd bur = burrow_command(s, goal, 0.3, p);
    CHECK(cmd.linear.x == bur.linear.x);
    CHECK(cmd.linear.y == bur.linear.y);

    // Fresh controller, peak 2 N -> straight line.
    StrategyMode mode2;
    cmd = policy_step(StrategyKind::HybridEvent, mode2, s, loaded_summary(0.3, 2.0, Region::Left, 0.0),
                      goal, 0.3, p, thr, rng);
    const VelocityCmd sl = straight_line_command(s, goal, p);
    CHECK(cmd.linear.x == sl.linear.x);
    CHECK(cmd.linear.y == sl.linear.y);
}

TEST_CASE("push trigger: band and duration rules from the worked examples") {
    StrategyParams p;
    EventThresholds thr;
    const Vec2 goal{0, 0.38};
    const double sample_dt = 1.0 / 15.0;

    auto run_tip_force = [&](double tip_force, double duration) {
        StrategyMode mode;
        Rng rng(31);
        double fired_at = -1.0;
        for (int k = 0; k * sample_dt <= duration; ++k) {
            const double t = k * sample_dt;
            // Keep the tip moving so the jam trigger's stall test stays quiet.
            const EffectorState s = state_at({0, 0.001 * k}, 0.0);
            policy_step(StrategyKind::HybridEvent, mode, s,
                        loaded_summary(t, tip_force, Region::Tip, tip_force), goal, t, p, thr,
                        rng);
            if (mode.phase == StrategyMode::Phase::Excavate && fired_at < 0.0) fired_at = t;
        }
        return fired_at;
    };

    // 1.0 N sustained 2.5 s -> fires once the 2 s dwell is met.
    const double fired = run_tip_force(1.0, 2.5);
    CHECK(fired >= 2.0 - 1e-9);
    CHECK(fired <= 2.2);

    // 0.3 N for 10 s: below the band, never fires.
    CHECK(run_tip_force(0.3, 10.0) < 0.0);

    // 8.0 N: above the band, never fires as a push (and stays short of F_excv).
    CHECK(run_tip_force(8.0, 10.0) < 0.0);
}

TEST_CASE("jam trigger: stall + force gate and side-based direction") {
    StrategyParams p;
    EventThresholds thr;
    const Vec2 goal{0, 0.38};
    const double sample_dt = 1.0 / 15.0;

    auto run_jam = [&](double peak, Region region, bool progressing) {
        StrategyMode mode;
        Rng rng(64);
        for (int k = 0; k * sample_dt <= 8.0; ++k) {
            const double t = k * sample_dt;
            const double y = progressing ? 0.045 * t : 0.1;
            const EffectorState s = state_at({0, y}, 0.0);
            policy_step(StrategyKind::HybridEvent, mode, s, loaded_summary(t, peak, region, 0.0),
                        goal, t, p, thr, rng);
            if (mode.phase == StrategyMode::Phase::Excavate)
                return std::optional<TurnDir>(mode.excavate_dir);
        }
        return std::optional<TurnDir>();
    };

    // Stalled with 12 N on the left face -> CCW excavate.
    auto dir = run_jam(12.0, Region::Left, false);
    REQUIRE(dir.has_value());
    CHECK(*dir == TurnDir::CCW);

    dir = run_jam(12.0, Region::Right, false);
    REQUIRE(dir.has_value());
    CHECK(*dir == TurnDir::CW);

    // Progressing at v_max: no fire even at 12 N.
    CHECK_FALSE(run_jam(12.0, Region::Left, true).has_value());

    // Stalled but only 4 N: below F_excv, no fire. (4 N is also inside the
    // push band, so keep it on a side face, not the tip.)
    CHECK_FALSE(run_jam(4.0, Region::Left, false).has_value());
}

TEST_CASE("hybrid event with infinite thresholds replays the straight-line trace") {
    StrategyParams p;
    EventThresholds thr;
    const double inf = std::numeric_limits<double>::infinity();
    thr.f_bur = inf;
    thr.f_excv = inf;
    thr.f_push_min = inf;
    thr.f_push_max = inf;

    StrategyMode mode;
    Rng rng(5);
    Rng scene_rng(12);
    Vec2 tip{0.02, 0.0};
    const Vec2 goal{-0.1, 0.38};
    const double dt = 0.05;
    for (int tick = 0; tick < 2000; ++tick) {
        const double t = tick * dt;
        EffectorState s = state_at(tip, 0.1 * std::sin(0.01 * tick));
        const ContactSummary sum =
            loaded_summary(t, scene_rng.uniform(0.0, 20.0), Region::Left, scene_rng.uniform(0.0, 3.0));
        const VelocityCmd a = policy_step(StrategyKind::HybridEvent, mode, s, sum, goal, t, p,
                                          thr, rng);
        const VelocityCmd b = straight_line_command(s, goal, p);
        REQUIRE(a.linear.x == b.linear.x);
        REQUIRE(a.linear.y == b.linear.y);
        REQUIRE(a.angular == b.angular);
        tip += a.linear * dt;
    }
}

TEST_CASE("policy randomness is reproducible seed to seed") {
    auto run = [](std::uint64_t seed) {
        StrategyParams p;
        EventThresholds thr;
        StrategyMode mode;
        Rng rng(seed);
        std::vector<int> dirs;
        const double dt = 0.05;
        for (int tick = 0; tick < 3000; ++tick) {
            const double t = tick * dt;
            policy_step(StrategyKind::HybridClock, mode, state_at({0, 0.1}, 0.0),
                        quiet_summary(t), {0, 0.38}, t, p, thr, rng);
            if (mode.phase == StrategyMode::Phase::Excavate &&
                t == mode.excavate_start)
                dirs.push_back(mode.excavate_dir == TurnDir::CCW ? 1 : 0);
        }
        return dirs;
    };
    const auto a = run(42);
    const auto b = run(42);
    const auto c = run(43);
    REQUIRE(a.size() > 3);
    CHECK(a == b);
    CHECK(a != c);  // nearly certain with >3 coin flips
}

TEST_CASE("deadline guard blocks excavations near the cutoff") {
    StrategyParams p;
    p.t_deadline = 60.0;
    EventThresholds thr;
    StrategyMode mode;
    Rng rng(8);
    const double dt = 0.05;
    double last_start = -1.0;
    for (int tick = 0; tick * dt < 60.0; ++tick) {
        const double t = tick * dt;
        policy_step(StrategyKind::Excavate, mode, state_at({0, 0.1}, 0.0), quiet_summary(t),
                    {0, 0.38}, t, p, thr, rng);
        if (mode.phase == StrategyMode::Phase::Excavate) last_start = mode.excavate_start;
    }
    CHECK(last_start >= 0.0);
    CHECK(last_start + 2.0 * p.t_excv <= 60.0 + 1e-9);
}
