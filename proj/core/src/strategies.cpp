#include "cluttersim/strategies.hpp"

#include <cmath>
#include <limits>

namespace clutter {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTimeEps = 1e-9;
}  // namespace

const char* to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::Straight: return "straight";
        case StrategyKind::Burrow: return "burrow";
        case StrategyKind::Excavate: return "excavate";
        case StrategyKind::HybridClock: return "hybrid_clock";
        default: return "hybrid_event";
    }
}

StrategyKind strategy_from_string(const std::string& name) {
    if (name == "straight") return StrategyKind::Straight;
    if (name == "burrow") return StrategyKind::Burrow;
    if (name == "excavate") return StrategyKind::Excavate;
    if (name == "hybrid_clock") return StrategyKind::HybridClock;
    if (name == "hybrid_event") return StrategyKind::HybridEvent;
    throw std::runtime_error("unknown strategy '" + name +
                             "' (expected straight, burrow, excavate, hybrid_clock, "
                             "hybrid_event)");
}

const char* to_string(TurnDir dir) { return dir == TurnDir::CCW ? "ccw" : "cw"; }

namespace {

double heading_rate(Vec2 d, double theta, const StrategyParams& p) {
    const double phi = std::atan2(d.x, d.y);  // bearing from +y toward +x
    const double err = wrap_angle(phi - theta);
    if (std::abs(err) < p.theta_deadband) return 0.0;
    return err > 0.0 ? p.omega_max : -p.omega_max;
}

}  // namespace

VelocityCmd straight_line_command(const EffectorState& state, Vec2 goal,
                                  const StrategyParams& p) {
    const Vec2 d = goal - state.tip_position;
    const double dist = d.norm();
    VelocityCmd cmd;
    if (dist < 1e-12) return cmd;
    cmd.linear = (d / dist) * p.v_max;
    cmd.angular = heading_rate(d, state.theta, p);
    return cmd;
}

VelocityCmd burrow_command(const EffectorState& state, Vec2 goal, double t,
                           const StrategyParams& p) {
    const Vec2 d = goal - state.tip_position;
    const double dist = d.norm();
    VelocityCmd cmd;
    if (dist < 1e-12) return cmd;
    const Vec2 dhat = d / dist;
    const double arg = p.f_bur_in_rad ? p.f_bur * t : 2.0 * kPi * p.f_bur * t;
    const double coef = (p.a_bur / (1.0 - p.a_bur)) * std::sin(arg);
    if (coef == 0.0) {
        cmd.linear = dhat * p.v_max;  // exact straight-line degeneracy
    } else {
        const Vec2 lateral{dhat.y, -dhat.x};  // dhat x z
        cmd.linear = (dhat + lateral * coef).normalized() * p.v_max;
    }
    cmd.angular = heading_rate(d, state.theta, p);
    return cmd;
}

VelocityCmd excavate_command(const EffectorState& state, double t_frac, TurnDir dir,
                             const StrategyParams& p) {
    const double k = (1.0 + (p.s_excv - 1.0) * t_frac) / p.s_excv;
    double omega = -k * p.omega_max * std::sin(2.0 * kPi * t_frac);
    double bx = std::sin(1.5 * kPi * t_frac);
    if (dir == TurnDir::CW) {
        omega = -omega;
        bx = -bx;
    }
    const Vec2 bracket{bx - p.effector_length * omega, -std::cos(1.5 * kPi * t_frac)};
    VelocityCmd cmd;
    cmd.linear = Rot2(-state.theta).apply(bracket) * (k * p.v_max);
    cmd.angular = omega;
    return cmd;
}

std::optional<TurnDir> check_push_trigger(const StrategyMode& mode,
                                          const EventThresholds& thr, double t, Rng& rng) {
    if (!mode.push_contact_start) return std::nullopt;
    if (t - *mode.push_contact_start < thr.t_push - kTimeEps) return std::nullopt;
    return rng.flip() ? TurnDir::CCW : TurnDir::CW;
}

std::optional<TurnDir> check_jam_trigger(const StrategyMode& mode, const ContactSummary& summary,
                                         const EventThresholds& thr, const StrategyParams& p,
                                         Rng& rng) {
    if (mode.progress_window.empty()) return std::nullopt;
    const auto& oldest = mode.progress_window.front();
    if (oldest.first > mode.last_summary_time - thr.t_prog + kTimeEps)
        return std::nullopt;  // window does not yet span t_prog
    const double progress = oldest.second - mode.best_distance;
    if (progress >= thr.stall_fraction * p.v_max * thr.t_prog) return std::nullopt;
    if (summary.peak_force < thr.f_excv) return std::nullopt;
    switch (summary.peak_region) {
        case Region::Left: return TurnDir::CCW;
        case Region::Right: return TurnDir::CW;
        default: return rng.flip() ? TurnDir::CCW : TurnDir::CW;
    }
}

namespace {

void update_trackers(StrategyMode& mode, const EffectorState& state,
                     const ContactSummary& summary, Vec2 goal, const EventThresholds& thr) {
    const double ts = summary.timestamp;
    if (ts <= mode.last_summary_time) return;  // sensor runs slower than control

    const double dist = (goal - state.tip_position).norm();
    if (dist < mode.best_distance - thr.progress_quantum ||
        !std::isfinite(mode.best_distance)) {
        mode.best_distance = dist;
        mode.last_progress_time = ts;
    }

    const bool in_band =
        summary.tip_force >= thr.f_push_min && summary.tip_force <= thr.f_push_max;
    if (in_band) {
        if (!mode.push_contact_start) mode.push_contact_start = ts;
    } else {
        mode.push_contact_start.reset();
    }

    mode.progress_window.emplace_back(ts, mode.best_distance);
    while (mode.progress_window.size() >= 2 &&
           mode.progress_window[1].first <= ts - thr.t_prog)
        mode.progress_window.pop_front();

    mode.last_summary_time = ts;
}

}  // namespace

VelocityCmd policy_step(StrategyKind kind, StrategyMode& mode, const EffectorState& state,
                        const ContactSummary& summary, Vec2 goal, double t,
                        const StrategyParams& p, const EventThresholds& thr, Rng& rng) {
    if (!mode.initialized) {
        mode.initialized = true;
        mode.next_trigger = t + p.t_trig;
        mode.last_progress_time = t;
    }
    update_trackers(mode, state, summary, goal, thr);

    auto enter_excavate = [&](TurnDir dir) {
        mode.phase = StrategyMode::Phase::Excavate;
        mode.excavate_dir = dir;
        mode.excavate_start = t;
        ++mode.excavate_count;
        mode.push_contact_start.reset();
        mode.progress_window.clear();
    };
    auto leave_excavate = [&]() {
        mode.phase = StrategyMode::Phase::Travel;
        mode.next_trigger = t + p.t_trig;  // clock interval restarts on completion
        mode.push_contact_start.reset();
        mode.progress_window.clear();
        mode.last_progress_time = t;
        // Stall detection restarts from the post-excavation position; keeping
        // the old best would re-trigger while the effector closes the retreat.
        mode.best_distance = std::numeric_limits<double>::infinity();
        // An excavation implies heavy contact: re-approach burrowing.
        mode.travel_burrow = true;
        mode.last_heavy_contact = t;
    };
    // Excavations retreat before they clear; one started too close to the
    // deadline would strand the tip far from the goal at cutoff.
    const bool may_excavate =
        p.t_deadline <= 0.0 || t + 2.0 * p.t_excv <= p.t_deadline + kTimeEps;
    auto emit_excavate = [&]() {
        const double t_frac = clamp((t - mode.excavate_start) / p.t_excv, 0.0, 1.0);
        mode.last_cmd = StrategyMode::LastCmd::Excavate;
        return excavate_command(state, t_frac, mode.excavate_dir, p);
    };
    auto emit_straight = [&]() {
        mode.last_cmd = StrategyMode::LastCmd::Straight;
        return straight_line_command(state, goal, p);
    };
    auto emit_burrow = [&]() {
        if (mode.last_cmd != StrategyMode::LastCmd::Burrow) ++mode.burrow_episodes;
        mode.last_cmd = StrategyMode::LastCmd::Burrow;
        return burrow_command(state, goal, t, p);
    };

    if (mode.phase == StrategyMode::Phase::Excavate) {
        if (t - mode.excavate_start < p.t_excv - kTimeEps) return emit_excavate();
        leave_excavate();
    }

    switch (kind) {
        case StrategyKind::Straight:
            return emit_straight();
        case StrategyKind::Burrow:
            return emit_burrow();
        case StrategyKind::Excavate:
            if (may_excavate && t >= mode.next_trigger - kTimeEps) {
                enter_excavate(rng.flip() ? TurnDir::CCW : TurnDir::CW);
                return emit_excavate();
            }
            return emit_straight();
        case StrategyKind::HybridClock:
            if (may_excavate && t >= mode.next_trigger - kTimeEps) {
                enter_excavate(rng.flip() ? TurnDir::CCW : TurnDir::CW);
                return emit_excavate();
            }
            return emit_burrow();
        case StrategyKind::HybridEvent: {
            if (may_excavate) {
                if (auto dir = check_push_trigger(mode, thr, mode.last_summary_time, rng)) {
                    enter_excavate(*dir);
                    return emit_excavate();
                }
                if (auto dir = check_jam_trigger(mode, summary, thr, p, rng)) {
                    enter_excavate(*dir);
                    return emit_excavate();
                }
            }
            if (summary.peak_force >= thr.f_bur) {
                mode.travel_burrow = true;
                mode.last_heavy_contact = mode.last_summary_time;
            } else if (mode.travel_burrow &&
                       mode.last_summary_time - mode.last_heavy_contact >
                           thr.burrow_dwell + kTimeEps) {
                mode.travel_burrow = false;
            }
            return mode.travel_burrow ? emit_burrow() : emit_straight();
        }
    }
    throw std::runtime_error("unknown strategy kind");
}

}  // namespace clutter
