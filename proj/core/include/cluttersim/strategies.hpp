#pragma once

#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "cluttersim/effector.hpp"
#include "cluttersim/rng.hpp"

namespace clutter {

enum class StrategyKind { Straight, Burrow, Excavate, HybridClock, HybridEvent };

const char* to_string(StrategyKind kind);
StrategyKind strategy_from_string(const std::string& name);

struct StrategyParams {
    double v_max = 0.045;      // m/s
    double omega_max = 0.1;    // rad/s
    double a_bur = 0.83;       // lateral amplitude ratio, [0, 1)
    double f_bur = 1.0;        // burrow frequency
    bool f_bur_in_rad = false; // false: sinusoid arg 2*pi*f*t (f in Hz); true: f*t (rad/s)
    double t_excv = 5.0;       // s, excavate duration
    double t_trig = 5.0;       // s, clock interval between excavates
    double s_excv = 2.0;       // radius growth ratio, >= 1
    double t_deadline = 0.0;   // s; no excavation starts after t_deadline - 2*t_excv (0 = off)
    double theta_deadband = 0.02;  // rad, heading error below which omega = 0
    double effector_length = 0.30; // L in the excavate velocity coupling
};

struct EventThresholds {
    double f_bur = 5.0;        // N, burrow-on-contact threshold
    double f_excv = 10.0;      // N, jam force threshold
    double f_push_min = 0.5;   // N, push band lower edge
    double f_push_max = 7.5;   // N, push band upper edge
    double t_push = 2.0;       // s, sustained push duration
    double t_prog = 3.0;       // s, stall observation window
    double stall_fraction = 0.25;   // required progress over the window as a
                                    // fraction of v_max * t_prog
    double progress_quantum = 0.005;  // m, smallest improvement that counts
    double burrow_dwell = 1.0;  // s below f_bur before dropping back to straight;
                                // the weave sheds contact every half cycle, so a
                                // plain threshold chatters
};

enum class TurnDir { CCW, CW };
const char* to_string(TurnDir dir);

// Per-trial controller state. Travel mode picks a command every tick;
// excavate mode locks until t_excv has elapsed.
struct StrategyMode {
    enum class Phase { Travel, Excavate };
    enum class LastCmd { None, Straight, Burrow, Excavate };

    Phase phase = Phase::Travel;
    TurnDir excavate_dir = TurnDir::CCW;
    double excavate_start = 0.0;
    double next_trigger = 0.0;  // absolute time of the next clock-driven excavate
    bool initialized = false;

    double best_distance = std::numeric_limits<double>::infinity();
    double last_progress_time = 0.0;
    std::optional<double> push_contact_start;
    double last_summary_time = -1.0;
    // (timestamp, best_distance) samples spanning at least t_prog.
    std::deque<std::pair<double, double>> progress_window;

    bool travel_burrow = false;          // latched straight/burrow selection
    double last_heavy_contact = -1.0;    // last summary time with peak >= f_bur

    LastCmd last_cmd = LastCmd::None;
    int excavate_count = 0;
    int burrow_episodes = 0;
};

// Full speed along tip->goal; bang-bang heading with a deadband.
// phi is the goal bearing measured from +y toward +x, like theta.
VelocityCmd straight_line_command(const EffectorState& state, Vec2 goal,
                                  const StrategyParams& params);

// Renormalized superposition of the straight-line velocity and a
// perpendicular sinusoid with amplitude ratio a_bur / (1 - a_bur).
VelocityCmd burrow_command(const EffectorState& state, Vec2 goal, double t,
                           const StrategyParams& params);

// Scooping spiral evaluated at normalized phase t_frac in [0, 1]: retreat,
// sweep, re-advance while the link turns. CW mirrors the body-frame x
// velocity and the angular velocity.
VelocityCmd excavate_command(const EffectorState& state, double t_frac, TurnDir dir,
                             const StrategyParams& params);

// Fires after tip_force has stayed within [f_push_min, f_push_max] for
// t_push; the direction is a seeded coin flip (a tip contact has no side).
std::optional<TurnDir> check_push_trigger(const StrategyMode& mode,
                                          const EventThresholds& thresholds, double t,
                                          Rng& rng);

// Fires when the best distance to goal has improved by less than
// stall_fraction * v_max * t_prog over the last t_prog seconds AND the peak
// contact force is at least f_excv. Peak on the left face -> CCW, right ->
// CW, tip -> seeded coin flip.
std::optional<TurnDir> check_jam_trigger(const StrategyMode& mode,
                                         const ContactSummary& summary,
                                         const EventThresholds& thresholds,
                                         const StrategyParams& params, Rng& rng);

// One control tick: updates trigger bookkeeping from the latest summary
// (deduplicated by timestamp), runs the mode machine for the given strategy,
// and returns the raw command (before wrench backoff and goal taper).
VelocityCmd policy_step(StrategyKind kind, StrategyMode& mode, const EffectorState& state,
                        const ContactSummary& summary, Vec2 goal, double t,
                        const StrategyParams& params, const EventThresholds& thresholds,
                        Rng& rng);

}  // namespace clutter
