#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cluttersim/physics.hpp"
#include "cluttersim/rng.hpp"
#include "cluttersim/vec2.hpp"

namespace clutter {

// Control command. Linear velocity is in world coordinates; `angular` is the
// rate of the heading angle theta, where theta is measured from the +y axis
// toward +x (so positive angular turns the tip toward +x). Note this is the
// opposite sign of the physics engine's counter-clockwise angular velocity;
// to_effector_drive() converts.
struct VelocityCmd {
    Vec2 linear;
    double angular = 0.0;
};

EffectorDrive to_effector_drive(const VelocityCmd& cmd);

// Snapshot of the effector as the controller sees it. theta follows the
// heading convention above, normalized to (-pi, pi].
struct EffectorState {
    Vec2 tip_position;
    double theta = 0.0;
    double length = 0.30;
    Vec2 linear_velocity;          // of the tip, world frame
    double angular_velocity = 0.0; // d(theta)/dt
    EffectorWrench net_wrench;     // world frame; mz counter-clockwise
};

EffectorState effector_state_from(const World& world);

struct WrenchLimits {
    double f_max = 15.0;  // N, per force axis
    double m_max = 4.5;   // N*m
};

// Per-axis proportional backoff against the wrench limits, then a linear
// speed taper near the goal (down to taper_floor at the goal itself).
// Never increases any component magnitude.
VelocityCmd apply_command(const VelocityCmd& cmd, const EffectorWrench& wrench,
                          const WrenchLimits& limits, double distance_to_goal,
                          double taper_radius, double taper_floor = 0.2);

// Persistent per-axis backoff scales. The wrench produced by the velocity
// drive is proportional to the commanded speed, so a stateless rescale of the
// full command oscillates between limit-respecting and saturated ticks; the
// governor instead decreases the scale multiplicatively on violation and
// recovers it gently, converging to the limit without force spikes.
struct BackoffState {
    double sx = 1.0;
    double sy = 1.0;
    double sw = 1.0;
};

VelocityCmd govern_command(const VelocityCmd& cmd, const EffectorWrench& wrench,
                           const WrenchLimits& limits, BackoffState& backoff,
                           double distance_to_goal, double taper_radius,
                           double taper_floor = 0.2, double recovery = 1.15);

enum class Side { Left, Right };
enum class Region { Left, Right, Tip };

const char* to_string(Side side);
const char* to_string(Region region);

// One tactile element. fx is along the link (positive toward the tip),
// fy lateral (positive toward the link's local +x face), fz out of plane.
struct Taxel {
    double fx = 0.0;
    double fy = 0.0;
    double fz = 0.0;
    double magnitude() const { return std::sqrt(fx * fx + fy * fy + fz * fz); }
};

// rows x cols array on one face of the link. Column 0 sits at the tip end;
// column centers are at (col + 0.5) * pitch from the tip, pitch = L / cols.
struct TaxelGrid {
    Side side = Side::Left;
    int rows = 0;
    int cols = 0;
    std::vector<Taxel> taxels;  // row-major
    double timestamp = 0.0;

    Taxel& at(int r, int c) { return taxels[static_cast<std::size_t>(r) * cols + c]; }
    const Taxel& at(int r, int c) const {
        return taxels[static_cast<std::size_t>(r) * cols + c];
    }
};

struct SensorConfig {
    int rows = 4;
    int cols = 10;
    // Width of the deposition footprint, in taxel pitches. Contacts are
    // snapped to the nearest taxel and spread with a Gaussian of this sigma,
    // normalized so the grid gains exactly the contact force.
    double footprint_sigma = 0.4;
    double noise_sigma = 0.005;      // N, white noise per component
    double bulk_amplitude = 0.2;     // N, orientation-dependent plane strength
    double tip_band = 0.15;          // fraction of L treated as "tip"
    double sensor_rate = 15.0;       // Hz
    double compensation_rate = 3.0;  // Hz, RANSAC refit cadence
    int ransac_iterations = 100;
    double ransac_threshold = 0.2;   // N, inlier residual bound
};

// Project the last step's contacts on the effector onto both taxel arrays,
// then add the synthetic orientation-dependent bulk plane and white noise.
std::pair<TaxelGrid, TaxelGrid> sample_taxels(const World& world, const SensorConfig& config,
                                              Rng& rng, double time);

struct Plane {
    double a = 0.0;  // per column step
    double b = 0.0;  // per row step
    double c = 0.0;
    bool degenerate = false;  // fell back to least squares on all points
    double operator()(int row, int col) const { return a * col + b * row + c; }
};

// RANSAC plane fit over (col, row, value) samples; least-squares refit on the
// best inlier set. Falls back to a least-squares fit over all points (with
// the degenerate flag) when no valid minimal sample is found.
Plane ransac_fit_plane(const std::vector<double>& values, int rows, int cols,
                       int iterations, double inlier_threshold, Rng& rng);

// Fit and subtract a plane per force component. Localized contact signals
// survive as outliers; smooth backgrounds are removed.
TaxelGrid ransac_plane_compensate(const TaxelGrid& grid, const SensorConfig& config, Rng& rng);

struct ContactSummary {
    double peak_force = 0.0;           // N, max per-taxel magnitude
    Region peak_region = Region::Tip;
    double peak_location = 0.0;        // m from the tip along the link
    double tip_force = 0.0;            // N, max magnitude within the tip band
    double timestamp = 0.0;
};

ContactSummary summarize_contacts(const TaxelGrid& left, const TaxelGrid& right,
                                  double link_length, double tip_band);

// Sensor-rate sampling with cached plane compensation: planes are refit every
// (sensor_rate / compensation_rate) samples and subtracted from every sample
// in between.
class TactilePipeline {
public:
    explicit TactilePipeline(const SensorConfig& config) : config_(config) {}

    ContactSummary process(const World& world, double time, Rng& rng);

    const TaxelGrid& left() const { return left_; }
    const TaxelGrid& right() const { return right_; }
    const SensorConfig& config() const { return config_; }

private:
    SensorConfig config_;
    TaxelGrid left_, right_;
    Plane planes_[2][3];
    bool have_planes_ = false;
    long sample_count_ = 0;
};

// One line of the optional tactile log (newline-delimited JSON).
std::string contact_summary_to_json(const ContactSummary& summary);

}  // namespace clutter
