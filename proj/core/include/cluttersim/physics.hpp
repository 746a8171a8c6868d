#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cluttersim/scene.hpp"
#include "cluttersim/vec2.hpp"

namespace clutter {

struct PhysicsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class BodyKind { Wall, Object, Effector };

// Convex polygon in body-local coordinates, counter-clockwise winding.
struct PolygonShape {
    std::vector<Vec2> vertices;
};

struct CircleShape {
    Vec2 center;
    double radius = 0.0;
};

using Shape = std::variant<PolygonShape, CircleShape>;

struct Body {
    int id = -1;
    BodyKind kind = BodyKind::Object;
    std::vector<Shape> shapes;
    Vec2 position;                 // center of mass
    double angle = 0.0;            // counter-clockwise, radians
    Vec2 velocity;
    double angular_velocity = 0.0; // counter-clockwise positive
    double mass = 0.0;
    double inv_mass = 0.0;
    double moment = 0.0;
    double inv_moment = 0.0;
    double floor_friction = 0.3;
    double body_friction = 0.5;

    Transform2 transform() const { return {position, angle}; }
    bool movable() const { return kind != BodyKind::Wall; }
};

// Resolved contact from the last completed step. Forces are the solver's
// accumulated impulses divided by dt. The tangent direction is the normal
// rotated -90 degrees, i.e. t = (n.y, -n.x); the force applied to body_b is
// normal_force * n + tangent_force * t, and the opposite on body_a.
struct Contact {
    int body_a = -1;
    int body_b = -1;
    Vec2 point;
    Vec2 normal;             // unit, from a to b
    double penetration = 0.0;
    double normal_force = 0.0;
    double tangent_force = 0.0;
};

struct PhysicsConfig {
    double dt = 1.0 / 240.0;
    int velocity_iterations = 20;
    double mu_floor = 0.3;
    double mu_body = 0.5;
    double gravity = 9.81;
    double baumgarte = 0.2;
    double slop = 2e-4;                      // allowed resting overlap, m
    double max_correction_velocity = 0.5;    // cap on Baumgarte bias, m/s
    double penetration_tolerance = 1e-3;     // trial-level bound, m
    double fault_penetration_factor = 5.0;   // exceeding tol * factor faults the world
    double wall_thickness = 0.02;

    double effector_length = 0.30;           // L, tip to base
    double effector_width = 0.03;
    double effector_mass = 4.0;
    double effector_start_clearance = 1e-3;  // gap between tip and the front plane
};

// World-frame velocity command applied to the effector each step: the tip
// tracks `tip_velocity` and the link spins at `angular_velocity`
// (counter-clockwise positive, standard math convention).
struct EffectorDrive {
    Vec2 tip_velocity;
    double angular_velocity = 0.0;
    bool active = false;
};

// Net contact wrench on the effector over the last step. Force in world
// frame; torque is taken about the link base (the end opposite the tip).
struct EffectorWrench {
    double fx = 0.0;
    double fy = 0.0;
    double mz = 0.0;
};

// Fixed-timestep planar rigid-body world. Deterministic: stepping the same
// initial state with the same command sequence reproduces bit-identical
// trajectories.
class World {
public:
    explicit World(const PhysicsConfig& config);

    // Three walls (left, right, back; open front), the scene objects at rest,
    // and the effector just outside the front at the scene's start_x.
    // Throws PhysicsError naming the offending pair on overlapping objects.
    static World create(const SceneSpec& scene, const PhysicsConfig& config);

    int add_wall(Vec2 center, double width, double height);
    int add_object(Vec2 center, double width, double height, double mass, double yaw = 0.0);
    // Finger-like effector: rectangular link with a circular tip cap. The tip
    // points along the body's local +y axis; `angle` is standard CCW.
    int add_effector(Vec2 tip_position, double angle);

    void set_effector_drive(const EffectorDrive& drive) { drive_ = drive; }
    void step();

    const std::vector<Body>& bodies() const { return bodies_; }
    const Body& body(int id) const;
    Body& mutable_body(int id);
    bool has_effector() const { return effector_id_ >= 0; }
    int effector_id() const { return effector_id_; }

    const std::vector<Contact>& contacts() const { return contacts_; }
    std::vector<Contact> contacts_on_body(int id) const;

    Vec2 effector_tip() const;
    Vec2 effector_base() const;
    // Actual world velocity of the tip point after the last step.
    Vec2 effector_tip_velocity() const;
    EffectorWrench effector_wrench() const { return wrench_; }

    double time() const { return time_; }
    double dt() const { return config_.dt; }
    const PhysicsConfig& config() const { return config_; }
    const SceneBounds& bounds() const { return bounds_; }
    void set_bounds(const SceneBounds& b) { bounds_ = b; }

    bool faulted() const { return faulted_; }
    double max_penetration_last_step() const { return max_penetration_; }
    double max_penetration_ever() const { return max_penetration_ever_; }

    // Objects whose centroid has crossed the open front (y < 0) at least once.
    int pushed_out_count() const { return static_cast<int>(pushed_out_.size()); }
    const std::vector<int>& pushed_out_ids() const { return pushed_out_; }

    // FNV-1a over all body states and the clock; for determinism checks.
    std::uint64_t state_hash() const;

private:
    int add_body(Body body);
    void apply_floor_friction();
    void apply_effector_drive();
    void detect_collisions();
    void solve_velocity_constraints();
    void integrate();
    void post_step_checks();

    struct ContactPoint {
        Vec2 point;
        Vec2 r_a, r_b;
        double penetration = 0.0;
        double normal_mass = 0.0;
        double tangent_mass = 0.0;
        double bias = 0.0;
        double acc_normal = 0.0;
        double acc_tangent = 0.0;
    };
    struct Manifold {
        int body_a = -1;
        int body_b = -1;
        Vec2 normal;
        double friction = 0.0;
        ContactPoint points[2];
        int count = 0;
    };

    PhysicsConfig config_;
    SceneBounds bounds_;
    std::vector<Body> bodies_;
    std::vector<Manifold> manifolds_;
    std::vector<Contact> contacts_;
    EffectorDrive drive_;
    EffectorWrench wrench_;
    int effector_id_ = -1;
    Vec2 effector_tip_local_;
    Vec2 effector_base_local_;
    double time_ = 0.0;
    double max_penetration_ = 0.0;
    double max_penetration_ever_ = 0.0;
    bool faulted_ = false;
    std::vector<int> pushed_out_;
    std::vector<bool> pushed_out_flag_;
};

}  // namespace clutter
