#include "cluttersim/physics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace clutter {

namespace {

struct WorldPoly {
    std::vector<Vec2> verts;
    std::vector<Vec2> normals;  // outward edge normals, normals[i] for edge verts[i]->verts[i+1]
};

WorldPoly to_world(const PolygonShape& poly, const Transform2& xf) {
    WorldPoly wp;
    wp.verts.reserve(poly.vertices.size());
    for (Vec2 v : poly.vertices) wp.verts.push_back(xf.apply(v));
    const std::size_t n = wp.verts.size();
    wp.normals.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 edge = wp.verts[(i + 1) % n] - wp.verts[i];
        wp.normals.push_back(Vec2{edge.y, -edge.x}.normalized());
    }
    return wp;
}

struct ManifoldCandidate {
    Vec2 normal;  // from shape A to shape B
    struct {
        Vec2 point;
        double penetration;
    } points[2];
    int count = 0;
};

// Largest separation of B's vertices from A's faces; > 0 means disjoint.
void max_separation(const WorldPoly& a, const WorldPoly& b, double& best_sep, int& best_edge) {
    best_sep = -1e300;
    best_edge = 0;
    for (std::size_t i = 0; i < a.verts.size(); ++i) {
        double min_d = 1e300;
        for (Vec2 v : b.verts) min_d = std::min(min_d, a.normals[i].dot(v - a.verts[i]));
        if (min_d > best_sep) {
            best_sep = min_d;
            best_edge = static_cast<int>(i);
        }
    }
}

struct ClipVertex {
    Vec2 v;
};

int clip_segment(const ClipVertex in[2], ClipVertex out[2], Vec2 normal, double offset) {
    int count = 0;
    const double d0 = normal.dot(in[0].v) - offset;
    const double d1 = normal.dot(in[1].v) - offset;
    if (d0 <= 0.0) out[count++] = in[0];
    if (d1 <= 0.0) out[count++] = in[1];
    if (d0 * d1 < 0.0) {
        const double t = d0 / (d0 - d1);
        out[count].v = in[0].v + (in[1].v - in[0].v) * t;
        ++count;
    }
    return count;
}

bool collide_polys(const WorldPoly& a, const WorldPoly& b, ManifoldCandidate& m) {
    double sep_a, sep_b;
    int edge_a, edge_b;
    max_separation(a, b, sep_a, edge_a);
    if (sep_a > 0.0) return false;
    max_separation(b, a, sep_b, edge_b);
    if (sep_b > 0.0) return false;

    const WorldPoly* ref;
    const WorldPoly* inc;
    int ref_edge;
    bool flip;
    if (sep_b > sep_a + 1e-10) {
        ref = &b;
        inc = &a;
        ref_edge = edge_b;
        flip = true;
    } else {
        ref = &a;
        inc = &b;
        ref_edge = edge_a;
        flip = false;
    }

    const Vec2 ref_normal = ref->normals[ref_edge];
    // Incident edge: most anti-parallel face on the other polygon.
    int inc_edge = 0;
    double min_dot = 1e300;
    for (std::size_t i = 0; i < inc->verts.size(); ++i) {
        const double d = ref_normal.dot(inc->normals[i]);
        if (d < min_dot) {
            min_dot = d;
            inc_edge = static_cast<int>(i);
        }
    }

    const std::size_t ni = inc->verts.size();
    ClipVertex incident[2] = {{inc->verts[inc_edge]}, {inc->verts[(inc_edge + 1) % ni]}};

    const Vec2 v1 = ref->verts[ref_edge];
    const Vec2 v2 = ref->verts[(ref_edge + 1) % ref->verts.size()];
    const Vec2 tangent = (v2 - v1).normalized();

    ClipVertex clipped1[2], clipped2[2];
    if (clip_segment(incident, clipped1, -tangent, -tangent.dot(v1)) < 2) return false;
    if (clip_segment(clipped1, clipped2, tangent, tangent.dot(v2)) < 2) return false;

    m.count = 0;
    for (int i = 0; i < 2; ++i) {
        const double sep = ref_normal.dot(clipped2[i].v - v1);
        if (sep <= 0.0) {
            m.points[m.count].point = clipped2[i].v;
            m.points[m.count].penetration = -sep;
            ++m.count;
        }
    }
    if (m.count == 0) return false;
    m.normal = flip ? -ref_normal : ref_normal;
    return true;
}

// Circle B against polygon A.
bool collide_poly_circle(const WorldPoly& a, Vec2 center, double radius, ManifoldCandidate& m) {
    double best_sep = -1e300;
    int best_edge = 0;
    for (std::size_t i = 0; i < a.verts.size(); ++i) {
        const double d = a.normals[i].dot(center - a.verts[i]);
        if (d > radius) return false;
        if (d > best_sep) {
            best_sep = d;
            best_edge = static_cast<int>(i);
        }
    }

    const Vec2 v1 = a.verts[best_edge];
    const Vec2 v2 = a.verts[(best_edge + 1) % a.verts.size()];

    Vec2 normal;
    Vec2 point;
    double penetration;
    if (best_sep < 1e-12) {
        // Center inside (or on) the polygon: push out along the deepest face.
        normal = a.normals[best_edge];
        penetration = radius - best_sep;
        point = center - normal * best_sep;
    } else {
        const Vec2 edge = v2 - v1;
        const double t = clamp((center - v1).dot(edge) / edge.norm_sq(), 0.0, 1.0);
        const Vec2 closest = v1 + edge * t;
        const Vec2 d = center - closest;
        const double dist_sq = d.norm_sq();
        if (dist_sq > radius * radius) return false;
        const double dist = std::sqrt(dist_sq);
        normal = dist > 1e-12 ? d / dist : a.normals[best_edge];
        penetration = radius - dist;
        point = closest;
    }
    m.normal = normal;  // A -> B (toward the circle)
    m.points[0].point = point;
    m.points[0].penetration = penetration;
    m.count = 1;
    return true;
}

bool collide_circles(Vec2 ca, double ra, Vec2 cb, double rb, ManifoldCandidate& m) {
    const Vec2 d = cb - ca;
    const double dist_sq = d.norm_sq();
    const double r = ra + rb;
    if (dist_sq > r * r) return false;
    const double dist = std::sqrt(dist_sq);
    m.normal = dist > 1e-12 ? d / dist : Vec2{1.0, 0.0};
    m.points[0].point = ca + m.normal * ra;
    m.points[0].penetration = r - dist;
    m.count = 1;
    return true;
}

struct Aabb {
    Vec2 lo{1e300, 1e300};
    Vec2 hi{-1e300, -1e300};
    void grow(Vec2 p) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    bool overlaps(const Aabb& o) const {
        return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y;
    }
};

Aabb body_aabb(const Body& body) {
    Aabb box;
    const Transform2 xf = body.transform();
    for (const auto& shape : body.shapes) {
        if (const auto* poly = std::get_if<PolygonShape>(&shape)) {
            for (Vec2 v : poly->vertices) box.grow(xf.apply(v));
        } else {
            const auto& c = std::get<CircleShape>(shape);
            const Vec2 center = xf.apply(c.center);
            box.grow(center - Vec2{c.radius, c.radius});
            box.grow(center + Vec2{c.radius, c.radius});
        }
    }
    return box;
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

World::World(const PhysicsConfig& config) : config_(config) {}

int World::add_body(Body body) {
    body.id = static_cast<int>(bodies_.size());
    if (body.kind == BodyKind::Wall) {
        body.inv_mass = 0.0;
        body.inv_moment = 0.0;
        body.mass = 0.0;
        body.moment = 0.0;
    } else {
        if (body.mass <= 0.0) throw PhysicsError("movable body must have positive mass");
        body.inv_mass = 1.0 / body.mass;
        body.inv_moment = body.moment > 0.0 ? 1.0 / body.moment : 0.0;
    }
    bodies_.push_back(std::move(body));
    pushed_out_flag_.push_back(false);
    return bodies_.back().id;
}

int World::add_wall(Vec2 center, double width, double height) {
    Body b;
    b.kind = BodyKind::Wall;
    b.position = center;
    b.floor_friction = config_.mu_floor;
    b.body_friction = config_.mu_body;
    const double hw = 0.5 * width, hh = 0.5 * height;
    b.shapes.push_back(PolygonShape{{{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}}});
    return add_body(std::move(b));
}

int World::add_object(Vec2 center, double width, double height, double mass, double yaw) {
    Body b;
    b.kind = BodyKind::Object;
    b.position = center;
    b.angle = yaw;
    b.mass = mass;
    b.moment = mass * (width * width + height * height) / 12.0;
    b.floor_friction = config_.mu_floor;
    b.body_friction = config_.mu_body;
    const double hw = 0.5 * width, hh = 0.5 * height;
    b.shapes.push_back(PolygonShape{{{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}}});
    return add_body(std::move(b));
}

int World::add_effector(Vec2 tip_position, double angle) {
    if (effector_id_ >= 0) throw PhysicsError("world already has an effector");
    const double length = config_.effector_length;
    const double hw = 0.5 * config_.effector_width;
    const double r = hw;

    Body b;
    b.kind = BodyKind::Effector;
    b.mass = config_.effector_mass;
    b.moment = b.mass * (config_.effector_width * config_.effector_width + length * length) / 12.0;
    b.body_friction = config_.mu_body;
    b.floor_friction = 0.0;  // carried by the arm, not resting on the floor

    // COM frame: tip at (0, L/2), base at (0, -L/2); link along local +y.
    const double half = 0.5 * length;
    effector_tip_local_ = {0.0, half};
    effector_base_local_ = {0.0, -half};
    b.shapes.push_back(PolygonShape{{{-hw, -half}, {hw, -half}, {hw, half - r}, {-hw, half - r}}});
    b.shapes.push_back(CircleShape{{0.0, half - r}, r});

    b.angle = angle;
    b.position = tip_position - Rot2(angle).apply(effector_tip_local_);

    const int id = add_body(std::move(b));
    effector_id_ = id;
    return id;
}

World World::create(const SceneSpec& scene, const PhysicsConfig& config) {
    World w(config);
    w.bounds_ = scene.bounds;

    std::string why;
    if (!scene_is_valid(scene, 0.0, &why))
        throw PhysicsError("invalid scene: " + why);

    const double t = config.wall_thickness;
    const double d = scene.bounds.depth;
    const double half_w = 0.5 * scene.bounds.width;
    const double lip = 0.02;  // side walls reach slightly past the open front
    const double side_h = d + t + lip;
    const double side_cy = 0.5 * (d + t - lip);
    w.add_wall({-half_w - 0.5 * t, side_cy}, t, side_h);
    w.add_wall({half_w + 0.5 * t, side_cy}, t, side_h);
    w.add_wall({0.0, d + 0.5 * t}, scene.bounds.width + 2.0 * t, t);

    for (const auto& obj : scene.objects)
        w.add_object(obj.position, obj.width, obj.height, obj.mass, obj.yaw);

    const double tip_y = -config.effector_start_clearance;
    w.add_effector({scene.start_x, tip_y}, 0.0);
    return w;
}

const Body& World::body(int id) const {
    if (id < 0 || id >= static_cast<int>(bodies_.size()))
        throw PhysicsError("unknown body id " + std::to_string(id));
    return bodies_[id];
}

Body& World::mutable_body(int id) {
    return const_cast<Body&>(static_cast<const World*>(this)->body(id));
}

Vec2 World::effector_tip() const {
    const Body& e = body(effector_id_);
    return e.transform().apply(effector_tip_local_);
}

Vec2 World::effector_base() const {
    const Body& e = body(effector_id_);
    return e.transform().apply(effector_base_local_);
}

Vec2 World::effector_tip_velocity() const {
    const Body& e = body(effector_id_);
    return e.velocity + cross(e.angular_velocity, effector_tip() - e.position);
}

void World::apply_effector_drive() {
    if (!drive_.active || effector_id_ < 0) return;
    Body& e = bodies_[effector_id_];
    const Vec2 r_tip = e.transform().apply(effector_tip_local_) - e.position;
    e.angular_velocity = drive_.angular_velocity;
    e.velocity = drive_.tip_velocity - cross(e.angular_velocity, r_tip);
}

void World::apply_floor_friction() {
    const double g = config_.gravity;
    for (Body& b : bodies_) {
        if (b.kind != BodyKind::Object) continue;
        const double dv = b.floor_friction * g * config_.dt;
        const double speed = b.velocity.norm();
        if (speed <= dv)
            b.velocity = {0.0, 0.0};
        else
            b.velocity -= b.velocity * (dv / speed);
        const double r_gyr = std::sqrt(b.moment * b.inv_mass);
        if (r_gyr > 0.0) {
            const double dw = dv / r_gyr;
            if (std::abs(b.angular_velocity) <= dw)
                b.angular_velocity = 0.0;
            else
                b.angular_velocity -= dw * (b.angular_velocity > 0.0 ? 1.0 : -1.0);
        }
    }
}

void World::detect_collisions() {
    manifolds_.clear();
    max_penetration_ = 0.0;

    const std::size_t n = bodies_.size();
    std::vector<Aabb> boxes(n);
    for (std::size_t i = 0; i < n; ++i) boxes[i] = body_aabb(bodies_[i]);

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            Body& a = bodies_[i];
            Body& b = bodies_[j];
            if (!a.movable() && !b.movable()) continue;
            if (!boxes[i].overlaps(boxes[j])) continue;

            const Transform2 xfa = a.transform();
            const Transform2 xfb = b.transform();
            for (const auto& sa : a.shapes) {
                for (const auto& sb : b.shapes) {
                    ManifoldCandidate cand;
                    bool hit = false;
                    const auto* pa = std::get_if<PolygonShape>(&sa);
                    const auto* pb = std::get_if<PolygonShape>(&sb);
                    if (pa && pb) {
                        hit = collide_polys(to_world(*pa, xfa), to_world(*pb, xfb), cand);
                    } else if (pa && !pb) {
                        const auto& cb = std::get<CircleShape>(sb);
                        hit = collide_poly_circle(to_world(*pa, xfa), xfb.apply(cb.center),
                                                  cb.radius, cand);
                    } else if (!pa && pb) {
                        const auto& ca = std::get<CircleShape>(sa);
                        hit = collide_poly_circle(to_world(*pb, xfb), xfa.apply(ca.center),
                                                  ca.radius, cand);
                        if (hit) cand.normal = -cand.normal;  // keep a -> b
                    } else {
                        const auto& ca = std::get<CircleShape>(sa);
                        const auto& cb = std::get<CircleShape>(sb);
                        hit = collide_circles(xfa.apply(ca.center), ca.radius,
                                              xfb.apply(cb.center), cb.radius, cand);
                    }
                    if (!hit) continue;

                    Manifold m;
                    m.body_a = a.id;
                    m.body_b = b.id;
                    m.normal = cand.normal;
                    m.friction = std::sqrt(a.body_friction * b.body_friction);
                    for (int k = 0; k < cand.count; ++k) {
                        ContactPoint& cp = m.points[m.count++];
                        cp.point = cand.points[k].point;
                        cp.penetration = cand.points[k].penetration;
                        max_penetration_ = std::max(max_penetration_, cp.penetration);
                    }
                    manifolds_.push_back(m);
                }
            }
        }
    }
    max_penetration_ever_ = std::max(max_penetration_ever_, max_penetration_);
}

void World::solve_velocity_constraints() {
    const double inv_dt = 1.0 / config_.dt;

    for (Manifold& m : manifolds_) {
        const Body& a = bodies_[m.body_a];
        const Body& b = bodies_[m.body_b];
        const Vec2 n = m.normal;
        const Vec2 t{n.y, -n.x};
        for (int k = 0; k < m.count; ++k) {
            ContactPoint& cp = m.points[k];
            cp.r_a = cp.point - a.position;
            cp.r_b = cp.point - b.position;
            const double rna = cp.r_a.cross(n);
            const double rnb = cp.r_b.cross(n);
            const double kn = a.inv_mass + b.inv_mass + a.inv_moment * rna * rna +
                              b.inv_moment * rnb * rnb;
            cp.normal_mass = kn > 0.0 ? 1.0 / kn : 0.0;
            const double rta = cp.r_a.cross(t);
            const double rtb = cp.r_b.cross(t);
            const double kt = a.inv_mass + b.inv_mass + a.inv_moment * rta * rta +
                              b.inv_moment * rtb * rtb;
            cp.tangent_mass = kt > 0.0 ? 1.0 / kt : 0.0;
            cp.bias = std::min(config_.max_correction_velocity,
                               config_.baumgarte * inv_dt *
                                   std::max(cp.penetration - config_.slop, 0.0));
        }
    }

    for (int iter = 0; iter < config_.velocity_iterations; ++iter) {
        for (Manifold& m : manifolds_) {
            Body& a = bodies_[m.body_a];
            Body& b = bodies_[m.body_b];
            const Vec2 n = m.normal;
            const Vec2 t{n.y, -n.x};

            // Friction first, clamped by the running normal impulse.
            for (int k = 0; k < m.count; ++k) {
                ContactPoint& cp = m.points[k];
                const Vec2 dv = b.velocity + cross(b.angular_velocity, cp.r_b) - a.velocity -
                                cross(a.angular_velocity, cp.r_a);
                const double vt = dv.dot(t);
                double lambda = -cp.tangent_mass * vt;
                const double max_f = m.friction * cp.acc_normal;
                const double new_imp = clamp(cp.acc_tangent + lambda, -max_f, max_f);
                lambda = new_imp - cp.acc_tangent;
                cp.acc_tangent = new_imp;

                const Vec2 p = t * lambda;
                a.velocity -= p * a.inv_mass;
                a.angular_velocity -= a.inv_moment * cp.r_a.cross(p);
                b.velocity += p * b.inv_mass;
                b.angular_velocity += b.inv_moment * cp.r_b.cross(p);
            }

            for (int k = 0; k < m.count; ++k) {
                ContactPoint& cp = m.points[k];
                const Vec2 dv = b.velocity + cross(b.angular_velocity, cp.r_b) - a.velocity -
                                cross(a.angular_velocity, cp.r_a);
                const double vn = dv.dot(n);
                double lambda = -cp.normal_mass * (vn - cp.bias);
                const double new_imp = std::max(cp.acc_normal + lambda, 0.0);
                lambda = new_imp - cp.acc_normal;
                cp.acc_normal = new_imp;

                const Vec2 p = n * lambda;
                a.velocity -= p * a.inv_mass;
                a.angular_velocity -= a.inv_moment * cp.r_a.cross(p);
                b.velocity += p * b.inv_mass;
                b.angular_velocity += b.inv_moment * cp.r_b.cross(p);
            }
        }
    }

    // The tangent clamp above runs against the normal impulse of the previous
    // iteration, so the last normal solve can leave |tangent| marginally past
    // the cone. Re-clamp once against the final normal impulses.
    for (Manifold& m : manifolds_) {
        Body& a = bodies_[m.body_a];
        Body& b = bodies_[m.body_b];
        const Vec2 n = m.normal;
        const Vec2 t{n.y, -n.x};
        for (int k = 0; k < m.count; ++k) {
            ContactPoint& cp = m.points[k];
            const double max_f = m.friction * cp.acc_normal;
            const double clamped = clamp(cp.acc_tangent, -max_f, max_f);
            const double lambda = clamped - cp.acc_tangent;
            if (lambda == 0.0) continue;
            cp.acc_tangent = clamped;
            const Vec2 p = t * lambda;
            a.velocity -= p * a.inv_mass;
            a.angular_velocity -= a.inv_moment * cp.r_a.cross(p);
            b.velocity += p * b.inv_mass;
            b.angular_velocity += b.inv_moment * cp.r_b.cross(p);
        }
    }
}

void World::integrate() {
    for (Body& b : bodies_) {
        if (!b.movable()) continue;
        b.position += b.velocity * config_.dt;
        b.angle = wrap_angle(b.angle + b.angular_velocity * config_.dt);
    }
    time_ += config_.dt;
}

void World::post_step_checks() {
    const double inv_dt = 1.0 / config_.dt;

    contacts_.clear();
    wrench_ = {};
    const Vec2 base = effector_id_ >= 0 ? effector_base() : Vec2{};
    for (const Manifold& m : manifolds_) {
        const Vec2 n = m.normal;
        const Vec2 t{n.y, -n.x};
        for (int k = 0; k < m.count; ++k) {
            const ContactPoint& cp = m.points[k];
            Contact c;
            c.body_a = m.body_a;
            c.body_b = m.body_b;
            c.point = cp.point;
            c.normal = n;
            c.penetration = cp.penetration;
            c.normal_force = cp.acc_normal * inv_dt;
            c.tangent_force = cp.acc_tangent * inv_dt;
            contacts_.push_back(c);

            if (effector_id_ >= 0 && (m.body_a == effector_id_ || m.body_b == effector_id_)) {
                const double sign = m.body_b == effector_id_ ? 1.0 : -1.0;
                const Vec2 f = (n * c.normal_force + t * c.tangent_force) * sign;
                wrench_.fx += f.x;
                wrench_.fy += f.y;
                wrench_.mz += (cp.point - base).cross(f);
            }
        }
    }

    for (Body& b : bodies_) {
        if (b.kind == BodyKind::Object && !pushed_out_flag_[b.id] && b.position.y < 0.0) {
            pushed_out_flag_[b.id] = true;
            pushed_out_.push_back(b.id);
        }
        if (!finite(b.position.x) || !finite(b.position.y) || !finite(b.angle) ||
            !finite(b.velocity.x) || !finite(b.velocity.y) || !finite(b.angular_velocity))
            faulted_ = true;
    }
    if (max_penetration_ > config_.fault_penetration_factor * config_.penetration_tolerance)
        faulted_ = true;
}

void World::step() {
    apply_effector_drive();
    apply_floor_friction();
    detect_collisions();
    solve_velocity_constraints();
    integrate();
    post_step_checks();
}

std::vector<Contact> World::contacts_on_body(int id) const {
    (void)body(id);  // validates
    std::vector<Contact> out;
    for (const Contact& c : contacts_)
        if (c.body_a == id || c.body_b == id) out.push_back(c);
    return out;
}

std::uint64_t World::state_hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffULL;
            h *= 1099511628211ULL;
        }
    };
    for (const Body& b : bodies_) {
        mix(b.position.x);
        mix(b.position.y);
        mix(b.angle);
        mix(b.velocity.x);
        mix(b.velocity.y);
        mix(b.angular_velocity);
    }
    mix(time_);
    return h;
}

}  // namespace clutter
