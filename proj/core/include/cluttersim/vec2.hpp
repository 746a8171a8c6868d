#pragma once

#include <cmath>

namespace clutter {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
    // z-component of the 3D cross product (this x o).
    constexpr double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::sqrt(x * x + y * y); }
    constexpr double norm_sq() const { return x * x + y * y; }

    Vec2 normalized() const {
        double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
    // Rotate 90 degrees counter-clockwise.
    constexpr Vec2 perp_ccw() const { return {-y, x}; }
    // Rotate 90 degrees clockwise.
    constexpr Vec2 perp_cw() const { return {y, -x}; }
};

constexpr Vec2 operator*(double s, Vec2 v) { return {v.x * s, v.y * s}; }

// Scalar-vector cross products (omega treated as z-axis vector).
constexpr Vec2 cross(double w, Vec2 v) { return {-w * v.y, w * v.x}; }

// 2D rotation, counter-clockwise positive (standard math convention).
struct Rot2 {
    double c = 1.0;
    double s = 0.0;

    Rot2() = default;
    explicit Rot2(double angle) : c(std::cos(angle)), s(std::sin(angle)) {}

    constexpr Vec2 apply(Vec2 v) const { return {c * v.x - s * v.y, s * v.x + c * v.y}; }
    constexpr Vec2 apply_inverse(Vec2 v) const { return {c * v.x + s * v.y, -s * v.x + c * v.y}; }
};

// Rigid transform: rotate then translate.
struct Transform2 {
    Vec2 p;
    Rot2 q;

    Transform2() = default;
    Transform2(Vec2 p_, double angle) : p(p_), q(angle) {}

    constexpr Vec2 apply(Vec2 v) const { return q.apply(v) + p; }
    constexpr Vec2 apply_inverse(Vec2 v) const { return q.apply_inverse(v - p); }
};

inline double clamp(double v, double lo, double hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    a = std::fmod(a, two_pi);
    if (a <= -3.14159265358979323846)
        a += two_pi;
    else if (a > 3.14159265358979323846)
        a -= two_pi;
    return a;
}

}  // namespace clutter
