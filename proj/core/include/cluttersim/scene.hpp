#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cluttersim/vec2.hpp"

namespace clutter {

struct SceneError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SceneStyle { Grid, Continuous };

const char* to_string(SceneStyle style);
SceneStyle scene_style_from_string(const std::string& name);

// Rectangular footprint placed in the scene. Position is the center,
// yaw in radians (counter-clockwise). Shade encodes mass for exports,
// 0 = lightest, 1 = heaviest.
struct ObjectSpec {
    double width = 0.0;
    double height = 0.0;
    double mass = 0.0;
    Vec2 position;
    double yaw = 0.0;
    double shade = 0.0;
};

// Scene rectangle: x spans [-width/2, width/2], y spans [0, depth] with the
// open front at y = 0 and the back wall at y = depth.
struct SceneBounds {
    double depth = 0.38;   // d_scene
    double width = 0.53;   // w_scene
};

struct SceneSpec {
    std::uint64_t seed = 0;
    SceneStyle style = SceneStyle::Continuous;
    SceneBounds bounds;
    double start_x = 0.0;  // effector start along the front edge
    Vec2 goal;             // inside the back band of the scene
    std::vector<ObjectSpec> objects;
};

struct CatalogEntry {
    double side = 0.0;  // square footprint side, m
    double mass = 0.0;  // kg
};

struct SceneGenParams {
    SceneBounds bounds;
    int count_min = 12;
    int count_max = 35;
    std::vector<CatalogEntry> catalog;  // empty -> default_catalog()
    double clearance = 0.001;           // min face-axis gap between objects
    int grid_cols = 5;                  // across the width
    int grid_rows = 7;                  // along the depth
    int max_attempts_per_object = 1000;
    double edge_margin = 0.05;          // start/goal x kept this far from side walls
};

// Eight square types spanning the footprint and mass ranges, heavier = bigger.
std::vector<CatalogEntry> default_catalog(double side_min = 0.043, double side_max = 0.088,
                                          double mass_min = 0.143, double mass_max = 0.570);

// Objects centered on distinct cells of a grid_cols x grid_rows lattice.
// Only catalog entries that fit a cell (side + clearance <= min cell extent)
// are used; throws SceneError if none fit.
SceneSpec generate_grid_scene(std::uint64_t seed, const SceneGenParams& params);

// Objects at continuous positions with random yaw, rejection-sampled until
// pairwise clearance holds. Throws SceneError naming the achieved density if
// the attempt budget runs out.
SceneSpec generate_continuous_scene(std::uint64_t seed, const SceneGenParams& params);

// Separation between two rectangles along their face axes: positive = gap,
// negative = overlap depth bound. Clearance holds iff this >= clearance.
struct ObbFootprint {
    Vec2 center;
    double half_w = 0.0;
    double half_h = 0.0;
    double yaw = 0.0;
};
double obb_face_gap(const ObbFootprint& a, const ObbFootprint& b);

ObbFootprint footprint_of(const ObjectSpec& obj);

// True when every object lies inside the bounds and all pairs keep the
// clearance. Fills `why` with the first violation when provided.
bool scene_is_valid(const SceneSpec& spec, double clearance, std::string* why = nullptr);

// Versioned JSON document; round-trips bit-exactly.
std::string scene_to_json(const SceneSpec& spec);
SceneSpec scene_from_json(const std::string& text);

}  // namespace clutter
