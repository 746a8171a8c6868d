#include "cluttersim/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "cluttersim/rng.hpp"

namespace clutter {

const char* to_string(SceneStyle style) {
    return style == SceneStyle::Grid ? "grid" : "continuous";
}

SceneStyle scene_style_from_string(const std::string& name) {
    if (name == "grid") return SceneStyle::Grid;
    if (name == "continuous") return SceneStyle::Continuous;
    throw SceneError("unknown scene style: " + name);
}

std::vector<CatalogEntry> default_catalog(double side_min, double side_max,
                                          double mass_min, double mass_max) {
    std::vector<CatalogEntry> catalog;
    const int n = 8;
    for (int i = 0; i < n; ++i) {
        const double f = static_cast<double>(i) / (n - 1);
        catalog.push_back({side_min + f * (side_max - side_min),
                           mass_min + f * (mass_max - mass_min)});
    }
    return catalog;
}

ObbFootprint footprint_of(const ObjectSpec& obj) {
    return {obj.position, 0.5 * obj.width, 0.5 * obj.height, obj.yaw};
}

namespace {

struct AxisSet {
    Vec2 ax, ay;  // local axes in world frame
};

AxisSet axes_of(const ObbFootprint& b) {
    Rot2 r(b.yaw);
    return {r.apply({1.0, 0.0}), r.apply({0.0, 1.0})};
}

double projected_radius(const ObbFootprint& b, const AxisSet& ab, Vec2 axis) {
    return b.half_w * std::abs(ab.ax.dot(axis)) + b.half_h * std::abs(ab.ay.dot(axis));
}

}  // namespace

double obb_face_gap(const ObbFootprint& a, const ObbFootprint& b) {
    const AxisSet aa = axes_of(a), ab = axes_of(b);
    const Vec2 d = b.center - a.center;
    const Vec2 axes[4] = {aa.ax, aa.ay, ab.ax, ab.ay};
    double best = -1e300;
    for (Vec2 axis : axes) {
        const double gap = std::abs(d.dot(axis)) -
                           (projected_radius(a, aa, axis) + projected_radius(b, ab, axis));
        best = std::max(best, gap);
    }
    return best;
}

namespace {

bool inside_bounds(const ObbFootprint& b, const SceneBounds& bounds) {
    const AxisSet ab = axes_of(b);
    const double rx = projected_radius(b, ab, {1.0, 0.0});
    const double ry = projected_radius(b, ab, {0.0, 1.0});
    return b.center.x - rx >= -0.5 * bounds.width && b.center.x + rx <= 0.5 * bounds.width &&
           b.center.y - ry >= 0.0 && b.center.y + ry <= bounds.depth;
}

const std::vector<CatalogEntry>& effective_catalog(const SceneGenParams& params,
                                                   std::vector<CatalogEntry>& storage) {
    if (!params.catalog.empty()) return params.catalog;
    storage = default_catalog();
    return storage;
}

double max_side(const std::vector<CatalogEntry>& catalog) {
    double m = 0.0;
    for (const auto& e : catalog) m = std::max(m, e.side);
    return m;
}

ObjectSpec make_object(const CatalogEntry& entry, Vec2 position, double yaw,
                       const std::vector<CatalogEntry>& catalog) {
    double lo = 1e300, hi = -1e300;
    for (const auto& e : catalog) {
        lo = std::min(lo, e.mass);
        hi = std::max(hi, e.mass);
    }
    ObjectSpec obj;
    obj.width = entry.side;
    obj.height = entry.side;
    obj.mass = entry.mass;
    obj.position = position;
    obj.yaw = yaw;
    obj.shade = hi > lo ? (entry.mass - lo) / (hi - lo) : 0.0;
    return obj;
}

void pick_endpoints(SceneSpec& spec, const SceneGenParams& params,
                    const std::vector<CatalogEntry>& catalog, Rng& rng) {
    const double half = 0.5 * params.bounds.width - params.edge_margin;
    spec.start_x = rng.uniform(-half, half);
    const double gx = rng.uniform(-half, half);
    spec.goal = {gx, params.bounds.depth - 0.5 * max_side(catalog)};
}

}  // namespace

SceneSpec generate_grid_scene(std::uint64_t seed, const SceneGenParams& params) {
    std::vector<CatalogEntry> storage;
    const auto& catalog = effective_catalog(params, storage);

    const double cell_w = params.bounds.width / params.grid_cols;
    const double cell_d = params.bounds.depth / params.grid_rows;
    const double cell_min = std::min(cell_w, cell_d);

    std::vector<CatalogEntry> fitting;
    for (const auto& e : catalog)
        if (e.side + params.clearance <= cell_min) fitting.push_back(e);
    if (fitting.empty()) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "no catalog footprint fits a %.1f x %.1f mm grid cell "
                      "(smallest side %.1f mm + %.1f mm clearance)",
                      cell_w * 1e3, cell_d * 1e3, catalog.empty() ? 0.0 : 1e3 * catalog[0].side,
                      params.clearance * 1e3);
        throw SceneError(buf);
    }

    Rng rng(mix_seed(seed, 0x67726964ULL));  // stream tag: "grid"

    SceneSpec spec;
    spec.seed = seed;
    spec.style = SceneStyle::Grid;
    spec.bounds = params.bounds;

    const int total_cells = params.grid_cols * params.grid_rows;
    int count = rng.uniform_int(params.count_min, params.count_max);
    count = std::min(count, total_cells);

    // Partial Fisher-Yates over all cells.
    std::vector<int> cells(total_cells);
    std::iota(cells.begin(), cells.end(), 0);
    for (int i = 0; i < count; ++i) {
        const int j = i + static_cast<int>(rng.uniform_index(total_cells - i));
        std::swap(cells[i], cells[j]);
    }

    for (int i = 0; i < count; ++i) {
        const int cell = cells[i];
        const int col = cell % params.grid_cols;
        const int row = cell / params.grid_cols;
        const Vec2 center{-0.5 * params.bounds.width + (col + 0.5) * cell_w,
                          (row + 0.5) * cell_d};
        const auto& entry = fitting[rng.uniform_index(fitting.size())];
        spec.objects.push_back(make_object(entry, center, 0.0, catalog));
    }

    pick_endpoints(spec, params, catalog, rng);
    return spec;
}

SceneSpec generate_continuous_scene(std::uint64_t seed, const SceneGenParams& params) {
    std::vector<CatalogEntry> storage;
    const auto& catalog = effective_catalog(params, storage);
    if (catalog.empty()) throw SceneError("empty object catalog");

    Rng rng(mix_seed(seed, 0x636f6e74ULL));  // stream tag: "cont"

    SceneSpec spec;
    spec.seed = seed;
    spec.style = SceneStyle::Continuous;
    spec.bounds = params.bounds;

    const int count = rng.uniform_int(params.count_min, params.count_max);
    std::vector<ObbFootprint> placed;

    const auto try_place = [&](const CatalogEntry& entry) {
        for (int attempt = 0; attempt < params.max_attempts_per_object; ++attempt) {
            const double yaw = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
            ObbFootprint fp{{0.0, 0.0}, 0.5 * entry.side, 0.5 * entry.side, yaw};
            const AxisSet ab = axes_of(fp);
            const double rx = projected_radius(fp, ab, {1.0, 0.0});
            const double ry = projected_radius(fp, ab, {0.0, 1.0});
            fp.center = {rng.uniform(-0.5 * params.bounds.width + rx, 0.5 * params.bounds.width - rx),
                         rng.uniform(ry, params.bounds.depth - ry)};
            bool clear = true;
            for (const auto& other : placed) {
                if (obb_face_gap(fp, other) < params.clearance) {
                    clear = false;
                    break;
                }
            }
            if (clear) {
                placed.push_back(fp);
                spec.objects.push_back(make_object(entry, fp.center, yaw, catalog));
                return true;
            }
        }
        return false;
    };

    const auto smallest = std::min_element(
        catalog.begin(), catalog.end(),
        [](const CatalogEntry& a, const CatalogEntry& b) { return a.side < b.side; });
    for (int i = 0; i < count; ++i) {
        const auto& entry = catalog[rng.uniform_index(catalog.size())];
        // A large footprint can run out of feasible poses while a small one
        // still fits; retry the slot with the smallest before giving it up.
        if (!try_place(entry) && entry.side > smallest->side) try_place(*smallest);
    }

    if (static_cast<int>(spec.objects.size()) < params.count_min) {
        double area = 0.0;
        for (const auto& o : spec.objects) area += o.width * o.height;
        const double coverage = area / (params.bounds.width * params.bounds.depth);
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "placement budget exhausted: placed %zu of %d objects "
                      "(%.0f%% of scene area covered)",
                      spec.objects.size(), count, coverage * 100.0);
        throw SceneError(buf);
    }

    pick_endpoints(spec, params, catalog, rng);
    return spec;
}

bool scene_is_valid(const SceneSpec& spec, double clearance, std::string* why) {
    char buf[160];
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
        if (!inside_bounds(footprint_of(spec.objects[i]), spec.bounds)) {
            if (why) {
                std::snprintf(buf, sizeof(buf), "object %zu outside bounds", i);
                *why = buf;
            }
            return false;
        }
        for (std::size_t j = i + 1; j < spec.objects.size(); ++j) {
            const double gap = obb_face_gap(footprint_of(spec.objects[i]),
                                            footprint_of(spec.objects[j]));
            if (gap < clearance) {
                if (why) {
                    std::snprintf(buf, sizeof(buf), "objects %zu and %zu too close (gap %.2f mm)",
                                  i, j, gap * 1e3);
                    *why = buf;
                }
                return false;
            }
        }
    }
    return true;
}

std::string scene_to_json(const SceneSpec& spec) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["seed"] = spec.seed;
    j["style"] = to_string(spec.style);
    j["bounds"] = {{"depth", spec.bounds.depth}, {"width", spec.bounds.width}};
    j["start_x"] = spec.start_x;
    j["goal"] = {{"x", spec.goal.x}, {"y", spec.goal.y}};
    auto objects = nlohmann::json::array();
    for (const auto& o : spec.objects) {
        objects.push_back({{"width", o.width},
                           {"height", o.height},
                           {"mass", o.mass},
                           {"x", o.position.x},
                           {"y", o.position.y},
                           {"yaw", o.yaw},
                           {"shade", o.shade}});
    }
    j["objects"] = std::move(objects);
    return j.dump(2);
}

SceneSpec scene_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SceneError(std::string("scene JSON parse error: ") + e.what());
    }
    if (j.value("schema_version", 0) != 1)
        throw SceneError("unsupported scene schema version");
    SceneSpec spec;
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.style = scene_style_from_string(j.at("style").get<std::string>());
    spec.bounds.depth = j.at("bounds").at("depth").get<double>();
    spec.bounds.width = j.at("bounds").at("width").get<double>();
    spec.start_x = j.at("start_x").get<double>();
    spec.goal = {j.at("goal").at("x").get<double>(), j.at("goal").at("y").get<double>()};
    for (const auto& o : j.at("objects")) {
        ObjectSpec obj;
        obj.width = o.at("width").get<double>();
        obj.height = o.at("height").get<double>();
        obj.mass = o.at("mass").get<double>();
        obj.position = {o.at("x").get<double>(), o.at("y").get<double>()};
        obj.yaw = o.at("yaw").get<double>();
        obj.shade = o.value("shade", 0.0);
        spec.objects.push_back(obj);
    }
    return spec;
}

}  // namespace clutter
