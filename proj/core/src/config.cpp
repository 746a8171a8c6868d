#include "cluttersim/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace clutter {

std::vector<double> SweepRange::values() const {
    if (step <= 0.0) throw ConfigError("sweep range step must be positive");
    if (hi < lo) throw ConfigError("sweep range upper bound below lower bound");
    const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int i = 0; i < count; ++i) out.push_back(lo + i * step);
    return out;
}

void ExperimentConfig::finalize() {
    strategy.effector_length = physics.effector_length;
    strategy.t_deadline = t_tot;
    scene_gen.catalog.clear();
    scene_gen.catalog = default_catalog(object_side_min, object_side_max, object_mass_min,
                                        object_mass_max);
    if (catalog_size != 8) {
        // default_catalog emits 8 types; re-span for other counts
        scene_gen.catalog.clear();
        for (int i = 0; i < catalog_size; ++i) {
            const double f = catalog_size > 1 ? double(i) / (catalog_size - 1) : 0.0;
            scene_gen.catalog.push_back(
                {object_side_min + f * (object_side_max - object_side_min),
                 object_mass_min + f * (object_mass_max - object_mass_min)});
        }
    }
}

ExperimentConfig default_config() {
    ExperimentConfig c;
    c.finalize();
    return c;
}

namespace {

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
    }
}

long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected an unsigned integer, got '" +
                          value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

SweepRange parse_range(const std::string& key, const std::string& value) {
    SweepRange r;
    const auto c1 = value.find(':');
    const auto c2 = value.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw ConfigError("config key '" + key + "': expected lo:step:hi, got '" + value + "'");
    r.lo = parse_double(key, value.substr(0, c1));
    r.step = parse_double(key, value.substr(c1 + 1, c2 - c1 - 1));
    r.hi = parse_double(key, value.substr(c2 + 1));
    if (r.step <= 0.0 || r.hi < r.lo)
        throw ConfigError("config key '" + key + "': range must have step > 0 and hi >= lo");
    return r;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

void apply_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
    using Setter = std::function<void(ExperimentConfig&, const std::string&)>;
    static const std::map<std::string, Setter> setters = {
        {"scene.depth", [](auto& c, const auto& v) { c.scene_gen.bounds.depth = parse_double("scene.depth", v); }},
        {"scene.width", [](auto& c, const auto& v) { c.scene_gen.bounds.width = parse_double("scene.width", v); }},
        {"scene.style", [](auto& c, const auto& v) {
             try { c.scene_style = scene_style_from_string(v); }
             catch (const std::exception& e) { throw ConfigError(std::string("config key 'scene.style': ") + e.what()); }
         }},
        {"scene.count_min", [](auto& c, const auto& v) { c.scene_gen.count_min = static_cast<int>(parse_int("scene.count_min", v)); }},
        {"scene.count_max", [](auto& c, const auto& v) { c.scene_gen.count_max = static_cast<int>(parse_int("scene.count_max", v)); }},
        {"scene.clearance", [](auto& c, const auto& v) { c.scene_gen.clearance = parse_double("scene.clearance", v); }},
        {"scene.grid_cols", [](auto& c, const auto& v) { c.scene_gen.grid_cols = static_cast<int>(parse_int("scene.grid_cols", v)); }},
        {"scene.grid_rows", [](auto& c, const auto& v) { c.scene_gen.grid_rows = static_cast<int>(parse_int("scene.grid_rows", v)); }},
        {"scene.edge_margin", [](auto& c, const auto& v) { c.scene_gen.edge_margin = parse_double("scene.edge_margin", v); }},
        {"scene.max_attempts", [](auto& c, const auto& v) { c.scene_gen.max_attempts_per_object = static_cast<int>(parse_int("scene.max_attempts", v)); }},
        {"scene.object_side_min", [](auto& c, const auto& v) { c.object_side_min = parse_double("scene.object_side_min", v); }},
        {"scene.object_side_max", [](auto& c, const auto& v) { c.object_side_max = parse_double("scene.object_side_max", v); }},
        {"scene.object_mass_min", [](auto& c, const auto& v) { c.object_mass_min = parse_double("scene.object_mass_min", v); }},
        {"scene.object_mass_max", [](auto& c, const auto& v) { c.object_mass_max = parse_double("scene.object_mass_max", v); }},
        {"scene.catalog_size", [](auto& c, const auto& v) { c.catalog_size = static_cast<int>(parse_int("scene.catalog_size", v)); }},

        {"physics.dt", [](auto& c, const auto& v) { c.physics.dt = parse_double("physics.dt", v); }},
        {"physics.velocity_iterations", [](auto& c, const auto& v) { c.physics.velocity_iterations = static_cast<int>(parse_int("physics.velocity_iterations", v)); }},
        {"physics.mu_floor", [](auto& c, const auto& v) { c.physics.mu_floor = parse_double("physics.mu_floor", v); }},
        {"physics.mu_body", [](auto& c, const auto& v) { c.physics.mu_body = parse_double("physics.mu_body", v); }},
        {"physics.gravity", [](auto& c, const auto& v) { c.physics.gravity = parse_double("physics.gravity", v); }},
        {"physics.baumgarte", [](auto& c, const auto& v) { c.physics.baumgarte = parse_double("physics.baumgarte", v); }},
        {"physics.slop", [](auto& c, const auto& v) { c.physics.slop = parse_double("physics.slop", v); }},
        {"physics.max_correction_velocity", [](auto& c, const auto& v) { c.physics.max_correction_velocity = parse_double("physics.max_correction_velocity", v); }},
        {"physics.penetration_tolerance", [](auto& c, const auto& v) { c.physics.penetration_tolerance = parse_double("physics.penetration_tolerance", v); }},
        {"physics.fault_penetration_factor", [](auto& c, const auto& v) { c.physics.fault_penetration_factor = parse_double("physics.fault_penetration_factor", v); }},
        {"physics.wall_thickness", [](auto& c, const auto& v) { c.physics.wall_thickness = parse_double("physics.wall_thickness", v); }},

        {"effector.length", [](auto& c, const auto& v) { c.physics.effector_length = parse_double("effector.length", v); }},
        {"effector.width", [](auto& c, const auto& v) { c.physics.effector_width = parse_double("effector.width", v); }},
        {"effector.mass", [](auto& c, const auto& v) { c.physics.effector_mass = parse_double("effector.mass", v); }},
        {"effector.start_clearance", [](auto& c, const auto& v) { c.physics.effector_start_clearance = parse_double("effector.start_clearance", v); }},
        {"effector.f_max", [](auto& c, const auto& v) { c.limits.f_max = parse_double("effector.f_max", v); }},
        {"effector.m_max", [](auto& c, const auto& v) { c.limits.m_max = parse_double("effector.m_max", v); }},
        {"effector.taper_radius", [](auto& c, const auto& v) { c.taper_radius = parse_double("effector.taper_radius", v); }},
        {"effector.taper_floor", [](auto& c, const auto& v) { c.taper_floor = parse_double("effector.taper_floor", v); }},
        {"effector.backoff_recovery", [](auto& c, const auto& v) { c.backoff_recovery = parse_double("effector.backoff_recovery", v); }},

        {"sensor.rows", [](auto& c, const auto& v) { c.sensor.rows = static_cast<int>(parse_int("sensor.rows", v)); }},
        {"sensor.cols", [](auto& c, const auto& v) { c.sensor.cols = static_cast<int>(parse_int("sensor.cols", v)); }},
        {"sensor.footprint_sigma", [](auto& c, const auto& v) { c.sensor.footprint_sigma = parse_double("sensor.footprint_sigma", v); }},
        {"sensor.noise_sigma", [](auto& c, const auto& v) { c.sensor.noise_sigma = parse_double("sensor.noise_sigma", v); }},
        {"sensor.bulk_amplitude", [](auto& c, const auto& v) { c.sensor.bulk_amplitude = parse_double("sensor.bulk_amplitude", v); }},
        {"sensor.tip_band", [](auto& c, const auto& v) { c.sensor.tip_band = parse_double("sensor.tip_band", v); }},
        {"sensor.rate", [](auto& c, const auto& v) { c.sensor.sensor_rate = parse_double("sensor.rate", v); }},
        {"sensor.compensation_rate", [](auto& c, const auto& v) { c.sensor.compensation_rate = parse_double("sensor.compensation_rate", v); }},
        {"sensor.ransac_iterations", [](auto& c, const auto& v) { c.sensor.ransac_iterations = static_cast<int>(parse_int("sensor.ransac_iterations", v)); }},
        {"sensor.ransac_threshold", [](auto& c, const auto& v) { c.sensor.ransac_threshold = parse_double("sensor.ransac_threshold", v); }},

        {"strategy.v_max", [](auto& c, const auto& v) { c.strategy.v_max = parse_double("strategy.v_max", v); }},
        {"strategy.omega_max", [](auto& c, const auto& v) { c.strategy.omega_max = parse_double("strategy.omega_max", v); }},
        {"strategy.a_bur", [](auto& c, const auto& v) { c.strategy.a_bur = parse_double("strategy.a_bur", v); }},
        {"strategy.f_bur", [](auto& c, const auto& v) { c.strategy.f_bur = parse_double("strategy.f_bur", v); }},
        {"strategy.f_bur_in_rad", [](auto& c, const auto& v) { c.strategy.f_bur_in_rad = parse_bool("strategy.f_bur_in_rad", v); }},
        {"strategy.t_excv", [](auto& c, const auto& v) { c.strategy.t_excv = parse_double("strategy.t_excv", v); }},
        {"strategy.t_trig", [](auto& c, const auto& v) { c.strategy.t_trig = parse_double("strategy.t_trig", v); }},
        {"strategy.s_excv", [](auto& c, const auto& v) { c.strategy.s_excv = parse_double("strategy.s_excv", v); }},
        {"strategy.theta_deadband", [](auto& c, const auto& v) { c.strategy.theta_deadband = parse_double("strategy.theta_deadband", v); }},

        {"event.f_bur", [](auto& c, const auto& v) { c.events.f_bur = parse_double("event.f_bur", v); }},
        {"event.f_excv", [](auto& c, const auto& v) { c.events.f_excv = parse_double("event.f_excv", v); }},
        {"event.f_push_min", [](auto& c, const auto& v) { c.events.f_push_min = parse_double("event.f_push_min", v); }},
        {"event.f_push_max", [](auto& c, const auto& v) { c.events.f_push_max = parse_double("event.f_push_max", v); }},
        {"event.t_push", [](auto& c, const auto& v) { c.events.t_push = parse_double("event.t_push", v); }},
        {"event.t_prog", [](auto& c, const auto& v) { c.events.t_prog = parse_double("event.t_prog", v); }},
        {"event.stall_fraction", [](auto& c, const auto& v) { c.events.stall_fraction = parse_double("event.stall_fraction", v); }},
        {"event.progress_quantum", [](auto& c, const auto& v) { c.events.progress_quantum = parse_double("event.progress_quantum", v); }},
        {"event.burrow_dwell", [](auto& c, const auto& v) { c.events.burrow_dwell = parse_double("event.burrow_dwell", v); }},

        {"trial.t_tot", [](auto& c, const auto& v) { c.t_tot = parse_double("trial.t_tot", v); }},
        {"trial.goal_radius", [](auto& c, const auto& v) { c.goal_radius = parse_double("trial.goal_radius", v); }},
        {"trial.control_rate", [](auto& c, const auto& v) { c.control_rate = parse_double("trial.control_rate", v); }},

        {"batch.scenes", [](auto& c, const auto& v) { c.scenes = static_cast<int>(parse_int("batch.scenes", v)); }},
        {"batch.seed", [](auto& c, const auto& v) { c.seed = parse_u64("batch.seed", v); }},
        {"batch.parallelism", [](auto& c, const auto& v) { c.parallelism = static_cast<int>(parse_int("batch.parallelism", v)); }},
        {"batch.max_fault_rate", [](auto& c, const auto& v) { c.max_fault_rate = parse_double("batch.max_fault_rate", v); }},

        {"sweep.scenes", [](auto& c, const auto& v) { c.sweep_scenes = static_cast<int>(parse_int("sweep.scenes", v)); }},
        {"sweep.smoothing_sigma", [](auto& c, const auto& v) { c.sweep_sigma = parse_double("sweep.smoothing_sigma", v); }},
        {"sweep.a_bur", [](auto& c, const auto& v) { c.sweep_a_bur = parse_range("sweep.a_bur", v); }},
        {"sweep.f_bur", [](auto& c, const auto& v) { c.sweep_f_bur = parse_range("sweep.f_bur", v); }},
        {"sweep.t_excv", [](auto& c, const auto& v) { c.sweep_t_excv = parse_range("sweep.t_excv", v); }},
        {"sweep.t_trig", [](auto& c, const auto& v) { c.sweep_t_trig = parse_range("sweep.t_trig", v); }},

        {"output.dir", [](auto& c, const auto& v) { c.output_dir = v; }},
    };

    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(c, value);
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c = default_config();
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": empty key or value");
        apply_config_value(c, key, value);
    }
    c.finalize();
    return c;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

std::string config_to_string(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "# Scene geometry and generation\n";
    os << "scene.depth = " << num(c.scene_gen.bounds.depth) << "            # d_scene, m\n";
    os << "scene.width = " << num(c.scene_gen.bounds.width) << "            # w_scene, m\n";
    os << "scene.style = " << to_string(c.scene_style) << "       # grid | continuous\n";
    os << "scene.count_min = " << c.scene_gen.count_min << "\n";
    os << "scene.count_max = " << c.scene_gen.count_max << "\n";
    os << "scene.clearance = " << num(c.scene_gen.clearance) << "        # m, min gap between objects\n";
    os << "scene.grid_cols = " << c.scene_gen.grid_cols << "              # grid style: cells across the width\n";
    os << "scene.grid_rows = " << c.scene_gen.grid_rows << "              # grid style: cells along the depth\n";
    os << "scene.edge_margin = " << num(c.scene_gen.edge_margin) << "       # m, start/goal margin from side walls\n";
    os << "scene.max_attempts = " << c.scene_gen.max_attempts_per_object << "\n";
    os << "scene.object_side_min = " << num(c.object_side_min) << "   # m\n";
    os << "scene.object_side_max = " << num(c.object_side_max) << "   # m\n";
    os << "scene.object_mass_min = " << num(c.object_mass_min) << "   # kg\n";
    os << "scene.object_mass_max = " << num(c.object_mass_max) << "    # kg\n";
    os << "scene.catalog_size = " << c.catalog_size << "\n";
    os << "\n# Physics\n";
    os << "physics.dt = " << num(c.physics.dt) << "  # s\n";
    os << "physics.velocity_iterations = " << c.physics.velocity_iterations << "\n";
    os << "physics.mu_floor = " << num(c.physics.mu_floor) << "\n";
    os << "physics.mu_body = " << num(c.physics.mu_body) << "\n";
    os << "physics.gravity = " << num(c.physics.gravity) << "\n";
    os << "physics.baumgarte = " << num(c.physics.baumgarte) << "\n";
    os << "physics.slop = " << num(c.physics.slop) << "\n";
    os << "physics.max_correction_velocity = " << num(c.physics.max_correction_velocity) << "\n";
    os << "physics.penetration_tolerance = " << num(c.physics.penetration_tolerance) << "\n";
    os << "physics.fault_penetration_factor = " << num(c.physics.fault_penetration_factor) << "\n";
    os << "physics.wall_thickness = " << num(c.physics.wall_thickness) << "\n";
    os << "\n# Effector\n";
    os << "effector.length = " << num(c.physics.effector_length) << "        # L, m\n";
    os << "effector.width = " << num(c.physics.effector_width) << "\n";
    os << "effector.mass = " << num(c.physics.effector_mass) << "\n";
    os << "effector.start_clearance = " << num(c.physics.effector_start_clearance) << "\n";
    os << "effector.f_max = " << num(c.limits.f_max) << "          # N\n";
    os << "effector.m_max = " << num(c.limits.m_max) << "         # N*m\n";
    os << "effector.taper_radius = " << num(c.taper_radius) << "  # m\n";
    os << "effector.taper_floor = " << num(c.taper_floor) << "\n";
    os << "effector.backoff_recovery = " << num(c.backoff_recovery) << "\n";
    os << "\n# Tactile sensing\n";
    os << "sensor.rows = " << c.sensor.rows << "\n";
    os << "sensor.cols = " << c.sensor.cols << "\n";
    os << "sensor.footprint_sigma = " << num(c.sensor.footprint_sigma) << "  # taxel pitches\n";
    os << "sensor.noise_sigma = " << num(c.sensor.noise_sigma) << "      # N\n";
    os << "sensor.bulk_amplitude = " << num(c.sensor.bulk_amplitude) << "    # N\n";
    os << "sensor.tip_band = " << num(c.sensor.tip_band) << "          # fraction of L\n";
    os << "sensor.rate = " << num(c.sensor.sensor_rate) << "              # Hz\n";
    os << "sensor.compensation_rate = " << num(c.sensor.compensation_rate) << "  # Hz\n";
    os << "sensor.ransac_iterations = " << c.sensor.ransac_iterations << "\n";
    os << "sensor.ransac_threshold = " << num(c.sensor.ransac_threshold) << "  # N\n";
    os << "\n# Control strategy parameters\n";
    os << "strategy.v_max = " << num(c.strategy.v_max) << "       # m/s\n";
    os << "strategy.omega_max = " << num(c.strategy.omega_max) << "     # rad/s\n";
    os << "strategy.a_bur = " << num(c.strategy.a_bur) << "\n";
    os << "strategy.f_bur = " << num(c.strategy.f_bur) << "           # Hz (cycles/s)\n";
    os << "strategy.f_bur_in_rad = " << (c.strategy.f_bur_in_rad ? "true" : "false")
       << "  # true: sinusoid argument f_bur * t\n";
    os << "strategy.t_excv = " << num(c.strategy.t_excv) << "          # s\n";
    os << "strategy.t_trig = " << num(c.strategy.t_trig) << "          # s\n";
    os << "strategy.s_excv = " << num(c.strategy.s_excv) << "\n";
    os << "strategy.theta_deadband = " << num(c.strategy.theta_deadband) << "  # rad\n";
    os << "\n# Hybrid event thresholds\n";
    os << "event.f_bur = " << num(c.events.f_bur) << "             # N\n";
    os << "event.f_excv = " << num(c.events.f_excv) << "           # N\n";
    os << "event.f_push_min = " << num(c.events.f_push_min) << "      # N\n";
    os << "event.f_push_max = " << num(c.events.f_push_max) << "      # N\n";
    os << "event.t_push = " << num(c.events.t_push) << "             # s\n";
    os << "event.t_prog = " << num(c.events.t_prog) << "             # s\n";
    os << "event.stall_fraction = " << num(c.events.stall_fraction) << "\n";
    os << "event.progress_quantum = " << num(c.events.progress_quantum) << "  # m\n";
    os << "event.burrow_dwell = " << num(c.events.burrow_dwell) << "     # s\n";
    os << "\n# Trial\n";
    os << "trial.t_tot = " << num(c.t_tot) << "             # s\n";
    os << "trial.goal_radius = " << num(c.goal_radius) << "    # m\n";
    os << "trial.control_rate = " << num(c.control_rate) << "      # Hz\n";
    os << "\n# Batch\n";
    os << "batch.scenes = " << c.scenes << "\n";
    os << "batch.seed = " << c.seed << "\n";
    os << "batch.parallelism = " << c.parallelism << "\n";
    os << "batch.max_fault_rate = " << num(c.max_fault_rate) << "\n";
    os << "\n# Parameter sweep\n";
    os << "sweep.scenes = " << c.sweep_scenes << "\n";
    os << "sweep.smoothing_sigma = " << num(c.sweep_sigma) << "\n";
    os << "sweep.a_bur = " << num(c.sweep_a_bur.lo) << ":" << num(c.sweep_a_bur.step) << ":"
       << num(c.sweep_a_bur.hi) << "\n";
    os << "sweep.f_bur = " << num(c.sweep_f_bur.lo) << ":" << num(c.sweep_f_bur.step) << ":"
       << num(c.sweep_f_bur.hi) << "\n";
    os << "sweep.t_excv = " << num(c.sweep_t_excv.lo) << ":" << num(c.sweep_t_excv.step) << ":"
       << num(c.sweep_t_excv.hi) << "\n";
    os << "sweep.t_trig = " << num(c.sweep_t_trig.lo) << ":" << num(c.sweep_t_trig.step) << ":"
       << num(c.sweep_t_trig.hi) << "\n";
    os << "\n# Output\n";
    os << "output.dir = " << c.output_dir << "\n";
    return os.str();
}

}  // namespace clutter
