#include "cluttersim/effector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace clutter {

EffectorDrive to_effector_drive(const VelocityCmd& cmd) {
    EffectorDrive d;
    d.tip_velocity = cmd.linear;
    d.angular_velocity = -cmd.angular;  // heading rate -> standard CCW rate
    d.active = true;
    return d;
}

EffectorState effector_state_from(const World& world) {
    EffectorState s;
    const Body& e = world.body(world.effector_id());
    s.tip_position = world.effector_tip();
    s.theta = wrap_angle(-e.angle);
    s.length = world.config().effector_length;
    s.linear_velocity = world.effector_tip_velocity();
    s.angular_velocity = -e.angular_velocity;
    s.net_wrench = world.effector_wrench();
    return s;
}

VelocityCmd apply_command(const VelocityCmd& cmd, const EffectorWrench& wrench,
                          const WrenchLimits& limits, double distance_to_goal,
                          double taper_radius, double taper_floor) {
    VelocityCmd out = cmd;
    if (std::abs(wrench.fx) > limits.f_max)
        out.linear.x *= limits.f_max / std::abs(wrench.fx);
    if (std::abs(wrench.fy) > limits.f_max)
        out.linear.y *= limits.f_max / std::abs(wrench.fy);
    if (std::abs(wrench.mz) > limits.m_max)
        out.angular *= limits.m_max / std::abs(wrench.mz);

    if (taper_radius > 0.0 && distance_to_goal < taper_radius) {
        const double scale =
            taper_floor + (1.0 - taper_floor) * (distance_to_goal / taper_radius);
        out.linear *= scale;
        out.angular *= scale;
    }
    return out;
}

VelocityCmd govern_command(const VelocityCmd& cmd, const EffectorWrench& wrench,
                           const WrenchLimits& limits, BackoffState& backoff,
                           double distance_to_goal, double taper_radius, double taper_floor,
                           double recovery) {
    auto update = [recovery](double& scale, double force, double limit) {
        if (std::abs(force) > limit)
            scale = std::max(1e-3, scale * limit / std::abs(force));
        else
            scale = std::min(1.0, scale * recovery);
    };
    update(backoff.sx, wrench.fx, limits.f_max);
    update(backoff.sy, wrench.fy, limits.f_max);
    update(backoff.sw, wrench.mz, limits.m_max);

    VelocityCmd out = cmd;
    out.linear.x *= backoff.sx;
    out.linear.y *= backoff.sy;
    out.angular *= backoff.sw;
    if (taper_radius > 0.0 && distance_to_goal < taper_radius) {
        const double scale =
            taper_floor + (1.0 - taper_floor) * (distance_to_goal / taper_radius);
        out.linear *= scale;
        out.angular *= scale;
    }
    return out;
}

const char* to_string(Side side) { return side == Side::Left ? "left" : "right"; }

const char* to_string(Region region) {
    switch (region) {
        case Region::Left: return "left";
        case Region::Right: return "right";
        default: return "tip";
    }
}

namespace {

TaxelGrid make_grid(Side side, const SensorConfig& cfg, double time) {
    TaxelGrid g;
    g.side = side;
    g.rows = cfg.rows;
    g.cols = cfg.cols;
    g.taxels.assign(static_cast<std::size_t>(cfg.rows) * cfg.cols, Taxel{});
    g.timestamp = time;
    return g;
}

void deposit(TaxelGrid& grid, int row0, int col0, Vec2 f_local, const SensorConfig& cfg) {
    const double sigma = cfg.footprint_sigma;
    const double mag = std::sqrt(f_local.norm_sq());
    if (mag <= 0.0) return;

    if (sigma <= 0.0) {
        Taxel& t = grid.at(row0, col0);
        t.fx += f_local.y;  // along-link component
        t.fy += f_local.x;  // lateral component
        return;
    }

    const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
    double total = 0.0;
    for (int r = 0; r < grid.rows; ++r)
        for (int c = 0; c < grid.cols; ++c) {
            const double dr = r - row0, dc = c - col0;
            total += std::exp(-(dr * dr + dc * dc) * inv_two_sigma_sq);
        }
    const double scale = 1.0 / total;
    for (int r = 0; r < grid.rows; ++r)
        for (int c = 0; c < grid.cols; ++c) {
            const double dr = r - row0, dc = c - col0;
            const double w = std::exp(-(dr * dr + dc * dc) * inv_two_sigma_sq) * scale;
            Taxel& t = grid.at(r, c);
            t.fx += f_local.y * w;
            t.fy += f_local.x * w;
        }
}

}  // namespace

std::pair<TaxelGrid, TaxelGrid> sample_taxels(const World& world, const SensorConfig& cfg,
                                              Rng& rng, double time) {
    TaxelGrid left = make_grid(Side::Left, cfg, time);
    TaxelGrid right = make_grid(Side::Right, cfg, time);

    const Body& e = world.body(world.effector_id());
    const Transform2 xf = e.transform();
    const double length = world.config().effector_length;
    const double pitch = length / cfg.cols;

    for (const Contact& c : world.contacts_on_body(e.id)) {
        const Vec2 t{c.normal.y, -c.normal.x};
        Vec2 f_world = c.normal * c.normal_force + t * c.tangent_force;
        if (c.body_a == e.id) f_world = -f_world;  // force acting on the effector
        const Vec2 f_local = xf.q.apply_inverse(f_world);

        const Vec2 p_local = xf.apply_inverse(c.point);
        const double from_tip = clamp(0.5 * length - p_local.y, 0.0, length);
        const int col = static_cast<int>(clamp(
            std::floor(from_tip / pitch), 0.0, static_cast<double>(cfg.cols - 1)));
        const int row = cfg.rows / 2;

        // The loaded face is the one the force pushes away from: a contact on
        // the local -x (left) face pushes the effector toward +x.
        Side side;
        if (f_local.x > 1e-12)
            side = Side::Left;
        else if (f_local.x < -1e-12)
            side = Side::Right;
        else
            side = p_local.x > 0.0 ? Side::Right : Side::Left;
        deposit(side == Side::Left ? left : right, row, col, f_local, cfg);
    }

    const EffectorState state = effector_state_from(world);
    const double amp = cfg.bulk_amplitude;
    for (TaxelGrid* grid : {&left, &right}) {
        const double sgn = grid->side == Side::Left ? 1.0 : -1.0;
        const double a = amp != 0.0 ? sgn * amp * std::sin(state.theta) * 0.2 : 0.0;
        const double b = amp != 0.0 ? sgn * amp * std::cos(state.theta) * 0.2 : 0.0;
        const double c0 = amp != 0.0 ? 0.5 * amp : 0.0;
        for (int r = 0; r < grid->rows; ++r)
            for (int c = 0; c < grid->cols; ++c) {
                const double plane = a * c + b * r + c0;
                Taxel& t = grid->at(r, c);
                t.fx += plane;
                t.fy += plane;
                t.fz += plane;
                if (cfg.noise_sigma > 0.0) {
                    t.fx += rng.normal(0.0, cfg.noise_sigma);
                    t.fy += rng.normal(0.0, cfg.noise_sigma);
                    t.fz += rng.normal(0.0, cfg.noise_sigma);
                }
            }
    }
    return {std::move(left), std::move(right)};
}

namespace {

// Least-squares plane v = a*col + b*row + c over all points.
Plane least_squares_plane(const std::vector<double>& v, int rows, int cols) {
    // Normal equations for the 3-parameter model; grid coordinates make the
    // moments closed-form friendly, but solve generically for clarity.
    double sxx = 0, sxy = 0, sx = 0, syy = 0, sy = 0, n = 0;
    double sxv = 0, syv = 0, sv = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const double val = v[static_cast<std::size_t>(r) * cols + c];
            sxx += double(c) * c;
            sxy += double(c) * r;
            syy += double(r) * r;
            sx += c;
            sy += r;
            sxv += c * val;
            syv += r * val;
            sv += val;
            n += 1;
        }
    // Solve [sxx sxy sx; sxy syy sy; sx sy n] [a b c]^T = [sxv syv sv]^T.
    const double m[3][3] = {{sxx, sxy, sx}, {sxy, syy, sy}, {sx, sy, n}};
    const double rhs[3] = {sxv, syv, sv};
    double aug[3][4];
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) aug[i][j] = m[i][j];
        aug[i][3] = rhs[i];
    }
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(aug[r][col]) > std::abs(aug[pivot][col])) pivot = r;
        std::swap(aug[col], aug[pivot]);
        if (std::abs(aug[col][col]) < 1e-12) return Plane{0, 0, sv / std::max(n, 1.0), true};
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = aug[r][col] / aug[col][col];
            for (int j = col; j < 4; ++j) aug[r][j] -= f * aug[col][j];
        }
    }
    Plane p;
    p.a = aug[0][3] / aug[0][0];
    p.b = aug[1][3] / aug[1][1];
    p.c = aug[2][3] / aug[2][2];
    return p;
}

bool plane_through(const int idx[3], const std::vector<double>& v, int cols, Plane& out) {
    double x[3], y[3], z[3];
    for (int i = 0; i < 3; ++i) {
        x[i] = idx[i] % cols;
        y[i] = idx[i] / cols;
        z[i] = v[idx[i]];
    }
    const double det =
        (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]);
    if (std::abs(det) < 1e-12) return false;  // collinear sample
    const double dz1 = z[1] - z[0], dz2 = z[2] - z[0];
    out.a = (dz1 * (y[2] - y[0]) - dz2 * (y[1] - y[0])) / det;
    out.b = (dz2 * (x[1] - x[0]) - dz1 * (x[2] - x[0])) / det;
    out.c = z[0] - out.a * x[0] - out.b * y[0];
    out.degenerate = false;
    return true;
}

}  // namespace

Plane ransac_fit_plane(const std::vector<double>& values, int rows, int cols,
                       int iterations, double inlier_threshold, Rng& rng) {
    const int n = rows * cols;
    if (n < 3) {
        double mean = 0;
        for (double v : values) mean += v;
        return Plane{0, 0, n > 0 ? mean / n : 0.0, true};
    }

    int best_count = -1;
    Plane best;
    std::vector<char> best_mask(values.size()), mask(values.size());
    bool found = false;
    for (int it = 0; it < iterations; ++it) {
        int idx[3];
        idx[0] = static_cast<int>(rng.uniform_index(n));
        do {
            idx[1] = static_cast<int>(rng.uniform_index(n));
        } while (idx[1] == idx[0]);
        do {
            idx[2] = static_cast<int>(rng.uniform_index(n));
        } while (idx[2] == idx[0] || idx[2] == idx[1]);

        Plane cand;
        if (!plane_through(idx, values, cols, cand)) continue;

        int count = 0;
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                const double resid =
                    values[static_cast<std::size_t>(r) * cols + c] - cand(r, c);
                const bool in = std::abs(resid) <= inlier_threshold;
                mask[static_cast<std::size_t>(r) * cols + c] = in;
                if (in) ++count;
            }
        if (count > best_count) {
            best_count = count;
            best = cand;
            best_mask = mask;
            found = true;
        }
    }

    if (!found || best_count < 3) {
        Plane p = least_squares_plane(values, rows, cols);
        p.degenerate = true;
        return p;
    }

    // Least-squares refit on the inlier set.
    double sxx = 0, sxy = 0, sx = 0, syy = 0, sy = 0, cnt = 0;
    double sxv = 0, syv = 0, sv = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            if (!best_mask[static_cast<std::size_t>(r) * cols + c]) continue;
            const double val = values[static_cast<std::size_t>(r) * cols + c];
            sxx += double(c) * c;
            sxy += double(c) * r;
            syy += double(r) * r;
            sx += c;
            sy += r;
            sxv += c * val;
            syv += r * val;
            sv += val;
            cnt += 1;
        }
    const double m[3][3] = {{sxx, sxy, sx}, {sxy, syy, sy}, {sx, sy, cnt}};
    const double rhs[3] = {sxv, syv, sv};
    double aug[3][4];
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) aug[i][j] = m[i][j];
        aug[i][3] = rhs[i];
    }
    bool singular = false;
    for (int col = 0; col < 3 && !singular; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(aug[r][col]) > std::abs(aug[pivot][col])) pivot = r;
        std::swap(aug[col], aug[pivot]);
        if (std::abs(aug[col][col]) < 1e-12) {
            singular = true;
            break;
        }
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = aug[r][col] / aug[col][col];
            for (int j = col; j < 4; ++j) aug[r][j] -= f * aug[col][j];
        }
    }
    if (singular) return best;  // inliers collinear: keep the sampled plane
    Plane refit;
    refit.a = aug[0][3] / aug[0][0];
    refit.b = aug[1][3] / aug[1][1];
    refit.c = aug[2][3] / aug[2][2];
    return refit;
}

TaxelGrid ransac_plane_compensate(const TaxelGrid& grid, const SensorConfig& cfg, Rng& rng) {
    TaxelGrid out = grid;
    const int n = grid.rows * grid.cols;
    std::vector<double> values(static_cast<std::size_t>(n));
    for (int comp = 0; comp < 3; ++comp) {
        for (int i = 0; i < n; ++i) {
            const Taxel& t = grid.taxels[i];
            values[i] = comp == 0 ? t.fx : comp == 1 ? t.fy : t.fz;
        }
        const Plane p = ransac_fit_plane(values, grid.rows, grid.cols, cfg.ransac_iterations,
                                         cfg.ransac_threshold, rng);
        for (int r = 0; r < grid.rows; ++r)
            for (int c = 0; c < grid.cols; ++c) {
                Taxel& t = out.at(r, c);
                const double v = p(r, c);
                if (comp == 0)
                    t.fx -= v;
                else if (comp == 1)
                    t.fy -= v;
                else
                    t.fz -= v;
            }
    }
    return out;
}

ContactSummary summarize_contacts(const TaxelGrid& left, const TaxelGrid& right,
                                  double link_length, double tip_band) {
    ContactSummary s;
    s.timestamp = left.timestamp;
    const double band = tip_band * link_length;
    for (const TaxelGrid* grid : {&left, &right}) {
        const double pitch = link_length / grid->cols;
        for (int r = 0; r < grid->rows; ++r)
            for (int c = 0; c < grid->cols; ++c) {
                const double mag = grid->at(r, c).magnitude();
                const double loc = (c + 0.5) * pitch;
                if (mag > s.peak_force) {
                    s.peak_force = mag;
                    s.peak_location = loc;
                    s.peak_region = loc <= band
                                        ? Region::Tip
                                        : (grid->side == Side::Left ? Region::Left
                                                                    : Region::Right);
                }
                if (loc <= band && mag > s.tip_force) s.tip_force = mag;
            }
    }
    return s;
}

ContactSummary TactilePipeline::process(const World& world, double time, Rng& rng) {
    auto [left, right] = sample_taxels(world, config_, rng, time);

    const long samples_per_refit = std::max(
        1L, static_cast<long>(std::lround(config_.sensor_rate / config_.compensation_rate)));
    if (sample_count_ % samples_per_refit == 0) {
        std::vector<double> values(static_cast<std::size_t>(config_.rows) * config_.cols);
        const TaxelGrid* grids[2] = {&left, &right};
        for (int g = 0; g < 2; ++g)
            for (int comp = 0; comp < 3; ++comp) {
                for (std::size_t i = 0; i < values.size(); ++i) {
                    const Taxel& t = grids[g]->taxels[i];
                    values[i] = comp == 0 ? t.fx : comp == 1 ? t.fy : t.fz;
                }
                planes_[g][comp] =
                    ransac_fit_plane(values, config_.rows, config_.cols,
                                     config_.ransac_iterations, config_.ransac_threshold, rng);
            }
        have_planes_ = true;
    }
    ++sample_count_;

    TaxelGrid* grids[2] = {&left, &right};
    if (have_planes_) {
        for (int g = 0; g < 2; ++g)
            for (int r = 0; r < config_.rows; ++r)
                for (int c = 0; c < config_.cols; ++c) {
                    Taxel& t = grids[g]->at(r, c);
                    t.fx -= planes_[g][0](r, c);
                    t.fy -= planes_[g][1](r, c);
                    t.fz -= planes_[g][2](r, c);
                }
    }

    left_ = std::move(left);
    right_ = std::move(right);
    return summarize_contacts(left_, right_, world.config().effector_length, config_.tip_band);
}

std::string contact_summary_to_json(const ContactSummary& s) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "{\"t\":%.6f,\"peak_force\":%.6f,\"peak_region\":\"%s\","
                  "\"peak_location\":%.6f,\"tip_force\":%.6f}",
                  s.timestamp, s.peak_force, to_string(s.peak_region), s.peak_location,
                  s.tip_force);
    return buf;
}

}  // namespace clutter
