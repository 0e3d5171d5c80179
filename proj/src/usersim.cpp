#include "mrrl/usersim.hpp"

#include <cmath>

namespace mrrl {

namespace {

bool point_clear(const Scene& scene, const Vec3& p, double clearance) {
    for (const auto& obj : scene.objects) {
        if (obj.cls == SemanticClass::Floor) continue;
        if (obj.box.distance_to(p) < clearance) return false;
    }
    return true;
}

Vec3 random_horizontal(RngStream& rng) {
    const double a = rng.uniform(-M_PI, M_PI);
    return {std::sin(a), 0.0, std::cos(a)};
}

// Shortest-arc yaw rotation of `from` toward `to`, limited to max_step radians.
Vec3 turn_toward(const Vec3& from, const Vec3& to, double max_step) {
    const double a0 = std::atan2(from.x, from.z);
    const double a1 = std::atan2(to.x, to.z);
    double delta = wrap_angle(a1 - a0);
    delta = std::clamp(delta, -max_step, max_step);
    const double a = a0 + delta;
    return {std::sin(a), 0.0, std::cos(a)};
}

}  // namespace

bool segment_clear(const Scene& scene, const Vec3& a, const Vec3& b) {
    const double len = (b - a).norm();
    const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.1)));
    for (const auto& obj : scene.objects) {
        if (obj.cls == SemanticClass::Floor) continue;
        // Cheap reject: segment entirely outside the object's inflated sphere.
        const double reach = obj.box.half_extents.norm() + kGridClearance;
        const Vec3 mid = lerp(a, b, 0.5);
        if ((mid - obj.box.center).norm() > reach + len / 2) continue;
        for (int k = 0; k <= steps; ++k) {
            const Vec3 p = lerp(a, b, static_cast<double>(k) / steps);
            if (obj.box.distance_to(p) < kGridClearance) return false;
        }
    }
    return true;
}

WaypointGrid build_grid(const Scene& scene, double spacing, const std::vector<double>& heights) {
    if (!(spacing > 0.0)) throw ContractViolation("build_grid: spacing must be > 0");
    if (heights.empty()) throw ContractViolation("build_grid: heights must be non-empty");

    WaypointGrid grid;
    grid.spacing = spacing;
    grid.heights = heights;

    const double floor_y = scene.floor_top();
    for (double h : heights) {
        const double y = floor_y + h;
        if (y < scene.bounds.min.y || y > scene.bounds.max.y) continue;
        for (double x = scene.bounds.min.x; x <= scene.bounds.max.x + 1e-9; x += spacing) {
            for (double z = scene.bounds.min.z; z <= scene.bounds.max.z + 1e-9; z += spacing) {
                const Vec3 p{x, y, z};
                if (point_clear(scene, p, kGridClearance)) grid.points.push_back(p);
            }
        }
    }
    if (grid.points.empty()) throw GridError("build_grid: no waypoint passed the clearance test");

    const int n = static_cast<int>(grid.points.size());
    grid.reachable.assign(n, {});
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (segment_clear(scene, grid.points[i], grid.points[j])) {
                grid.reachable[i].push_back(j);
                grid.reachable[j].push_back(i);
            }
        }
    }
    return grid;
}

UserState init_user(const WaypointGrid& grid, const UserSimParams& params, RngStream& rng) {
    UserState s;
    s.waypoint = rng.uniform_int(static_cast<int>(grid.points.size()));
    s.eye_pos = grid.points[s.waypoint];
    s.forward = random_horizontal(rng);
    s.target_facing = s.forward;
    s.dwell_remaining = rng.uniform(params.dwell_min, params.dwell_max);
    s.walking = false;
    s.moving = false;
    return s;
}

UserState step_user(const UserState& state, const WaypointGrid& grid, const UserSimParams& params,
                    RngStream& rng, double dt) {
    if (!(dt > 0.0)) throw ContractViolation("step_user: dt must be > 0");
    UserState s = state;
    const Vec3 old_pos = s.eye_pos;

    if (s.walking) {
        const Vec3 target = grid.points[s.target_waypoint];
        const Vec3 delta = target - s.eye_pos;
        const double dist = delta.norm();
        const double step = params.walk_speed * dt;
        const Vec3 travel_dir = delta.horizontal().normalized();
        if (travel_dir.norm_sq() > 0.0) s.forward = travel_dir;
        if (step >= dist) {
            s.eye_pos = target;
            s.waypoint = s.target_waypoint;
            s.target_waypoint = -1;
            s.walking = false;
            s.dwell_remaining = rng.uniform(params.dwell_min, params.dwell_max);
        } else {
            s.eye_pos += delta * (step / dist);
        }
    } else {
        s.dwell_remaining -= dt;
        s.forward = turn_toward(s.forward, s.target_facing, params.turn_rate * dt);
        if (s.dwell_remaining <= 0.0) {
            const auto& partners = grid.reachable[s.waypoint];
            if (partners.empty()) {
                // Isolated waypoint: dwell again rather than walk through geometry.
                s.dwell_remaining = rng.uniform(params.dwell_min, params.dwell_max);
            } else {
                s.target_waypoint = partners[rng.uniform_int(static_cast<int>(partners.size()))];
                s.target_facing = random_horizontal(rng);
                s.walking = true;
            }
        }
    }

    s.moving = (s.eye_pos - old_pos).norm() > 1e-9;
    return s;
}

}  // namespace mrrl
