#include "mrrl/dynamics.hpp"

#include <cmath>

namespace mrrl {

ForceResult apply_force(const ContentState& content, const Vec3& action,
                        const PhysicsParams& params, const Aabb& bounds, double dt) {
    ForceResult out;
    out.state = content;

    Vec3 a = action;
    for (double* c : {&a.x, &a.y, &a.z}) {
        if (*c < -1.0 || *c > 1.0) {
            *c = std::clamp(*c, -1.0, 1.0);
            ++out.clamped_components;
        }
    }

    ContentState& s = out.state;
    s.vel = (s.vel + a * (params.force_scale / params.mass) * dt) * (1.0 - params.drag * dt);
    const double speed = s.vel.norm();
    if (speed > params.max_speed) s.vel *= params.max_speed / speed;

    s.pos += s.vel * dt;
    const Vec3 clamped = bounds.clamp_point(s.pos);
    if (clamped.x != s.pos.x) s.vel.x = 0.0;
    if (clamped.y != s.pos.y) s.vel.y = 0.0;
    if (clamped.z != s.pos.z) s.vel.z = 0.0;
    s.pos = clamped;
    return out;
}

ContentState billboard(const ContentState& content, const Vec3& user_eye_pos) {
    ContentState s = content;
    const Vec3 h = (user_eye_pos - content.pos).horizontal();
    if (h.norm() >= 1e-6) s.facing = h.normalized();
    return s;
}

namespace {

Vec3 sample_obstacle_waypoint(const Scene& scene, const Vec3& from, RngStream& rng) {
    const double floor_y = scene.floor_top();
    const double y_lo = std::max(scene.bounds.min.y, floor_y + kObstacleMinHeight);
    const double y_hi = std::min(scene.bounds.max.y, floor_y + kObstacleMaxHeight);
    for (int i = 0; i < 100; ++i) {
        Vec3 p{rng.uniform(scene.bounds.min.x, scene.bounds.max.x),
               rng.uniform(y_lo, std::max(y_lo, y_hi)),
               rng.uniform(scene.bounds.min.z, scene.bounds.max.z)};
        if ((p - from).norm() > 0.1) return p;
    }
    return from;  // degenerate room; obstacle parks
}

}  // namespace

ObstacleState init_obstacle(const Scene& scene, RngStream& rng) {
    ObstacleState s;
    s.active = true;
    const double floor_y = scene.floor_top();
    const double y_lo = std::max(scene.bounds.min.y, floor_y + kObstacleMinHeight);
    const double y_hi = std::min(scene.bounds.max.y, floor_y + kObstacleMaxHeight);
    for (int i = 0; i < 10000; ++i) {
        Vec3 p{rng.uniform(scene.bounds.min.x, scene.bounds.max.x),
               rng.uniform(y_lo, std::max(y_lo, y_hi)),
               rng.uniform(scene.bounds.min.z, scene.bounds.max.z)};
        if (!overlaps(scene, OrientedBox{p, s.half_extents, 0.0})) {
            s.center = p;
            s.waypoint = sample_obstacle_waypoint(scene, p, rng);
            s.retarget_timer = rng.uniform(kObstacleRetargetMin, kObstacleRetargetMax);
            s.vel = (s.waypoint - s.center).normalized() * kObstacleSpeed;
            return s;
        }
    }
    throw SamplingError("init_obstacle: no free spot for the obstacle cube");
}

ObstacleState step_obstacle(const ObstacleState& obstacle, const Scene& scene, RngStream& rng,
                            double dt) {
    if (!obstacle.active) return obstacle;
    ObstacleState s = obstacle;

    s.retarget_timer -= dt;
    if (s.retarget_timer <= 0.0) {
        s.waypoint = sample_obstacle_waypoint(scene, s.center, rng);
        s.retarget_timer = rng.uniform(kObstacleRetargetMin, kObstacleRetargetMax);
    }

    // Chain through waypoint arrivals so each step covers exactly speed*dt of path.
    double remaining = kObstacleSpeed * dt;
    for (int guard = 0; guard < 8 && remaining > 0.0; ++guard) {
        const Vec3 delta = s.waypoint - s.center;
        const double dist = delta.norm();
        if (dist <= remaining) {
            s.center = s.waypoint;
            remaining -= dist;
            s.waypoint = sample_obstacle_waypoint(scene, s.center, rng);
            s.retarget_timer = rng.uniform(kObstacleRetargetMin, kObstacleRetargetMax);
            if ((s.waypoint - s.center).norm() < 1e-12) break;
        } else {
            s.center += delta * (remaining / dist);
            remaining = 0.0;
        }
    }
    s.center = scene.bounds.clamp_point(s.center);
    s.vel = (s.waypoint - s.center).normalized() * kObstacleSpeed;
    return s;
}

OrientedBox content_box(const ContentState& content) {
    return {content.pos,
            {content.width / 2.0, content.height / 2.0, content.thickness / 2.0},
            std::atan2(content.facing.x, content.facing.z)};
}

}  // namespace mrrl
