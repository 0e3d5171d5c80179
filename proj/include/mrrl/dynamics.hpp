#pragma once

#include "mrrl/rng.hpp"
#include "mrrl/scene.hpp"
#include "mrrl/vec3.hpp"

namespace mrrl {

struct ContentState {
    Vec3 pos;
    Vec3 vel;
    Vec3 facing{0, 0, 1};   // unit, horizontal (billboard yaw only)
    double width = 0.4;     // panel size, meters
    double height = 0.3;
    double thickness = 0.02;

    double speed() const { return vel.norm(); }
};

struct PhysicsParams {
    double mass = 1.0;          // kg
    double force_scale = 20.0;  // N per unit action component
    double drag = 2.0;          // 1/s
    double max_speed = 3.0;     // m/s
    double dt = 0.02;           // s (50 Hz physics)
};

// Dynamic obstacle: a 1 m cube wandering between private waypoints at constant
// speed, confined to the room at 0.5-1.8 m above the floor.
struct ObstacleState {
    Vec3 center;
    Vec3 half_extents{0.5, 0.5, 0.5};
    Vec3 vel;
    bool active = false;

    Vec3 waypoint;
    double retarget_timer = 0.0;

    OrientedBox box() const { return {center, half_extents, 0.0}; }
};

inline constexpr double kObstacleSpeed = 0.8;        // m/s
inline constexpr double kObstacleRetargetMin = 3.0;  // s
inline constexpr double kObstacleRetargetMax = 6.0;
inline constexpr double kObstacleMinHeight = 0.5;    // above floor top
inline constexpr double kObstacleMaxHeight = 1.8;

// Semi-implicit Euler with drag and a hard speed cap:
//   vel <- clamp_norm((vel + action*force_scale/mass*dt) * (1 - drag*dt), max_speed)
//   pos <- pos + vel*dt, clamped to bounds (clamped axes zero their velocity).
// Action components outside [-1, 1] are clamped; the return reports how many.
struct ForceResult {
    ContentState state;
    int clamped_components = 0;
};
ForceResult apply_force(const ContentState& content, const Vec3& action,
                        const PhysicsParams& params, const Aabb& bounds, double dt);

// Faces the panel toward the user (horizontal only). Degenerate vertical
// alignment keeps the previous facing.
ContentState billboard(const ContentState& content, const Vec3& user_eye_pos);

ObstacleState init_obstacle(const Scene& scene, RngStream& rng);
ObstacleState step_obstacle(const ObstacleState& obstacle, const Scene& scene, RngStream& rng,
                            double dt);

// Panel footprint as a yaw-oriented box (width x height x thickness).
OrientedBox content_box(const ContentState& content);

}  // namespace mrrl
