#pragma once

#include <vector>

#include "mrrl/rng.hpp"
#include "mrrl/scene.hpp"
#include "mrrl/vec3.hpp"

namespace mrrl {

// Minimum distance kept between grid points / walked segments and any
// non-floor object.
inline constexpr double kGridClearance = 0.3;

struct UserSimParams {
    double walk_speed = 1.0;        // m/s
    double dwell_min = 2.0;         // s
    double dwell_max = 5.0;         // s
    double turn_rate = M_PI;        // rad/s while settling into a dwell facing
};

// Candidate eye positions on an (x, z) lattice crossed with eye heights, plus
// the straight segments between them that pass a swept clearance test. Built
// once per scene and shared read-only between environment instances.
struct WaypointGrid {
    std::vector<Vec3> points;
    double spacing = 0.5;
    std::vector<double> heights;                    // above the floor top
    std::vector<std::vector<int>> reachable;        // per-point walkable partners
};

// Lattice anchored at bounds.min with the given spacing; a point survives if
// its clearance sphere misses every non-floor object. Throws GridError when no
// point survives.
WaypointGrid build_grid(const Scene& scene, double spacing, const std::vector<double>& heights);

// True when every sample along a->b keeps kGridClearance from non-floor objects.
bool segment_clear(const Scene& scene, const Vec3& a, const Vec3& b);

struct UserState {
    Vec3 eye_pos;
    Vec3 forward{0, 0, 1};          // horizontal unit vector
    bool moving = false;            // translated during the last step
    double dwell_remaining = 0.0;

    // Walk bookkeeping.
    int waypoint = -1;              // index of the current / last reached grid point
    int target_waypoint = -1;
    Vec3 target_facing{0, 0, 1};    // facing settled into during the next dwell
    bool walking = false;
};

// Places the user at a random waypoint with a random facing and a fresh dwell.
UserState init_user(const WaypointGrid& grid, const UserSimParams& params, RngStream& rng);

// One dwell/walk cycle step. Dwelling decrements the timer and turns toward
// the sampled facing; expiry picks a random reachable waypoint plus a random
// facing to adopt on arrival; walking translates along the straight segment at
// walk_speed, facing the travel direction.
UserState step_user(const UserState& state, const WaypointGrid& grid, const UserSimParams& params,
                    RngStream& rng, double dt);

}  // namespace mrrl
