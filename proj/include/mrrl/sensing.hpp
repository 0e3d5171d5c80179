#pragma once

#include <array>

#include "mrrl/dynamics.hpp"
#include "mrrl/scene.hpp"
#include "mrrl/usersim.hpp"
#include "mrrl/vec3.hpp"

namespace mrrl {

inline constexpr int kRayCount = 22;

// Observation layout, version 1. Per-ray blocks of 7 floats
// [one-hot class (5), no-hit flag, normalized distance] for 22 rays, then
// content pose/speed and user pose features. Every component lies in [-1, 1].
inline constexpr int kObservationLayoutVersion = 1;
inline constexpr int kRayBlockSize = kSemanticClassCount + 2;
inline constexpr int kObservationDim = kRayCount * kRayBlockSize + 17;  // 171

using ObservationVector = std::array<double, kObservationDim>;

struct RayFan {
    std::array<Vec3, kRayCount> directions;
    double max_length = 5.0;
};

// Deterministic spherical Fibonacci lattice (golden-angle construction).
RayFan ray_fan_directions();

struct CameraModel {
    double vertical_fov = M_PI / 3.0;  // radians
    double aspect = 16.0 / 9.0;
    double near = 0.05;  // meters
    double far = 20.0;
};

struct NormConstants {
    double user_dist_max = 10.0;  // meters; user-distance feature scale
    double max_speed = 3.0;       // m/s; content speed feature scale
};

// Casts the 22-ray fan from the content position (obstacle included as a
// hittable object of class Obstacle) and assembles the normalized layout.
ObservationVector observe(const Scene& scene, const ContentState& content, const UserState& user,
                          const ObstacleState& obstacle, const RayFan& fan,
                          const NormConstants& norms);

struct VisibilitySample {
    double f_vis = 0.0;  // unoccluded in-frustum fraction of the panel
    double occ = 0.0;    // viewport-area fraction of the clipped projection
};

// Analytic stand-in for render-texture visibility: f_vis from an 8x8 grid of
// panel points (frustum test + occlusion ray to the eye, obstacle included),
// occ from the panel's projected corners clipped to the viewport rectangle.
// The grid is sized so f_vis tracks a dense point-sampling reference within
// 0.1 absolute error on arbitrary partial-occlusion boundaries.
VisibilitySample visibility(const Scene& scene, const ContentState& content, const UserState& user,
                            const ObstacleState& obstacle, const CameraModel& camera);

// Panel corners in world space (order: -u-v, +u-v, +u+v, -u+v).
std::array<Vec3, 4> panel_corners(const ContentState& content);

}  // namespace mrrl
