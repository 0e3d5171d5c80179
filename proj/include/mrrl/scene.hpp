#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mrrl/errors.hpp"
#include "mrrl/rng.hpp"
#include "mrrl/vec3.hpp"

namespace mrrl {

// One-hot indices used by the ray sensor; order is part of the observation layout.
enum class SemanticClass : int { Floor = 0, Wall = 1, Ceiling = 2, Furniture = 3, Obstacle = 4 };
inline constexpr int kSemanticClassCount = 5;

const char* to_string(SemanticClass c);
SemanticClass semantic_class_from_string(const std::string& s);  // throws ParseError

// Box rotated about +Y only. Local axes for yaw t:
//   u = (cos t, 0, -sin t)   width
//   v = (0, 1, 0)            height
//   w = (sin t, 0, cos t)    depth (facing)
struct OrientedBox {
    Vec3 center;
    Vec3 half_extents;
    double yaw = 0.0;

    Vec3 axis_u() const { return {std::cos(yaw), 0.0, -std::sin(yaw)}; }
    Vec3 axis_w() const { return {std::sin(yaw), 0.0, std::cos(yaw)}; }

    // World point into the box frame (center origin, axes u/v/w).
    Vec3 to_local(const Vec3& p) const {
        const Vec3 d = p - center;
        const double c = std::cos(yaw), s = std::sin(yaw);
        return {c * d.x - s * d.z, d.y, s * d.x + c * d.z};
    }
    Vec3 to_world(const Vec3& local) const {
        const double c = std::cos(yaw), s = std::sin(yaw);
        return center + Vec3{c * local.x + s * local.z, local.y, -s * local.x + c * local.z};
    }

    bool contains(const Vec3& p) const {
        const Vec3 q = to_local(p);
        return std::abs(q.x) <= half_extents.x && std::abs(q.y) <= half_extents.y &&
               std::abs(q.z) <= half_extents.z;
    }

    // Euclidean distance from p to the box surface; 0 inside.
    double distance_to(const Vec3& p) const {
        const Vec3 q = to_local(p);
        const Vec3 c = clamp(q, -half_extents, half_extents);
        return (q - c).norm();
    }

    std::array<Vec3, 8> corners() const;
};

struct SceneObject {
    SemanticClass cls = SemanticClass::Furniture;
    OrientedBox box;
};

struct Scene {
    std::string name;
    Aabb bounds;
    std::vector<SceneObject> objects;

    // Highest top face among Floor objects; the walkable reference height.
    double floor_top() const;
};

struct RayHit {
    bool hit = false;
    double distance = 0.0;
    Vec3 point;
    SemanticClass cls = SemanticClass::Floor;
};

// Nearest intersection with any object's box within max_dist. Ties go to the
// lowest object index. A ray starting inside geometry hits at distance zero,
// so a sensor that has penetrated an object cannot see through it.
// Throws ContractViolation if |direction| != 1 (1e-6) or max_dist <= 0.
RayHit raycast(const Scene& scene, const Vec3& origin, const Vec3& direction, double max_dist);
// Same, with extra transient boxes (the dynamic obstacle) tested after the
// scene objects.
RayHit raycast(const Scene& scene, std::span<const SceneObject> extras, const Vec3& origin,
               const Vec3& direction, double max_dist);

// Separating-axis test for two vertical-yaw boxes: a shared Y interval check
// plus the 2D rectangle SAT in the XZ plane.
bool boxes_overlap(const OrientedBox& a, const OrientedBox& b);

// True iff box intersects any scene object. Contact with a Floor counts only
// past a 1 cm penetration so resting on the floor is not an overlap.
bool overlaps(const Scene& scene, const OrientedBox& box);

inline constexpr double kFloorRestTolerance = 0.01;

struct SceneGenParams {
    double min_width = 6.0, max_width = 9.0;    // x extent of the room interior
    double min_height = 2.6, max_height = 3.2;  // y
    double min_depth = 5.0, max_depth = 8.0;    // z
    int min_furniture = 2, max_furniture = 5;
};

// Deterministic procedural room: floor, ceiling, four walls, and furniture
// boxes separated by at least 0.8 m walkable corridors (also kept off walls).
// Throws GenerationError if packing fails after 1,000 rejection samples per
// piece, ContractViolation if params ask for rooms below 3 x 2.5 x 3 m.
Scene generate_scene(uint64_t seed, const SceneGenParams& params = {});

// Scene JSON schema (meters/radians, Y-up, right-handed):
//   { "name": str,
//     "bounds": {"min": [x,y,z], "max": [x,y,z]},
//     "objects": [{"class": "floor|wall|ceiling|furniture|obstacle",
//                  "center": [..], "half_extents": [..], "yaw": f}] }
Scene load_scene(const std::string& path);
void save_scene(const Scene& scene, const std::string& path);
Scene parse_scene_json(const std::string& text);  // exposed for in-memory tests
std::string scene_to_json(const Scene& scene);

// Enforces the Scene invariants (>=1 floor, >=4 walls, positive extents,
// bounds enclosing every vertex). Throws ParseError naming the violation.
void validate_scene(const Scene& scene);

// Uniform rejection sampling of a point whose clearance cube (the bounding box
// of the clearance sphere) is free of scene objects. Throws SamplingError
// after 10,000 failed tries.
Vec3 sample_free_point(const Scene& scene, RngStream& rng, double clearance);

}  // namespace mrrl
