#include "mrrl/sensing.hpp"

#include <cmath>
#include <vector>

namespace mrrl {

RayFan ray_fan_directions() {
    RayFan fan;
    const double golden_angle = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < kRayCount; ++i) {
        const double y = 1.0 - 2.0 * (i + 0.5) / kRayCount;
        const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
        const double phi = golden_angle * i;
        fan.directions[i] = {r * std::cos(phi), y, r * std::sin(phi)};
    }
    return fan;
}

namespace {

double clamp1(double v) { return std::clamp(v, -1.0, 1.0); }

Vec3 normalized_position(const Vec3& p, const Aabb& bounds) {
    const Vec3 c = bounds.center();
    const Vec3 h = bounds.half_extents();
    return {clamp1((p.x - c.x) / std::max(h.x, 1e-9)),
            clamp1((p.y - c.y) / std::max(h.y, 1e-9)),
            clamp1((p.z - c.z) / std::max(h.z, 1e-9))};
}

struct CameraFrame {
    Vec3 eye, fwd, right, up;
    double tan_half_v, tan_half_h;
    double near, far;

    // Camera-space coordinates: x right, y up, z forward.
    Vec3 to_camera(const Vec3& p) const {
        const Vec3 d = p - eye;
        return {d.dot(right), d.dot(up), d.dot(fwd)};
    }
    bool in_frustum(const Vec3& cam) const {
        return cam.z >= near && cam.z <= far && std::abs(cam.y) <= cam.z * tan_half_v &&
               std::abs(cam.x) <= cam.z * tan_half_h;
    }
};

CameraFrame make_frame(const UserState& user, const CameraModel& camera) {
    CameraFrame f;
    f.eye = user.eye_pos;
    f.fwd = user.forward;
    f.up = {0, 1, 0};
    f.right = f.up.cross(f.fwd);  // forward is horizontal, so this is unit
    f.tan_half_v = std::tan(camera.vertical_fov / 2.0);
    f.tan_half_h = f.tan_half_v * camera.aspect;
    f.near = camera.near;
    f.far = camera.far;
    return f;
}

struct Vec2 {
    double x, y;
};

double polygon_area(const std::vector<Vec2>& poly) {
    double acc = 0.0;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    return std::abs(acc) / 2.0;
}

// Sutherland-Hodgman pass against the half-plane keep(p) >= 0.
template <typename KeepFn, typename LerpT>
std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, KeepFn keep, LerpT lerp2) {
    std::vector<Vec2> out;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        const double ka = keep(a), kb = keep(b);
        if (ka >= 0.0) out.push_back(a);
        if ((ka >= 0.0) != (kb >= 0.0)) out.push_back(lerp2(a, b, ka / (ka - kb)));
    }
    return out;
}

std::vector<Vec2> clip_to_unit_square(std::vector<Vec2> poly) {
    auto lerp2 = [](const Vec2& a, const Vec2& b, double t) {
        return Vec2{a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
    };
    poly = clip_halfplane(poly, [](const Vec2& p) { return 1.0 - p.x; }, lerp2);
    if (poly.empty()) return poly;
    poly = clip_halfplane(poly, [](const Vec2& p) { return p.x + 1.0; }, lerp2);
    if (poly.empty()) return poly;
    poly = clip_halfplane(poly, [](const Vec2& p) { return 1.0 - p.y; }, lerp2);
    if (poly.empty()) return poly;
    poly = clip_halfplane(poly, [](const Vec2& p) { return p.y + 1.0; }, lerp2);
    return poly;
}

}  // namespace

std::array<Vec3, 4> panel_corners(const ContentState& content) {
    const Vec3 up{0, 1, 0};
    const Vec3 right = up.cross(content.facing).normalized();
    const Vec3 hu = right * (content.width / 2.0);
    const Vec3 hv = up * (content.height / 2.0);
    return {content.pos - hu - hv, content.pos + hu - hv, content.pos + hu + hv,
            content.pos - hu + hv};
}

ObservationVector observe(const Scene& scene, const ContentState& content, const UserState& user,
                          const ObstacleState& obstacle, const RayFan& fan,
                          const NormConstants& norms) {
    ObservationVector obs{};

    SceneObject obstacle_obj{SemanticClass::Obstacle, obstacle.box()};
    std::span<const SceneObject> extras =
        obstacle.active ? std::span<const SceneObject>(&obstacle_obj, 1)
                        : std::span<const SceneObject>();

    for (int i = 0; i < kRayCount; ++i) {
        const RayHit hit = raycast(scene, extras, content.pos, fan.directions[i], fan.max_length);
        double* block = obs.data() + i * kRayBlockSize;
        if (hit.hit) {
            block[static_cast<int>(hit.cls)] = 1.0;
            block[kSemanticClassCount] = 0.0;
            block[kSemanticClassCount + 1] = clamp1(hit.distance / fan.max_length);
        } else {
            block[kSemanticClassCount] = 1.0;
            block[kSemanticClassCount + 1] = 1.0;
        }
    }

    int at = kRayCount * kRayBlockSize;
    auto put3 = [&](const Vec3& v) {
        obs[at++] = clamp1(v.x);
        obs[at++] = clamp1(v.y);
        obs[at++] = clamp1(v.z);
    };
    put3(normalized_position(content.pos, scene.bounds));
    put3(content.facing);
    put3(content.facing);  // rotation duplicates facing under billboarding
    obs[at++] = clamp1(content.speed() / std::max(norms.max_speed, 1e-9));
    obs[at++] = clamp1((user.eye_pos - content.pos).norm() / std::max(norms.user_dist_max, 1e-9));
    put3(normalized_position(user.eye_pos, scene.bounds));
    put3(user.forward);
    return obs;
}

VisibilitySample visibility(const Scene& scene, const ContentState& content, const UserState& user,
                            const ObstacleState& obstacle, const CameraModel& camera) {
    VisibilitySample out;
    const CameraFrame frame = make_frame(user, camera);

    SceneObject obstacle_obj{SemanticClass::Obstacle, obstacle.box()};
    std::span<const SceneObject> extras =
        obstacle.active ? std::span<const SceneObject>(&obstacle_obj, 1)
                        : std::span<const SceneObject>();

    // f_vis: regular grid of panel sample points, each tested for frustum
    // containment and a clear line to the eye. Cell-center sampling is biased
    // by up to half a cell row per straight boundary; 8x8 keeps that under
    // the 0.1 error budget with two boundaries in play.
    const Vec3 up{0, 1, 0};
    const Vec3 right = up.cross(content.facing).normalized();
    constexpr int kGrid = 8;
    int visible = 0;
    for (int i = 0; i < kGrid; ++i) {
        for (int j = 0; j < kGrid; ++j) {
            const double fu = (i + 0.5) / kGrid - 0.5;
            const double fv = (j + 0.5) / kGrid - 0.5;
            const Vec3 p = content.pos + right * (fu * content.width) + up * (fv * content.height);
            if (!frame.in_frustum(frame.to_camera(p))) continue;
            const Vec3 to_p = p - frame.eye;
            const double dist = to_p.norm();
            if (dist > 1e-9) {
                const RayHit hit = raycast(scene, extras, frame.eye, to_p / dist, dist);
                if (hit.hit && hit.distance < dist - 1e-6) continue;
            }
            ++visible;
        }
    }
    out.f_vis = static_cast<double>(visible) / (kGrid * kGrid);

    // occ: project the corners, clip against the near plane in camera space,
    // then clip the NDC polygon to the viewport square.
    std::vector<Vec3> cam;
    for (const Vec3& c : panel_corners(content)) cam.push_back(frame.to_camera(c));

    std::vector<Vec3> front;
    for (size_t i = 0; i < cam.size(); ++i) {
        const Vec3& a = cam[i];
        const Vec3& b = cam[(i + 1) % cam.size()];
        const double ka = a.z - frame.near, kb = b.z - frame.near;
        if (ka >= 0.0) front.push_back(a);
        if ((ka >= 0.0) != (kb >= 0.0)) front.push_back(lerp(a, b, ka / (ka - kb)));
    }
    if (front.size() < 3) return out;  // entirely behind the near plane

    std::vector<Vec2> ndc;
    ndc.reserve(front.size());
    for (const Vec3& p : front)
        ndc.push_back({p.x / (p.z * frame.tan_half_h), p.y / (p.z * frame.tan_half_v)});
    const std::vector<Vec2> clipped = clip_to_unit_square(std::move(ndc));
    if (clipped.size() >= 3) out.occ = polygon_area(clipped) / 4.0;
    return out;
}

}  // namespace mrrl
