#include "mrrl/scene.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mrrl {

using json = nlohmann::ordered_json;

const char* to_string(SemanticClass c) {
    switch (c) {
        case SemanticClass::Floor: return "floor";
        case SemanticClass::Wall: return "wall";
        case SemanticClass::Ceiling: return "ceiling";
        case SemanticClass::Furniture: return "furniture";
        case SemanticClass::Obstacle: return "obstacle";
    }
    return "unknown";
}

SemanticClass semantic_class_from_string(const std::string& s) {
    if (s == "floor") return SemanticClass::Floor;
    if (s == "wall") return SemanticClass::Wall;
    if (s == "ceiling") return SemanticClass::Ceiling;
    if (s == "furniture") return SemanticClass::Furniture;
    if (s == "obstacle") return SemanticClass::Obstacle;
    throw ParseError("unknown semantic class \"" + s + "\"");
}

std::array<Vec3, 8> OrientedBox::corners() const {
    std::array<Vec3, 8> out;
    int i = 0;
    for (double sx : {-1.0, 1.0})
        for (double sy : {-1.0, 1.0})
            for (double sz : {-1.0, 1.0})
                out[i++] = to_world({sx * half_extents.x, sy * half_extents.y, sz * half_extents.z});
    return out;
}

double Scene::floor_top() const {
    double top = 0.0;
    bool found = false;
    for (const auto& obj : objects) {
        if (obj.cls != SemanticClass::Floor) continue;
        const double t = obj.box.center.y + obj.box.half_extents.y;
        if (!found || t > top) top = t;
        found = true;
    }
    return found ? top : 0.0;
}

namespace {

// Slab test in the box's local frame. Returns entry distance along the ray,
// 0 when the origin starts inside, or a negative value on miss.
double ray_box_entry(const OrientedBox& box, const Vec3& origin, const Vec3& dir, double max_dist) {
    const Vec3 o = box.to_local(origin);
    const double c = std::cos(box.yaw), s = std::sin(box.yaw);
    const Vec3 d{c * dir.x - s * dir.z, dir.y, s * dir.x + c * dir.z};

    double tmin = 0.0, tmax = max_dist;
    const double od[3] = {o.x, o.y, o.z};
    const double dd[3] = {d.x, d.y, d.z};
    const double he[3] = {box.half_extents.x, box.half_extents.y, box.half_extents.z};
    for (int a = 0; a < 3; ++a) {
        if (std::abs(dd[a]) < 1e-14) {
            if (std::abs(od[a]) > he[a]) return -1.0;
            continue;
        }
        const double inv = 1.0 / dd[a];
        double t0 = (-he[a] - od[a]) * inv;
        double t1 = (he[a] - od[a]) * inv;
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
        if (tmin > tmax) return -1.0;
    }
    return tmin;  // 0 when origin is inside (entry plane behind the origin)
}

RayHit raycast_objects(std::span<const SceneObject> objects, std::span<const SceneObject> extras,
                       const Vec3& origin, const Vec3& direction, double max_dist) {
    if (std::abs(direction.norm() - 1.0) > 1e-6)
        throw ContractViolation("raycast: direction must be a unit vector");
    if (!(max_dist > 0.0)) throw ContractViolation("raycast: max_dist must be > 0");

    RayHit best;
    double best_t = std::numeric_limits<double>::infinity();
    auto consider = [&](const SceneObject& obj) {
        const double t = ray_box_entry(obj.box, origin, direction, max_dist);
        if (t >= 0.0 && t < best_t) {
            best_t = t;
            best.hit = true;
            best.distance = t;
            best.point = origin + direction * t;
            best.cls = obj.cls;
        }
    };
    for (const auto& obj : objects) consider(obj);
    for (const auto& obj : extras) consider(obj);
    return best;
}

}  // namespace

RayHit raycast(const Scene& scene, const Vec3& origin, const Vec3& direction, double max_dist) {
    return raycast_objects(scene.objects, {}, origin, direction, max_dist);
}

RayHit raycast(const Scene& scene, std::span<const SceneObject> extras, const Vec3& origin,
               const Vec3& direction, double max_dist) {
    return raycast_objects(scene.objects, extras, origin, direction, max_dist);
}

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
    if (std::abs(a.center.y - b.center.y) > a.half_extents.y + b.half_extents.y) return false;

    // 2D SAT on the XZ footprints. Both boxes are yaw-only, so the cross-product
    // axes degenerate into these four plus Y, which is handled above.
    const double axes[4][2] = {
        {std::cos(a.yaw), -std::sin(a.yaw)},
        {std::sin(a.yaw), std::cos(a.yaw)},
        {std::cos(b.yaw), -std::sin(b.yaw)},
        {std::sin(b.yaw), std::cos(b.yaw)},
    };
    const double dx = b.center.x - a.center.x;
    const double dz = b.center.z - a.center.z;
    for (const auto& n : axes) {
        const double dist = std::abs(n[0] * dx + n[1] * dz);
        const double ra = a.half_extents.x * std::abs(n[0] * std::cos(a.yaw) - n[1] * std::sin(a.yaw)) +
                          a.half_extents.z * std::abs(n[0] * std::sin(a.yaw) + n[1] * std::cos(a.yaw));
        const double rb = b.half_extents.x * std::abs(n[0] * std::cos(b.yaw) - n[1] * std::sin(b.yaw)) +
                          b.half_extents.z * std::abs(n[0] * std::sin(b.yaw) + n[1] * std::cos(b.yaw));
        if (dist > ra + rb) return false;
    }
    return true;
}

bool overlaps(const Scene& scene, const OrientedBox& box) {
    if (!(box.half_extents.x > 0 && box.half_extents.y > 0 && box.half_extents.z > 0))
        throw ContractViolation("overlaps: box half_extents must be > 0");
    for (const auto& obj : scene.objects) {
        OrientedBox other = obj.box;
        if (obj.cls == SemanticClass::Floor) {
            // Drop the top 1 cm so resting contact does not register.
            const double shave = kFloorRestTolerance * 0.5;
            if (other.half_extents.y <= shave) continue;
            other.half_extents.y -= shave;
            other.center.y -= shave;
        }
        if (boxes_overlap(other, box)) return true;
    }
    return false;
}

namespace {

Vec3 vec3_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3) throw ParseError(field + " must be a 3-element array");
    for (const auto& v : j)
        if (!v.is_number()) throw ParseError(field + " must contain numbers");
    Vec3 out{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    if (!std::isfinite(out.x) || !std::isfinite(out.y) || !std::isfinite(out.z))
        throw ParseError(field + " must be finite");
    return out;
}

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok) throw ParseError("unknown key \"" + it.key() + "\" in " + where);
    }
}

}  // namespace

Scene parse_scene_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed scene JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("scene file must be a JSON object");
    reject_unknown_keys(j, {"name", "bounds", "objects"}, "scene");

    Scene scene;
    if (!j.contains("name") || !j["name"].is_string()) throw ParseError("name must be a string");
    scene.name = j["name"].get<std::string>();

    if (!j.contains("bounds") || !j["bounds"].is_object()) throw ParseError("bounds must be an object");
    reject_unknown_keys(j["bounds"], {"min", "max"}, "bounds");
    scene.bounds.min = vec3_from_json(j["bounds"]["min"], "bounds.min");
    scene.bounds.max = vec3_from_json(j["bounds"]["max"], "bounds.max");

    if (!j.contains("objects") || !j["objects"].is_array()) throw ParseError("objects must be an array");
    for (const auto& jo : j["objects"]) {
        if (!jo.is_object()) throw ParseError("objects entries must be objects");
        reject_unknown_keys(jo, {"class", "center", "half_extents", "yaw"}, "object");
        SceneObject obj;
        if (!jo.contains("class") || !jo["class"].is_string())
            throw ParseError("object class must be a string");
        obj.cls = semantic_class_from_string(jo["class"].get<std::string>());
        obj.box.center = vec3_from_json(jo.at("center"), "center");
        obj.box.half_extents = vec3_from_json(jo.at("half_extents"), "half_extents");
        if (!jo.contains("yaw") || !jo["yaw"].is_number()) throw ParseError("yaw must be a number");
        obj.box.yaw = jo["yaw"].get<double>();
        if (!std::isfinite(obj.box.yaw)) throw ParseError("yaw must be finite");
        obj.box.yaw = wrap_angle(obj.box.yaw);
        scene.objects.push_back(obj);
    }
    validate_scene(scene);
    return scene;
}

std::string scene_to_json(const Scene& scene) {
    json j;
    j["name"] = scene.name;
    j["bounds"] = {{"min", vec3_to_json(scene.bounds.min)}, {"max", vec3_to_json(scene.bounds.max)}};
    j["objects"] = json::array();
    for (const auto& obj : scene.objects) {
        j["objects"].push_back({{"class", to_string(obj.cls)},
                                {"center", vec3_to_json(obj.box.center)},
                                {"half_extents", vec3_to_json(obj.box.half_extents)},
                                {"yaw", obj.box.yaw}});
    }
    return j.dump(2);
}

Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scene file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scene_json(ss.str());
}

void save_scene(const Scene& scene, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write scene file: " + path);
    out << scene_to_json(scene) << "\n";
}

void validate_scene(const Scene& scene) {
    int floors = 0, walls = 0;
    for (size_t i = 0; i < scene.objects.size(); ++i) {
        const auto& obj = scene.objects[i];
        const Vec3& he = obj.box.half_extents;
        if (!(he.x > 0 && he.y > 0 && he.z > 0))
            throw ParseError("object " + std::to_string(i) + ": half_extents must be > 0");
        if (obj.box.yaw < -M_PI || obj.box.yaw >= M_PI)
            throw ParseError("object " + std::to_string(i) + ": yaw must lie in [-pi, pi)");
        for (const Vec3& c : obj.box.corners())
            if (!scene.bounds.contains(c, 1e-9))
                throw ParseError("object " + std::to_string(i) + ": vertex outside scene bounds");
        if (obj.cls == SemanticClass::Floor) ++floors;
        if (obj.cls == SemanticClass::Wall) ++walls;
    }
    if (floors < 1) throw ParseError("scene must contain at least 1 floor object");
    if (walls < 4) throw ParseError("scene must contain at least 4 wall objects");
}

Scene generate_scene(uint64_t seed, const SceneGenParams& params) {
    if (params.min_width < 3.0 || params.min_depth < 3.0 || params.min_height < 2.5)
        throw ContractViolation("generate_scene: room dims must be at least 3 x 2.5 x 3 m");
    if (params.max_width < params.min_width || params.max_height < params.min_height ||
        params.max_depth < params.min_depth)
        throw ContractViolation("generate_scene: dimension ranges must be non-empty");
    if (params.min_furniture < 0 || params.max_furniture < params.min_furniture)
        throw ContractViolation("generate_scene: bad furniture range");

    RngStream rng(derive_seed(seed, "scene-gen"));
    const double width = rng.uniform(params.min_width, params.max_width);
    const double height = rng.uniform(params.min_height, params.max_height);
    const double depth = rng.uniform(params.min_depth, params.max_depth);
    const double hw = width / 2.0, hd = depth / 2.0;
    constexpr double wall_t = 0.1;   // wall/slab thickness
    constexpr double corridor = 0.8;

    Scene scene;
    scene.name = "generated-" + std::to_string(seed);
    scene.bounds.min = {-hw - wall_t, -wall_t, -hd - wall_t};
    scene.bounds.max = {hw + wall_t, height + wall_t, hd + wall_t};

    auto add = [&](SemanticClass cls, Vec3 center, Vec3 he, double yaw = 0.0) {
        scene.objects.push_back({cls, {center, he, yaw}});
    };
    const double half_t = wall_t / 2.0;
    add(SemanticClass::Floor, {0, -half_t, 0}, {hw + wall_t, half_t, hd + wall_t});
    add(SemanticClass::Ceiling, {0, height + half_t, 0}, {hw + wall_t, half_t, hd + wall_t});
    add(SemanticClass::Wall, {hw + half_t, height / 2, 0}, {half_t, height / 2, hd + wall_t});
    add(SemanticClass::Wall, {-hw - half_t, height / 2, 0}, {half_t, height / 2, hd + wall_t});
    add(SemanticClass::Wall, {0, height / 2, hd + half_t}, {hw + wall_t, height / 2, half_t});
    add(SemanticClass::Wall, {0, height / 2, -hd - half_t}, {hw + wall_t, height / 2, half_t});

    const int count = params.min_furniture + rng.uniform_int(params.max_furniture - params.min_furniture + 1);
    std::vector<OrientedBox> furniture;
    for (int n = 0; n < count; ++n) {
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            OrientedBox box;
            box.half_extents = {rng.uniform(0.2, 0.5), rng.uniform(0.2, 0.6), rng.uniform(0.2, 0.5)};
            box.yaw = rng.uniform(-M_PI, M_PI);
            // Pieces may sit near walls; the walkable 0.8 m corridor is kept
            // between furniture pieces.
            const double r = std::hypot(box.half_extents.x, box.half_extents.z);
            const double margin_x = hw - 0.4 - r;
            const double margin_z = hd - 0.4 - r;
            if (margin_x <= 0 || margin_z <= 0) continue;
            box.center = {rng.uniform(-margin_x, margin_x), box.half_extents.y,
                          rng.uniform(-margin_z, margin_z)};

            bool clear = true;
            for (const auto& other : furniture) {
                OrientedBox a = box, b = other;
                a.half_extents.x += corridor / 2;
                a.half_extents.z += corridor / 2;
                b.half_extents.x += corridor / 2;
                b.half_extents.z += corridor / 2;
                if (boxes_overlap(a, b)) { clear = false; break; }
            }
            if (clear) {
                furniture.push_back(box);
                placed = true;
            }
        }
        if (!placed)
            throw GenerationError("generate_scene: could not place furniture piece " +
                                  std::to_string(n) + " after 1000 tries");
    }
    for (const auto& box : furniture) scene.objects.push_back({SemanticClass::Furniture, box});

    validate_scene(scene);
    return scene;
}

Vec3 sample_free_point(const Scene& scene, RngStream& rng, double clearance) {
    if (clearance < 0.0) throw ContractViolation("sample_free_point: clearance must be >= 0");
    const double c = std::max(clearance, 1e-9);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        Vec3 p{rng.uniform(scene.bounds.min.x, scene.bounds.max.x),
               rng.uniform(scene.bounds.min.y, scene.bounds.max.y),
               rng.uniform(scene.bounds.min.z, scene.bounds.max.z)};
        if (!overlaps(scene, OrientedBox{p, {c, c, c}, 0.0})) return p;
    }
    throw SamplingError("sample_free_point: no free point after 10000 tries (clearance " +
                        std::to_string(clearance) + ")");
}

}  // namespace mrrl
