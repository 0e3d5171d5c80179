#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mrrl/scene.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace mrrl;
using test::march_raycast;
using test::random_box_scene;
using test::random_unit;

TEST_SUITE("scene") {

TEST_CASE("raycast hits an axis-aligned slab at the exact distance") {
    Scene scene;
    scene.bounds = {{-10, -10, -10}, {10, 10, 10}};
    scene.objects.push_back(
        {SemanticClass::Furniture, {{1.5, 1.0, 0.0}, {0.5, 1.0, 1.0}, 0.0}});  // x in [1,2]

    const RayHit hit = raycast(scene, {0, 1, 0}, {1, 0, 0}, 10.0);
    REQUIRE(hit.hit);
    CHECK(hit.distance == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hit.point.x == doctest::Approx(1.0));
    CHECK(hit.point.y == doctest::Approx(1.0));
    CHECK(hit.cls == SemanticClass::Furniture);

    // Same box, ray pointing up: exits the box's y range without entering x range.
    const RayHit miss = raycast(scene, {0, 1, 0}, {0, 1, 0}, 10.0);
    CHECK_FALSE(miss.hit);
}

TEST_CASE("raycast contract violations") {
    Scene scene = test::empty_room(6, 3, 6);
    CHECK_THROWS_AS(raycast(scene, {0, 1, 0}, {1, 1, 0}, 5.0), ContractViolation);
    CHECK_THROWS_AS(raycast(scene, {0, 1, 0}, {1, 0, 0}, 0.0), ContractViolation);
}

TEST_CASE("raycast from inside an object reports distance zero") {
    Scene scene;
    scene.bounds = {{-10, -10, -10}, {10, 10, 10}};
    scene.objects.push_back({SemanticClass::Wall, {{0, 0, 0}, {1, 1, 1}, 0.4}});
    const RayHit hit = raycast(scene, {0.1, 0.2, -0.1}, {0, 0, 1}, 5.0);
    REQUIRE(hit.hit);
    CHECK(hit.distance == 0.0);
    CHECK(hit.point == Vec3{0.1, 0.2, -0.1});
}

TEST_CASE("raycast ties break toward the lowest object index") {
    Scene scene;
    scene.bounds = {{-10, -10, -10}, {10, 10, 10}};
    scene.objects.push_back({SemanticClass::Wall, {{2.0, 0, 0}, {1, 1, 1}, 0.0}});
    scene.objects.push_back({SemanticClass::Furniture, {{2.0, 0, 0}, {1, 1, 1}, 0.0}});
    const RayHit hit = raycast(scene, {0, 0, 0}, {1, 0, 0}, 10.0);
    REQUIRE(hit.hit);
    CHECK(hit.cls == SemanticClass::Wall);
}

TEST_CASE("raycast agrees with the 1 mm marching oracle on random rays") {
    RngStream rng(42);
    const Scene scene = random_box_scene(rng, 20);
    constexpr double kMaxDist = 3.0;

    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const Vec3 origin{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const Vec3 dir = random_unit(rng);
        const RayHit fast = raycast(scene, origin, dir, kMaxDist);
        const RayHit slow = march_raycast(scene, origin, dir, kMaxDist);

        if (fast.hit && slow.hit) {
            CHECK(std::abs(fast.distance - slow.distance) <= 0.002);
            ++checked;
        } else if (fast.hit && !slow.hit) {
            // The oracle cannot resolve chords shorter than its 1 mm step or
            // entries right at max_dist.
            const bool grazing =
                fast.distance > kMaxDist - 0.002 ||
                !march_raycast(scene, origin + dir * (fast.distance + 0.0005), dir, 0.002).hit;
            const Vec3 probe = origin + dir * (fast.distance + 0.0005);
            bool inside = false;
            for (const auto& obj : scene.objects) inside = inside || obj.box.contains(probe);
            CHECK((grazing || !inside));
        } else {
            // A miss while the oracle hit would be a real defect.
            CHECK(fast.hit == slow.hit);
        }
    }
    CHECK(checked > 200);  // the sweep actually exercised hits
}

TEST_CASE("raycast distance is monotone in max_dist") {
    RngStream rng(7);
    const Scene scene = random_box_scene(rng, 10);
    for (int i = 0; i < 200; ++i) {
        const Vec3 origin{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const Vec3 dir = random_unit(rng);
        const RayHit full = raycast(scene, origin, dir, 6.0);
        const RayHit shorter = raycast(scene, origin, dir, 3.0);
        if (full.hit && full.distance <= 3.0) {
            REQUIRE(shorter.hit);
            CHECK(shorter.distance == full.distance);
        }
    }
}

TEST_CASE("overlaps detects containment and respects separation") {
    Scene scene;
    scene.bounds = {{-10, -10, -10}, {10, 10, 10}};
    scene.objects.push_back({SemanticClass::Furniture, {{0, 1, 0}, {1, 1, 1}, 0.3}});

    CHECK(overlaps(scene, {{0, 1, 0}, {0.2, 0.1, 0.05}, 1.0}));
    CHECK_FALSE(overlaps(scene, {{3.0, 1, 0}, {0.2, 0.1, 0.05}, 1.0}));
}

TEST_CASE("boxes_overlap agrees with a Monte-Carlo containment oracle") {
    RngStream rng(1234);
    int disagreements = 0;
    for (int pair = 0; pair < 500; ++pair) {
        OrientedBox a{{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)},
                      {rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)},
                      rng.uniform(-M_PI, M_PI)};
        OrientedBox b{{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)},
                      {rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)},
                      rng.uniform(-M_PI, M_PI)};

        // Sample 10,000 points inside a and test containment in b.
        int contained = 0;
        for (int s = 0; s < 10000; ++s) {
            const Vec3 local{rng.uniform(-a.half_extents.x, a.half_extents.x),
                             rng.uniform(-a.half_extents.y, a.half_extents.y),
                             rng.uniform(-a.half_extents.z, a.half_extents.z)};
            if (b.contains(a.to_world(local))) ++contained;
        }
        const bool sat = boxes_overlap(a, b);
        const bool sampled = contained > 0;
        if (sat != sampled) {
            // A sampled interior point is a hard witness, so SAT may never
            // miss one. SAT-true with zero samples is allowed only for sliver
            // overlaps; certify the sliver with a dense draw over the AABB
            // intersection (resolves volumes well below the oracle's grain).
            REQUIRE(sat);
            Aabb wa{{1e9, 1e9, 1e9}, {-1e9, -1e9, -1e9}};
            Aabb wb = wa;
            for (const Vec3& c : a.corners()) wa.expand(c);
            for (const Vec3& c : b.corners()) wb.expand(c);
            const Vec3 lo{std::max(wa.min.x, wb.min.x), std::max(wa.min.y, wb.min.y),
                          std::max(wa.min.z, wb.min.z)};
            const Vec3 hi{std::min(wa.max.x, wb.max.x), std::min(wa.max.y, wb.max.y),
                          std::min(wa.max.z, wb.max.z)};
            REQUIRE(lo.x <= hi.x);
            REQUIRE(lo.y <= hi.y);
            REQUIRE(lo.z <= hi.z);
            const double box_vol = (hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z);
            int dense_hits = 0;
            constexpr int kDense = 1'000'000;
            for (int s = 0; s < kDense; ++s) {
                const Vec3 p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y),
                             rng.uniform(lo.z, hi.z)};
                if (a.contains(p) && b.contains(p)) ++dense_hits;
            }
            const double volume_estimate = box_vol * dense_hits / kDense;
            CHECK(volume_estimate < 1e-4);
            ++disagreements;
        }
    }
    CHECK(disagreements <= 25);
}

TEST_CASE("overlaps is symmetric for identical geometry") {
    RngStream rng(5);
    for (int i = 0; i < 200; ++i) {
        OrientedBox a{{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)},
                      {rng.uniform(0.1, 1), rng.uniform(0.1, 1), rng.uniform(0.1, 1)},
                      rng.uniform(-M_PI, M_PI)};
        OrientedBox b{{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)},
                      {rng.uniform(0.1, 1), rng.uniform(0.1, 1), rng.uniform(0.1, 1)},
                      rng.uniform(-M_PI, M_PI)};
        CHECK(boxes_overlap(a, b) == boxes_overlap(b, a));
    }
}

TEST_CASE("floor resting tolerance ignores shallow floor contact") {
    const Scene scene = test::empty_room(6, 3, 6);
    // Panel resting 5 mm into the floor: not an overlap.
    CHECK_FALSE(overlaps(scene, {{0, 0.145, 0}, {0.2, 0.15, 0.01}, 0.0}));
    // 2 cm penetration is.
    CHECK(overlaps(scene, {{0, 0.13, 0}, {0.2, 0.15, 0.01}, 0.0}));
}

TEST_CASE("generate_scene is deterministic and honors furniture count 0") {
    const Scene a = generate_scene(42);
    const Scene b = generate_scene(42);
    CHECK(scene_to_json(a) == scene_to_json(b));

    SceneGenParams empty;
    empty.min_furniture = empty.max_furniture = 0;
    const Scene room = generate_scene(3, empty);
    CHECK(room.objects.size() == 6);
}

TEST_CASE("generate_scene seed sweep keeps invariants and furniture separation") {
    for (uint64_t seed = 0; seed < 100; ++seed) {
        const Scene scene = generate_scene(seed);
        CHECK_NOTHROW(validate_scene(scene));

        std::vector<OrientedBox> furniture;
        for (const auto& obj : scene.objects)
            if (obj.cls == SemanticClass::Furniture) furniture.push_back(obj.box);
        for (size_t i = 0; i < furniture.size(); ++i)
            for (size_t j = i + 1; j < furniture.size(); ++j)
                CHECK_FALSE(boxes_overlap(furniture[i], furniture[j]));
    }
}

TEST_CASE("generate_scene rejects undersized rooms") {
    SceneGenParams params;
    params.min_width = 2.0;
    CHECK_THROWS_AS(generate_scene(0, params), ContractViolation);
}

TEST_CASE("scene JSON round trip and parse errors") {
    const Scene scene = generate_scene(7);
    const std::string path = "/tmp/mrrl_test_scene.json";
    save_scene(scene, path);
    const Scene loaded = load_scene(path);
    CHECK(scene_to_json(loaded) == scene_to_json(scene));
    CHECK(loaded.objects.size() == scene.objects.size());

    CHECK_THROWS_AS(load_scene("/tmp/does_not_exist_mrrl.json"), ParseError);

    const char* bad_extents = R"({"name":"x","bounds":{"min":[-5,-5,-5],"max":[5,5,5]},
        "objects":[{"class":"floor","center":[0,0,0],"half_extents":[0,1,1],"yaw":0}]})";
    CHECK_THROWS_WITH_AS(parse_scene_json(bad_extents),
                         doctest::Contains("half_extents must be > 0"), ParseError);

    const char* bad_class = R"({"name":"x","bounds":{"min":[-5,-5,-5],"max":[5,5,5]},
        "objects":[{"class":"sofa","center":[0,0,0],"half_extents":[1,1,1],"yaw":0}]})";
    CHECK_THROWS_AS(parse_scene_json(bad_class), ParseError);

    CHECK_THROWS_AS(parse_scene_json("{not json"), ParseError);

    const char* unknown_key = R"({"name":"x","bounds":{"min":[-5,-5,-5],"max":[5,5,5]},
        "objects":[],"extra":1})";
    CHECK_THROWS_AS(parse_scene_json(unknown_key), ParseError);
}

TEST_CASE("minimal valid scene file loads with six objects") {
    SceneGenParams empty;
    empty.min_furniture = empty.max_furniture = 0;
    const Scene room = generate_scene(11, empty);
    const Scene parsed = parse_scene_json(scene_to_json(room));
    CHECK(parsed.objects.size() == 6);
}

TEST_CASE("sample_free_point respects clearance and fails when impossible") {
    const Scene room = test::empty_room(6, 3, 6);
    RngStream rng(9);
    const Vec3 p = sample_free_point(room, rng, 0.1);
    CHECK(room.bounds.contains(p));
    CHECK(p.x > room.bounds.min.x);
    CHECK(p.x < room.bounds.max.x);

    CHECK_THROWS_AS(sample_free_point(room, rng, 10.0), SamplingError);
}

TEST_CASE("sample_free_point sweep: clearance cube never overlaps") {
    const Scene scene = generate_scene(42);
    RngStream rng(1);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 p = sample_free_point(scene, rng, 0.2);
        CHECK_FALSE(overlaps(scene, {p, {0.2, 0.2, 0.2}, 0.0}));
    }
}

}  // TEST_SUITE
