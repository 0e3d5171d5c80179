#include <doctest.h>

#include <cmath>
#include <set>

#include "mrrl/sensing.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace mrrl;

TEST_SUITE("sensing") {

TEST_CASE("ray fan: 22 unit directions, distinct, deterministic, well spread") {
    const RayFan fan = ray_fan_directions();
    for (const Vec3& d : fan.directions) CHECK(std::abs(d.norm() - 1.0) < 1e-9);

    double min_angle = 1e9;
    for (int i = 0; i < kRayCount; ++i)
        for (int j = i + 1; j < kRayCount; ++j) {
            const double c = std::clamp(fan.directions[i].dot(fan.directions[j]), -1.0, 1.0);
            min_angle = std::min(min_angle, std::acos(c));
        }
    CHECK(min_angle > 30.0 * M_PI / 180.0);

    const RayFan again = ray_fan_directions();
    for (int i = 0; i < kRayCount; ++i) CHECK(fan.directions[i] == again.directions[i]);
}

TEST_CASE("observe in an unbounded empty room: all rays miss") {
    Scene scene;
    scene.name = "void";
    scene.bounds = {{-100, -100, -100}, {100, 100, 100}};

    ContentState content;
    content.pos = {0, 0, 0};
    UserState user;
    user.eye_pos = {1, 0, 0};
    user.forward = {0, 0, 1};

    const ObservationVector obs =
        observe(scene, content, user, test::no_obstacle(), ray_fan_directions(), {});
    for (int i = 0; i < kRayCount; ++i) {
        const double* block = obs.data() + i * kRayBlockSize;
        for (int c = 0; c < kSemanticClassCount; ++c) CHECK(block[c] == 0.0);
        CHECK(block[5] == 1.0);  // no-hit flag
        CHECK(block[6] == 1.0);  // normalized distance saturates
    }
    CHECK(obs.size() == 171);
}

TEST_CASE("observe encodes a wall hit 1 m along ray 0 as distance 0.2") {
    const RayFan fan = ray_fan_directions();
    const Vec3 dir0 = fan.directions[0];

    Scene scene;
    scene.bounds = {{-100, -100, -100}, {100, 100, 100}};
    // A slab whose nearest face is exactly 1 m along ray 0: dir0 points mostly
    // up, so use a huge horizontal slab with its bottom at pos + dir0*1.
    const double plane_y = dir0.y * 1.0;
    scene.objects.push_back(
        {SemanticClass::Wall, {{0, plane_y + 0.5, 0}, {50, 0.5, 50}, 0.0}});

    ContentState content;
    content.pos = {0, 0, 0};
    UserState user;
    user.eye_pos = {0, 0, -1};
    user.forward = {0, 0, 1};

    const ObservationVector obs = observe(scene, content, user, test::no_obstacle(), fan, {});
    const double* block = obs.data();
    CHECK(block[static_cast<int>(SemanticClass::Wall)] == 1.0);
    CHECK(block[5] == 0.0);
    CHECK(block[6] == doctest::Approx(1.0 / fan.max_length).epsilon(1e-9));
}

TEST_CASE("observe sees the active obstacle with its own class") {
    Scene scene;
    scene.bounds = {{-100, -100, -100}, {100, 100, 100}};
    const RayFan fan = ray_fan_directions();

    ObstacleState obstacle;
    obstacle.active = true;
    obstacle.center = Vec3{0, 0, 0} + fan.directions[3] * 2.0;

    ContentState content;
    UserState user;
    user.eye_pos = {1, 0, 0};
    user.forward = {0, 0, 1};

    const ObservationVector obs = observe(scene, content, user, obstacle, fan, {});
    const double* block = obs.data() + 3 * kRayBlockSize;
    CHECK(block[static_cast<int>(SemanticClass::Obstacle)] == 1.0);
    CHECK(block[5] == 0.0);
}

TEST_CASE("observation components stay within [-1, 1] on random states") {
    const Scene scene = generate_scene(42);
    const RayFan fan = ray_fan_directions();
    RngStream rng(21);
    NormConstants norms;

    for (int i = 0; i < 1000; ++i) {
        ContentState content;
        content.pos = {rng.uniform(scene.bounds.min.x, scene.bounds.max.x),
                       rng.uniform(scene.bounds.min.y, scene.bounds.max.y),
                       rng.uniform(scene.bounds.min.z, scene.bounds.max.z)};
        content.vel = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const double a = rng.uniform(-M_PI, M_PI);
        content.facing = {std::sin(a), 0, std::cos(a)};

        UserState user;
        user.eye_pos = {rng.uniform(scene.bounds.min.x, scene.bounds.max.x),
                        rng.uniform(scene.bounds.min.y, scene.bounds.max.y),
                        rng.uniform(scene.bounds.min.z, scene.bounds.max.z)};
        const double b = rng.uniform(-M_PI, M_PI);
        user.forward = {std::sin(b), 0, std::cos(b)};

        ObstacleState obstacle;
        obstacle.active = rng.uniform() < 0.5;
        obstacle.center = {rng.uniform(-3, 3), rng.uniform(0.5, 1.8), rng.uniform(-3, 3)};

        const ObservationVector obs = observe(scene, content, user, obstacle, fan, norms);
        for (double v : obs) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("observe is invariant to rigid horizontal translation (non-position features)") {
    const RayFan fan = ray_fan_directions();
    NormConstants norms;

    Scene scene = test::empty_room(8, 3, 8);
    scene.objects.push_back({SemanticClass::Furniture, {{1, 0.5, 1}, {0.4, 0.5, 0.3}, 0.7}});

    ContentState content;
    content.pos = {0.5, 1.2, -0.5};
    content.vel = {0.3, 0, -0.2};
    content.facing = {0, 0, 1};
    UserState user;
    user.eye_pos = {-0.5, 1.6, 0.5};
    user.forward = {1, 0, 0};

    const Vec3 offset{0.4, 0.0, -0.3};
    Scene moved = scene;
    moved.bounds.min += offset;
    moved.bounds.max += offset;
    for (auto& obj : moved.objects) obj.box.center += offset;
    ContentState content2 = content;
    content2.pos += offset;
    UserState user2 = user;
    user2.eye_pos += offset;

    const ObservationVector a = observe(scene, content, user, test::no_obstacle(), fan, norms);
    const ObservationVector b = observe(moved, content2, user2, test::no_obstacle(), fan, norms);

    // Ray blocks, facings, speed, and distance agree; position features shift.
    for (int i = 0; i < kRayCount * kRayBlockSize; ++i)
        CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    for (int i = kRayCount * kRayBlockSize + 3; i < kRayCount * kRayBlockSize + 9; ++i)
        CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    const int speed_at = kRayCount * kRayBlockSize + 9;
    CHECK(a[speed_at] == doctest::Approx(b[speed_at]).epsilon(1e-12));
    CHECK(a[speed_at + 1] == doctest::Approx(b[speed_at + 1]).epsilon(1e-12));
    const int user_fwd = kRayCount * kRayBlockSize + 14;
    for (int i = 0; i < 3; ++i)
        CHECK(a[user_fwd + i] == doctest::Approx(b[user_fwd + i]).epsilon(1e-12));
}

TEST_CASE("visibility: panel straight ahead is fully visible") {
    const Scene room = test::empty_room(8, 3, 8);
    ContentState content;
    content.pos = {0, 1.6, 0.5};
    content.facing = {0, 0, -1};
    UserState user;
    user.eye_pos = {0, 1.6, 0};
    user.forward = {0, 0, 1};

    const VisibilitySample vs = visibility(room, content, user, test::no_obstacle(), {});
    CHECK(vs.f_vis == 1.0);
    CHECK(vs.occ > 0.15);
}

TEST_CASE("visibility: panel behind the user scores zero") {
    const Scene room = test::empty_room(8, 3, 8);
    ContentState content;
    content.pos = {0, 1.6, -0.5};
    content.facing = {0, 0, 1};
    UserState user;
    user.eye_pos = {0, 1.6, 0};
    user.forward = {0, 0, 1};

    const VisibilitySample vs = visibility(room, content, user, test::no_obstacle(), {});
    CHECK(vs.f_vis == 0.0);
    CHECK(vs.occ == 0.0);
}

TEST_CASE("visibility agrees with the dense oracle on a half-hidden panel") {
    Scene room = test::empty_room(8, 3, 8);
    // A wall edge covering roughly the left half of the panel.
    room.objects.push_back({SemanticClass::Wall, {{-0.2, 1.5, 0.6}, {0.2, 1.0, 0.05}, 0.0}});

    ContentState content;
    content.pos = {0, 1.6, 1.2};
    content.facing = {0, 0, -1};
    UserState user;
    user.eye_pos = {0, 1.6, 0};
    user.forward = {0, 0, 1};
    const CameraModel camera;

    const VisibilitySample vs = visibility(room, content, user, test::no_obstacle(), camera);
    const test::DenseVisibility oracle =
        test::dense_visibility(room, content, user, test::no_obstacle(), camera);

    CHECK(vs.f_vis == doctest::Approx(oracle.f_vis).epsilon(0.15));
    CHECK(std::abs(vs.f_vis - oracle.f_vis) <= 0.1);
    CHECK(vs.occ == doctest::Approx(oracle.occ).epsilon(0.10));
    CHECK(vs.f_vis > 0.2);
    CHECK(vs.f_vis < 0.9);
}

TEST_CASE("f_vis is monotone as an occluder grows") {
    ContentState content;
    content.pos = {0, 1.6, 1.5};
    content.facing = {0, 0, -1};
    UserState user;
    user.eye_pos = {0, 1.6, 0};
    user.forward = {0, 0, 1};

    double prev = 1.1;
    for (double half : {0.02, 0.06, 0.10, 0.16, 0.25, 0.5}) {
        Scene room = test::empty_room(8, 3, 8);
        room.objects.push_back(
            {SemanticClass::Furniture, {{0, 1.6, 0.75}, {half, half, 0.02}, 0.0}});
        const VisibilitySample vs = visibility(room, content, user, test::no_obstacle(), {});
        CHECK(vs.f_vis <= prev + 1e-12);
        prev = vs.f_vis;
    }
    CHECK(prev == 0.0);  // the largest occluder blankets the panel
}

TEST_CASE("obstacle acts as an occluder") {
    const Scene room = test::empty_room(8, 3, 8);
    ContentState content;
    content.pos = {0, 1.6, 2.0};
    content.facing = {0, 0, -1};
    UserState user;
    user.eye_pos = {0, 1.6, 0};
    user.forward = {0, 0, 1};

    ObstacleState obstacle;
    obstacle.active = true;
    obstacle.center = {0, 1.6, 1.0};

    const VisibilitySample clear = visibility(room, content, user, test::no_obstacle(), {});
    const VisibilitySample blocked = visibility(room, content, user, obstacle, {});
    CHECK(clear.f_vis == 1.0);
    CHECK(blocked.f_vis == 0.0);
}

}  // TEST_SUITE
