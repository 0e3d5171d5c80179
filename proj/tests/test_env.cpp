#include <doctest.h>

#include <cmath>
#include <memory>

#include "mrrl/env.hpp"
#include "test_helpers.hpp"

using namespace mrrl;

namespace {

std::unique_ptr<Environment> make_env(const test::SceneBundle& b, EnvConfig config = {}) {
    return std::make_unique<Environment>(b.scene, b.grid, test::default_env_params(), config);
}

}  // namespace

TEST_SUITE("env") {

TEST_CASE("reset is deterministic and spawns the content near the user, clear of geometry") {
    const auto b = test::bundle(generate_scene(42));
    auto env = make_env(b);

    const ObservationVector a = env->reset(123);
    const Vec3 content_pos = env->content().pos;
    const ObservationVector again = env->reset(123);
    CHECK(a == again);
    CHECK(env->content().pos == content_pos);

    for (uint64_t seed = 0; seed < 100; ++seed) {
        env->reset(seed);
        CHECK((env->content().pos - env->user().eye_pos).norm() <= 2.0 + 1e-9);
        CHECK_FALSE(overlaps(*b.scene, content_box(env->content())));
        CHECK(env->content().vel == Vec3{0, 0, 0});
    }
}

TEST_CASE("reset fails when no free spawn exists near the user") {
    // Hand-built grid with its only waypoint buried in furniture: the
    // clearance rejection loop must exhaust and raise.
    Scene scene = test::empty_room(6, 3, 6);
    scene.objects.push_back({SemanticClass::Furniture, {{0, 1.5, 0}, {2.8, 1.4, 2.8}, 0.0}});
    auto sp = std::make_shared<Scene>(scene);
    auto gp = std::make_shared<WaypointGrid>();
    gp->points = {{0, 1.6, 0}};
    gp->heights = {1.6};
    gp->reachable = {{}};

    Environment env(sp, gp, test::default_env_params(), {});
    CHECK_THROWS_AS(env.reset(1), SamplingError);
}

TEST_CASE("step after done is a contract violation; done fires at episode_length") {
    const auto b = test::bundle(test::empty_room(6, 3, 6));
    EnvConfig config;
    config.episode_length = 3;
    auto env = make_env(b, config);
    env->reset(7);

    CHECK_FALSE(env->step({0, 0, 0}).done);
    CHECK_FALSE(env->step({0, 0, 0}).done);
    CHECK(env->step({0, 0, 0}).done);
    CHECK_THROWS_AS(env->step({0, 0, 0}), ContractViolation);
}

TEST_CASE("zero action at the ideal pose is a reward fixed point") {
    const auto b = test::bundle(test::empty_room(8, 3, 8));
    auto env = make_env(b);
    env->reset(3);

    UserState user = env->user();
    user.eye_pos = {0, 1.6, 0};
    user.forward = {0, 0, 1};
    user.target_facing = user.forward;  // no turning during the dwell
    user.dwell_remaining = 1000.0;
    user.walking = false;
    user.moving = false;
    env->override_user(user);

    ContentState content = env->content();
    content.pos = {0, 1.6, 0.5};
    content.vel = {0, 0, 0};
    content.facing = {0, 0, -1};
    env->override_content(content);

    const StepResult r = env->step({0, 0, 0});
    CHECK(r.reward.total == doctest::Approx(0.22));
    CHECK(env->content().pos == content.pos);
    CHECK_FALSE(r.info.overlap);
    CHECK(r.info.f_vis == 1.0);
    CHECK(r.info.distance == doctest::Approx(0.5));
}

TEST_CASE("info diagnostics are consistent with recomputation from the logged state") {
    const auto b = test::bundle(generate_scene(42));
    EnvConfig config;
    config.episode_length = 1000;
    config.obstacle_enabled = true;
    auto env = make_env(b, config);
    env->reset(11);
    RngStream rng(5);
    const EnvParams& params = env->params();

    for (int i = 0; i < 1000; ++i) {
        const Vec3 action{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const StepResult r = env->step(action);

        // Recompute the diagnostics from the post-step state snapshot.
        const ContentState& content = env->content();
        const UserState& user = env->user();
        const ObstacleState& obstacle = env->obstacle();

        const OrientedBox box = content_box(content);
        const bool overlap = overlaps(*b.scene, box) ||
                             (obstacle.active && boxes_overlap(box, obstacle.box()));
        CHECK(r.info.overlap == overlap);
        const VisibilitySample vs = visibility(*b.scene, content, user, obstacle, params.camera);
        CHECK(r.info.f_vis == vs.f_vis);
        CHECK(r.info.distance == (content.pos - user.eye_pos).norm());
        CHECK(r.info.content_speed == content.speed());
        CHECK(r.reward.total ==
              doctest::Approx(r.reward.visibility + r.reward.reachability + r.reward.physicality +
                              r.reward.stability)
                  .epsilon(1e-15));
        CHECK(std::abs(r.reward.total) <= 0.22 + 1e-12);
    }
}

TEST_CASE("vectorized: n=1 matches the scalar environment") {
    const auto b = test::bundle(test::empty_room(6, 3, 6));
    EnvConfig config;
    config.episode_length = 40;

    auto scalar = make_env(b, config);
    std::vector<std::unique_ptr<Environment>> envs;
    envs.push_back(make_env(b, config));
    VecEnv venv(std::move(envs), 0, 0);

    const uint64_t seed = 99;
    ObservationVector so = scalar->reset(seed);
    std::vector<uint64_t> seeds{seed};
    std::vector<ObservationVector> vo = venv.vec_reset(seeds);
    CHECK(so == vo[0]);

    RngStream rng(1);
    for (int i = 0; i < 39; ++i) {
        const Vec3 a{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const StepResult rs = scalar->step(a);
        std::vector<Vec3> actions{a};
        const StepResult rv = venv.vec_step(actions)[0];
        CHECK(rs.reward.total == rv.reward.total);
        CHECK(rs.observation == rv.observation);
        CHECK(rs.done == rv.done);
    }
}

TEST_CASE("vectorized: sequential and threaded execution are bitwise equal") {
    const auto b = test::bundle(generate_scene(5));
    EnvConfig config;
    config.episode_length = 25;  // forces auto-resets mid-run
    const int n = 6;

    auto run = [&](int threads) {
        std::vector<std::unique_ptr<Environment>> envs;
        for (int i = 0; i < n; ++i) envs.push_back(make_env(b, config));
        VecEnv venv(std::move(envs), 2024, threads);
        std::vector<ObservationVector> obs = venv.vec_reset();

        std::vector<double> trace;
        RngStream rng(3);
        for (int step = 0; step < 60; ++step) {
            std::vector<Vec3> actions;
            for (int e = 0; e < n; ++e)
                actions.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
            const auto results = venv.vec_step(actions);
            for (const auto& r : results) {
                trace.push_back(r.reward.total);
                trace.push_back(r.observation[100]);
                trace.push_back(r.done ? 1.0 : 0.0);
            }
        }
        return trace;
    };

    const auto sequential = run(0);
    const auto threaded = run(3);
    REQUIRE(sequential.size() == threaded.size());
    for (size_t i = 0; i < sequential.size(); ++i) CHECK(sequential[i] == threaded[i]);
}

TEST_CASE("vectorized: identical seeds give identical sequences across runs") {
    const auto b = test::bundle(test::empty_room(7, 3, 7));
    EnvConfig config;
    config.episode_length = 30;

    auto run = [&]() {
        std::vector<std::unique_ptr<Environment>> envs;
        for (int i = 0; i < 3; ++i) envs.push_back(make_env(b, config));
        VecEnv venv(std::move(envs), 7, 0);
        venv.vec_reset();
        double acc = 0.0;
        for (int step = 0; step < 100; ++step) {
            std::vector<Vec3> actions(3, Vec3{0.1, -0.05, 0.2});
            for (const auto& r : venv.vec_step(actions)) acc += r.reward.total + r.observation[0];
        }
        return acc;
    };
    CHECK(run() == run());
}

TEST_CASE("auto-reset returns the fresh episode's first observation") {
    const auto b = test::bundle(test::empty_room(6, 3, 6));
    EnvConfig config;
    config.episode_length = 2;
    std::vector<std::unique_ptr<Environment>> envs;
    envs.push_back(make_env(b, config));
    VecEnv venv(std::move(envs), 31, 0);
    venv.vec_reset();

    std::vector<Vec3> actions{{0, 0, 0}};
    venv.vec_step(actions);
    const StepResult terminal = venv.vec_step(actions)[0];
    CHECK(terminal.done);
    CHECK(venv.env(0).decisions() == 0);  // already reset
    CHECK_FALSE(venv.env(0).done());
    CHECK(terminal.observation == venv.env(0).current_observation());
}

TEST_CASE("mismatched action count is a contract violation") {
    const auto b = test::bundle(test::empty_room(6, 3, 6));
    std::vector<std::unique_ptr<Environment>> envs;
    envs.push_back(make_env(b));
    envs.push_back(make_env(b));
    VecEnv venv(std::move(envs), 0, 0);
    venv.vec_reset();
    std::vector<Vec3> actions{{0, 0, 0}};
    CHECK_THROWS_AS(venv.vec_step(actions), ContractViolation);
}

}  // TEST_SUITE
