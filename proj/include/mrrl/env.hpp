#pragma once

#include <memory>
#include <span>
#include <vector>

#include "mrrl/dynamics.hpp"
#include "mrrl/reward.hpp"
#include "mrrl/rng.hpp"
#include "mrrl/scene.hpp"
#include "mrrl/sensing.hpp"
#include "mrrl/usersim.hpp"

namespace mrrl {

struct EnvConfig {
    double dt = 0.02;            // physics tick
    int action_repeat = 5;       // physics substeps per decision
    int episode_length = 1000;   // decisions per episode
    bool obstacle_enabled = false;
    uint64_t seed = 0;
};

struct EnvParams {
    PhysicsParams physics;
    UserSimParams user_sim;
    RewardParams reward;
    CameraModel camera;
    RayFan fan;
    NormConstants norms;
    ContentState content_template;  // panel geometry; pose fields ignored
};

struct StepInfo {
    bool overlap = false;
    double f_vis = 0.0;
    double occ = 0.0;
    double p_percent = 0.0;
    double distance = 0.0;
    bool in_front = false;
    bool user_moving = false;
    double content_speed = 0.0;
};

struct StepResult {
    ObservationVector observation;
    RewardBreakdown reward;
    bool done = false;
    StepInfo info;
};

// One episode runner. Holds the kinematic state; the scene and waypoint grid
// are immutable and shared between instances.
class Environment {
public:
    Environment(std::shared_ptr<const Scene> scene, std::shared_ptr<const WaypointGrid> grid,
                EnvParams params, EnvConfig config);

    // Seeds the private rng, places the user on a random waypoint, spawns the
    // content at a free point within 2 m of the user and the obstacle (when
    // enabled) at a free point, and returns the initial observation.
    ObservationVector reset(uint64_t seed);

    // Runs action_repeat physics substeps under the held action (content
    // integration, user, obstacle, re-billboard), then evaluates observation
    // and reward once. Throws ContractViolation when called after done.
    StepResult step(const Vec3& action);

    ObservationVector current_observation() const;

    bool done() const { return done_; }
    int decisions() const { return decisions_; }
    int64_t action_clamp_events() const { return action_clamp_events_; }

    const Scene& scene() const { return *scene_; }
    const EnvParams& params() const { return params_; }
    const EnvConfig& config() const { return config_; }
    const ContentState& content() const { return content_; }
    const UserState& user() const { return user_; }
    const ObstacleState& obstacle() const { return obstacle_; }

    // Test hooks: scripted controllers (the eval oracle) may re-pose the panel
    // or pin the user.
    void override_content(const ContentState& content) { content_ = content; }
    void override_user(const UserState& user) { user_ = user; }

private:
    std::shared_ptr<const Scene> scene_;
    std::shared_ptr<const WaypointGrid> grid_;
    EnvParams params_;
    EnvConfig config_;

    RngStream rng_{0};
    ContentState content_;
    UserState user_;
    ObstacleState obstacle_;
    int decisions_ = 0;
    bool done_ = true;
    int64_t action_clamp_events_ = 0;
};

class ThreadPool;

// Fixed set of independent environment instances with private seed streams.
// Stepping is bitwise independent of the worker count: instances never share
// mutable state, so sequential (threads = 0) and concurrent execution agree.
class VecEnv {
public:
    VecEnv(std::vector<std::unique_ptr<Environment>> envs, uint64_t master_seed, int threads);
    ~VecEnv();

    int size() const { return static_cast<int>(envs_.size()); }
    Environment& env(int i) { return *envs_[i]; }

    std::vector<ObservationVector> vec_reset();  // seeds drawn from the per-instance streams
    std::vector<ObservationVector> vec_reset(std::span<const uint64_t> seeds);

    // Steps every instance; finished instances auto-reset with the next seed
    // from their stream, and the result carries the fresh initial observation
    // together with the terminal reward/done/info.
    std::vector<StepResult> vec_step(std::span<const Vec3> actions);

    // Single-instance step with the same auto-reset behavior.
    StepResult step_one(int index, const Vec3& action);

private:
    std::vector<std::unique_ptr<Environment>> envs_;
    std::vector<RngStream> seed_streams_;
    std::unique_ptr<ThreadPool> pool_;
};

int threads_from_env();  // MRRL_THREADS, 0 (sequential) when unset or invalid

}  // namespace mrrl
