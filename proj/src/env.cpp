#include "mrrl/env.hpp"

#include <condition_variable>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>

namespace mrrl {

Environment::Environment(std::shared_ptr<const Scene> scene,
                         std::shared_ptr<const WaypointGrid> grid, EnvParams params,
                         EnvConfig config)
    : scene_(std::move(scene)), grid_(std::move(grid)), params_(std::move(params)),
      config_(config) {
    if (config_.action_repeat < 1) throw ContractViolation("EnvConfig: action_repeat must be >= 1");
    if (config_.episode_length < 1) throw ContractViolation("EnvConfig: episode_length must be >= 1");
}

ObservationVector Environment::reset(uint64_t seed) {
    rng_ = RngStream(seed);
    decisions_ = 0;
    done_ = false;

    user_ = init_user(*grid_, params_.user_sim, rng_);

    // Spawn the panel at a cleared point near the user so the visibility and
    // reachability terms carry gradient from the first decisions.
    content_ = params_.content_template;
    const double clearance =
        std::hypot(content_.width, content_.height, content_.thickness) / 2.0;
    bool spawned = false;
    for (int attempt = 0; attempt < 10000 && !spawned; ++attempt) {
        Vec3 p{rng_.uniform(user_.eye_pos.x - 2.0, user_.eye_pos.x + 2.0),
               rng_.uniform(user_.eye_pos.y - 2.0, user_.eye_pos.y + 2.0),
               rng_.uniform(user_.eye_pos.z - 2.0, user_.eye_pos.z + 2.0)};
        p = scene_->bounds.clamp_point(p);
        if ((p - user_.eye_pos).norm() > 2.0) continue;
        if (overlaps(*scene_, OrientedBox{p, {clearance, clearance, clearance}, 0.0})) continue;
        content_.pos = p;
        spawned = true;
    }
    if (!spawned)
        throw SamplingError("Environment::reset: no free content spawn within 2 m of the user");
    content_.vel = {0, 0, 0};
    content_ = billboard(content_, user_.eye_pos);

    obstacle_ = ObstacleState{};
    if (config_.obstacle_enabled) obstacle_ = init_obstacle(*scene_, rng_);

    return current_observation();
}

ObservationVector Environment::current_observation() const {
    return observe(*scene_, content_, user_, obstacle_, params_.fan, params_.norms);
}

StepResult Environment::step(const Vec3& action) {
    if (done_) throw ContractViolation("Environment::step called on a finished episode");

    for (int k = 0; k < config_.action_repeat; ++k) {
        ForceResult fr = apply_force(content_, action, params_.physics, scene_->bounds, config_.dt);
        action_clamp_events_ += fr.clamped_components;
        content_ = fr.state;
        user_ = step_user(user_, *grid_, params_.user_sim, rng_, config_.dt);
        if (obstacle_.active) obstacle_ = step_obstacle(obstacle_, *scene_, rng_, config_.dt);
        content_ = billboard(content_, user_.eye_pos);
    }

    StepResult result;
    const RewardInputs inputs =
        gather_reward_inputs(*scene_, content_, user_, obstacle_, params_.camera);
    result.reward = reward_from_inputs(inputs, params_.reward);
    result.observation = current_observation();
    result.info = {inputs.overlap,
                   inputs.vs.f_vis,
                   inputs.vs.occ,
                   p_percent(inputs.vs, params_.reward),
                   inputs.distance,
                   inputs.in_front,
                   inputs.user_moving,
                   inputs.content_speed};

    ++decisions_;
    done_ = decisions_ >= config_.episode_length;
    result.done = done_;
    return result;
}

// Minimal persistent pool; tasks are index ranges dispatched per call.
class ThreadPool {
public:
    explicit ThreadPool(int workers) {
        for (int i = 0; i < workers; ++i)
            threads_.emplace_back([this] { worker_loop(); });
    }

    ~ThreadPool() {
        {
            std::unique_lock lock(mutex_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    // Runs fn(i) for i in [0, n) across the workers and the calling thread.
    void parallel_for(int n, const std::function<void(int)>& fn) {
        {
            std::unique_lock lock(mutex_);
            fn_ = &fn;
            next_ = 0;
            limit_ = n;
            pending_ = n;
        }
        cv_.notify_all();
        run_tasks();
        std::unique_lock lock(mutex_);
        done_cv_.wait(lock, [this] { return pending_ == 0; });
        fn_ = nullptr;
    }

private:
    void run_tasks() {
        while (true) {
            int i;
            const std::function<void(int)>* fn;
            {
                std::unique_lock lock(mutex_);
                if (fn_ == nullptr || next_ >= limit_) return;
                i = next_++;
                fn = fn_;
            }
            (*fn)(i);
            {
                std::unique_lock lock(mutex_);
                if (--pending_ == 0) done_cv_.notify_all();
            }
        }
    }

    void worker_loop() {
        while (true) {
            {
                std::unique_lock lock(mutex_);
                cv_.wait(lock, [this] { return stop_ || (fn_ != nullptr && next_ < limit_); });
                if (stop_) return;
            }
            run_tasks();
        }
    }

    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable cv_, done_cv_;
    const std::function<void(int)>* fn_ = nullptr;
    int next_ = 0, limit_ = 0, pending_ = 0;
    bool stop_ = false;
};

VecEnv::VecEnv(std::vector<std::unique_ptr<Environment>> envs, uint64_t master_seed, int threads)
    : envs_(std::move(envs)) {
    for (size_t i = 0; i < envs_.size(); ++i)
        seed_streams_.emplace_back(derive_seed(master_seed, "episode-seeds", i));
    if (threads > 1) pool_ = std::make_unique<ThreadPool>(std::min<int>(threads, size()) - 1);
}

VecEnv::~VecEnv() = default;

std::vector<ObservationVector> VecEnv::vec_reset() {
    std::vector<uint64_t> seeds;
    seeds.reserve(envs_.size());
    for (auto& stream : seed_streams_) seeds.push_back(stream.next_u64());
    return vec_reset(seeds);
}

std::vector<ObservationVector> VecEnv::vec_reset(std::span<const uint64_t> seeds) {
    if (seeds.size() != envs_.size())
        throw ContractViolation("VecEnv::vec_reset: one seed per instance required");
    std::vector<ObservationVector> obs(envs_.size());
    for (size_t i = 0; i < envs_.size(); ++i) obs[i] = envs_[i]->reset(seeds[i]);
    return obs;
}

StepResult VecEnv::step_one(int index, const Vec3& action) {
    StepResult result = envs_[index]->step(action);
    if (result.done) result.observation = envs_[index]->reset(seed_streams_[index].next_u64());
    return result;
}

std::vector<StepResult> VecEnv::vec_step(std::span<const Vec3> actions) {
    if (actions.size() != envs_.size())
        throw ContractViolation("VecEnv::vec_step: one action per instance required");
    std::vector<StepResult> results(envs_.size());
    if (pool_) {
        pool_->parallel_for(static_cast<int>(envs_.size()),
                            [&](int i) { results[i] = step_one(i, actions[i]); });
    } else {
        for (size_t i = 0; i < envs_.size(); ++i)
            results[i] = step_one(static_cast<int>(i), actions[i]);
    }
    return results;
}

int threads_from_env() {
    const char* v = std::getenv("MRRL_THREADS");
    if (v == nullptr) return 0;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (end == v || n < 0) return 0;
    return static_cast<int>(n);
}

}  // namespace mrrl
