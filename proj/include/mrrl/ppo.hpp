#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrrl/env.hpp"
#include "mrrl/mlp.hpp"

namespace mrrl {

struct TrainConfig {
    int64_t total_steps = 5'000'000;
    int buffer_size = 409'600;
    int batch_size = 2'048;
    double lr0 = 3e-4;               // linear decay to 0 at total_steps
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip_eps = 0.2;
    int epochs_per_update = 3;
    double entropy_coef = 5e-3;
    double value_coef = 0.5;
    double grad_clip_norm = 0.5;
    int n_envs = 6;
    uint64_t seed = 0;
    int hidden_units = 128;

    void validate() const;  // throws ConfigError

    static TrainConfig paper_preset() { return {}; }
    static TrainConfig desk_preset() {
        TrainConfig c;
        c.total_steps = 1'000'000;
        c.buffer_size = 16'384;
        c.batch_size = 512;
        return c;
    }
};

// lr0 * (1 - step/total), clamped at 0; exactly 0 at step == total_steps.
double lr_schedule(double lr0, int64_t step, int64_t total_steps);

// Diagonal-Gaussian policy: tanh-squashed actor mean, state-independent
// learnable log-std (init ln 0.5), separate critic.
struct PolicyParams {
    Mlp actor;
    Eigen::Vector3d log_std;
    Mlp critic;

    static PolicyParams create(int obs_dim, int hidden, uint64_t seed);
    Eigen::Index parameter_count() const {
        return actor.parameter_count() + log_std.size() + critic.parameter_count();
    }
};

// Flat order (also the checkpoint order): actor w1,b1,w2,b2,w3,b3 row-major,
// then log_std, then critic w1,b1,w2,b2,w3,b3.
Eigen::VectorXd flatten_policy(const PolicyParams& policy);
void unflatten_policy(PolicyParams& policy, const Eigen::VectorXd& flat);

struct ActionSample {
    Vec3 action;      // clamped to [-1,1]^3; what the environment executes
    Vec3 sample;      // pre-clamp Gaussian draw; what the buffer stores
    double log_prob;  // density at the pre-clamp sample
};

ActionSample policy_sample(const PolicyParams& policy, const ObservationVector& obs,
                           RngStream& rng);
Vec3 policy_mean_action(const PolicyParams& policy, const ObservationVector& obs);
double policy_value(const PolicyParams& policy, const ObservationVector& obs);
// Diagonal-Gaussian log density of a (pre-clamp) action at this observation.
double policy_log_prob(const PolicyParams& policy, const ObservationVector& obs,
                       const Vec3& action);

// delta_t = r_t + gamma*v_{t+1}*(1-done_t) - v_t
// A_t     = delta_t + gamma*lambda*(1-done_t)*A_{t+1},  returns = A + v.
// v_{T} is bootstrap_value.
void gae(std::span<const double> rewards, std::span<const double> values,
         std::span<const uint8_t> dones, double bootstrap_value, double gamma, double lambda,
         std::span<double> advantages, std::span<double> returns);

// On-policy transition store. Each environment owns a contiguous stream slice
// so advantages can be computed per stream; minibatching is over the flat
// buffer afterwards.
class RolloutBuffer {
public:
    RolloutBuffer(int capacity, int n_envs, int obs_dim);

    int capacity() const { return capacity_; }
    int n_envs() const { return n_envs_; }
    int stream_length(int env) const;
    int stream_offset(int env) const;
    bool full() const { return added_ == capacity_; }
    void clear();

    void add(int env, const ObservationVector& obs, const Vec3& sample, double log_prob,
             double reward, double value, bool done);
    void compute_gae(std::span<const double> bootstrap_values, double gamma, double lambda);

    Eigen::MatrixXd obs;      // obs_dim x capacity
    Eigen::MatrixXd actions;  // 3 x capacity (pre-clamp samples)
    Eigen::VectorXd log_probs, rewards, values, advantages, returns;
    std::vector<uint8_t> dones;

private:
    int capacity_, n_envs_, added_ = 0;
    std::vector<int> cursor_;
    bool gae_done_ = false;
};

struct MiniBatch {
    Eigen::MatrixXd obs;
    Eigen::MatrixXd actions;
    Eigen::VectorXd old_log_probs, advantages, returns;
};

struct PpoLossStats {
    double total = 0.0;
    double policy = 0.0;
    double value = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
};

// Clipped-surrogate loss
//   L = -mean(min(rho*A, clip(rho, 1-eps, 1+eps)*A))
//       + value_coef*mean((V - return)^2) - entropy_coef*entropy
// with analytic gradients over the flat parameter vector when grad is given.
PpoLossStats ppo_loss_and_grad(const PolicyParams& policy, const MiniBatch& batch,
                               const TrainConfig& config, Eigen::VectorXd* grad);

struct UpdateStats {
    double policy_loss = 0.0, value_loss = 0.0, entropy = 0.0;
    double clip_fraction = 0.0, grad_norm = 0.0;
};

// Normalizes buffer advantages, then runs epochs_per_update passes of shuffled
// minibatches with global-norm-clipped Adam steps at the given lr.
// Throws TrainError on a non-finite loss.
UpdateStats ppo_update(RolloutBuffer& buffer, PolicyParams& policy, Adam& adam,
                       const TrainConfig& config, double lr, RngStream& shuffle_rng);

struct PolicyCheckpoint;  // checkpoint.hpp

// Alternates rollout collection over the vectorized environment and PPO
// updates until total_steps decisions are consumed. Writes train_log.jsonl
// (one "update" record per update plus "episode" records), periodic
// checkpoint_latest.mrrl, and checkpoint_final.mrrl under out_dir.
PolicyCheckpoint train(VecEnv& venv, const TrainConfig& config, const std::string& out_dir,
                       bool verbose = false);

}  // namespace mrrl
