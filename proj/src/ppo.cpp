#include "mrrl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "mrrl/checkpoint.hpp"
#include "mrrl/json_util.hpp"

namespace mrrl {

namespace {

constexpr double kLogStdInit = -0.6931471805599453;  // ln(0.5)
constexpr double kLog2Pi = 1.8378770664093453;

Eigen::Map<const Eigen::VectorXd> obs_map(const ObservationVector& obs) {
    return {obs.data(), static_cast<Eigen::Index>(obs.size())};
}

}  // namespace

void TrainConfig::validate() const {
    if (total_steps < 1) throw ConfigError("train.total_steps must be >= 1");
    if (buffer_size < 1 || batch_size < 1) throw ConfigError("train.buffer/batch sizes must be >= 1");
    if (buffer_size % batch_size != 0)
        throw ConfigError("train.batch_size must divide train.buffer_size");
    if (!(lr0 > 0.0)) throw ConfigError("train.lr0 must be > 0");
    if (!(gamma > 0.0) || gamma > 1.0) throw ConfigError("train.gamma must lie in (0, 1]");
    if (gae_lambda < 0.0 || gae_lambda > 1.0) throw ConfigError("train.gae_lambda must lie in [0, 1]");
    if (!(clip_eps > 0.0)) throw ConfigError("train.clip_eps must be > 0");
    if (epochs_per_update < 1) throw ConfigError("train.epochs_per_update must be >= 1");
    if (entropy_coef < 0.0 || value_coef < 0.0 || !(grad_clip_norm > 0.0))
        throw ConfigError("train coefficients must be non-negative (grad_clip_norm > 0)");
    if (n_envs < 1) throw ConfigError("train.n_envs must be >= 1");
    if (hidden_units < 1) throw ConfigError("train.hidden_units must be >= 1");
}

double lr_schedule(double lr0, int64_t step, int64_t total_steps) {
    if (step >= total_steps) return 0.0;
    return lr0 * (1.0 - static_cast<double>(step) / static_cast<double>(total_steps));
}

PolicyParams PolicyParams::create(int obs_dim, int hidden, uint64_t seed) {
    RngStream rng(derive_seed(seed, "policy-init"));
    PolicyParams p;
    p.actor = Mlp::create(obs_dim, hidden, hidden, 3, std::sqrt(2.0), 0.01, rng);
    p.log_std = Eigen::Vector3d::Constant(kLogStdInit);
    p.critic = Mlp::create(obs_dim, hidden, hidden, 1, std::sqrt(2.0), 1.0, rng);
    return p;
}

Eigen::VectorXd flatten_policy(const PolicyParams& policy) {
    Eigen::VectorXd flat(policy.parameter_count());
    Eigen::Index at = 0;
    flatten_into(policy.actor, flat, at);
    for (int i = 0; i < 3; ++i) flat[at++] = policy.log_std[i];
    flatten_into(policy.critic, flat, at);
    return flat;
}

void unflatten_policy(PolicyParams& policy, const Eigen::VectorXd& flat) {
    if (flat.size() != policy.parameter_count())
        throw ContractViolation("unflatten_policy: size mismatch");
    Eigen::Index at = 0;
    unflatten_from(policy.actor, flat, at);
    for (int i = 0; i < 3; ++i) policy.log_std[i] = flat[at++];
    unflatten_from(policy.critic, flat, at);
}

ActionSample policy_sample(const PolicyParams& policy, const ObservationVector& obs,
                           RngStream& rng) {
    const Eigen::Vector3d mean = policy.actor.forward(obs_map(obs)).array().tanh();
    const Eigen::Vector3d std = policy.log_std.array().exp();

    ActionSample out;
    out.log_prob = 0.0;
    double sample[3];
    for (int i = 0; i < 3; ++i) {
        const double z = rng.normal();
        sample[i] = mean[i] + std[i] * z;
        out.log_prob += -0.5 * kLog2Pi - policy.log_std[i] - 0.5 * z * z;
    }
    out.sample = {sample[0], sample[1], sample[2]};
    out.action = {std::clamp(sample[0], -1.0, 1.0), std::clamp(sample[1], -1.0, 1.0),
                  std::clamp(sample[2], -1.0, 1.0)};
    return out;
}

Vec3 policy_mean_action(const PolicyParams& policy, const ObservationVector& obs) {
    const Eigen::Vector3d mean = policy.actor.forward(obs_map(obs)).array().tanh();
    return {std::clamp(mean[0], -1.0, 1.0), std::clamp(mean[1], -1.0, 1.0),
            std::clamp(mean[2], -1.0, 1.0)};
}

double policy_value(const PolicyParams& policy, const ObservationVector& obs) {
    return policy.critic.forward(obs_map(obs))[0];
}

double policy_log_prob(const PolicyParams& policy, const ObservationVector& obs,
                       const Vec3& action) {
    const Eigen::Vector3d mean = policy.actor.forward(obs_map(obs)).array().tanh();
    const double a[3] = {action.x, action.y, action.z};
    double lp = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double z = (a[i] - mean[i]) * std::exp(-policy.log_std[i]);
        lp += -0.5 * kLog2Pi - policy.log_std[i] - 0.5 * z * z;
    }
    return lp;
}

void gae(std::span<const double> rewards, std::span<const double> values,
         std::span<const uint8_t> dones, double bootstrap_value, double gamma, double lambda,
         std::span<double> advantages, std::span<double> returns) {
    const size_t n = rewards.size();
    if (values.size() != n || dones.size() != n || advantages.size() != n || returns.size() != n)
        throw ContractViolation("gae: sequence lengths must match");
    double next_adv = 0.0;
    double next_value = bootstrap_value;
    for (size_t k = n; k-- > 0;) {
        const double not_done = dones[k] ? 0.0 : 1.0;
        const double delta = rewards[k] + gamma * next_value * not_done - values[k];
        next_adv = delta + gamma * lambda * not_done * next_adv;
        advantages[k] = next_adv;
        returns[k] = next_adv + values[k];
        next_value = values[k];
    }
}

RolloutBuffer::RolloutBuffer(int capacity, int n_envs, int obs_dim)
    : capacity_(capacity), n_envs_(n_envs) {
    if (capacity < n_envs || n_envs < 1)
        throw ContractViolation("RolloutBuffer: capacity must cover every env");
    obs.resize(obs_dim, capacity);
    actions.resize(3, capacity);
    log_probs.resize(capacity);
    rewards.resize(capacity);
    values.resize(capacity);
    advantages.resize(capacity);
    returns.resize(capacity);
    dones.assign(capacity, 0);
    cursor_.assign(n_envs, 0);
}

int RolloutBuffer::stream_length(int env) const {
    return capacity_ / n_envs_ + (env < capacity_ % n_envs_ ? 1 : 0);
}

int RolloutBuffer::stream_offset(int env) const {
    const int base = capacity_ / n_envs_;
    const int rem = capacity_ % n_envs_;
    return env * base + std::min(env, rem);
}

void RolloutBuffer::clear() {
    added_ = 0;
    gae_done_ = false;
    std::fill(cursor_.begin(), cursor_.end(), 0);
}

void RolloutBuffer::add(int env, const ObservationVector& o, const Vec3& sample, double log_prob,
                        double reward, double value, bool done) {
    if (env < 0 || env >= n_envs_) throw ContractViolation("RolloutBuffer::add: bad env index");
    if (cursor_[env] >= stream_length(env))
        throw ContractViolation("RolloutBuffer::add: stream full");
    const int slot = stream_offset(env) + cursor_[env]++;
    obs.col(slot) = obs_map(o);
    actions(0, slot) = sample.x;
    actions(1, slot) = sample.y;
    actions(2, slot) = sample.z;
    log_probs[slot] = log_prob;
    rewards[slot] = reward;
    values[slot] = value;
    dones[slot] = done ? 1 : 0;
    ++added_;
}

void RolloutBuffer::compute_gae(std::span<const double> bootstrap_values, double gamma,
                                double lambda) {
    if (!full()) throw ContractViolation("RolloutBuffer::compute_gae: buffer not full");
    if (bootstrap_values.size() != static_cast<size_t>(n_envs_))
        throw ContractViolation("RolloutBuffer::compute_gae: one bootstrap value per env");
    for (int e = 0; e < n_envs_; ++e) {
        const int off = stream_offset(e);
        const int len = stream_length(e);
        gae({rewards.data() + off, static_cast<size_t>(len)},
            {values.data() + off, static_cast<size_t>(len)},
            {dones.data() + off, static_cast<size_t>(len)}, bootstrap_values[e], gamma, lambda,
            {advantages.data() + off, static_cast<size_t>(len)},
            {returns.data() + off, static_cast<size_t>(len)});
    }
    gae_done_ = true;
}

PpoLossStats ppo_loss_and_grad(const PolicyParams& policy, const MiniBatch& batch,
                               const TrainConfig& config, Eigen::VectorXd* grad) {
    const Eigen::Index n = batch.obs.cols();
    const double inv_n = 1.0 / static_cast<double>(n);

    MlpCache actor_cache;
    const Eigen::MatrixXd pre = forward_batch_cached(policy.actor, batch.obs, actor_cache);
    const Eigen::MatrixXd mean = pre.array().tanh();
    const Eigen::Vector3d std = policy.log_std.array().exp();

    // Diagonal-Gaussian log density at the stored pre-clamp samples.
    Eigen::MatrixXd z(3, n);
    for (int j = 0; j < 3; ++j)
        z.row(j) = (batch.actions.row(j) - mean.row(j)) / std[j];
    const Eigen::VectorXd log_probs =
        (-0.5 * z.array().square()).colwise().sum().transpose().array() -
        policy.log_std.sum() - 1.5 * kLog2Pi;

    const Eigen::ArrayXd ratio = (log_probs - batch.old_log_probs).array().exp();
    const Eigen::ArrayXd adv = batch.advantages.array();
    const Eigen::ArrayXd surr1 = ratio * adv;
    const Eigen::ArrayXd surr2 =
        ratio.min(1.0 + config.clip_eps).max(1.0 - config.clip_eps) * adv;

    PpoLossStats stats;
    stats.policy = -surr1.min(surr2).mean();
    stats.clip_fraction = (surr2 < surr1).cast<double>().mean();
    stats.entropy = policy.log_std.sum() + 1.5 * (kLog2Pi + 1.0);

    MlpCache critic_cache;
    const Eigen::RowVectorXd v = forward_batch_cached(policy.critic, batch.obs, critic_cache);
    const Eigen::RowVectorXd v_err = v - batch.returns.transpose();
    stats.value = v_err.array().square().mean();

    stats.total = stats.policy + config.value_coef * stats.value - config.entropy_coef * stats.entropy;

    if (grad != nullptr) {
        // dL/d rho flows through the unclipped branch when it attains the min.
        Eigen::ArrayXd dl_dlp = Eigen::ArrayXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i)
            if (surr1[i] <= surr2[i]) dl_dlp[i] = -inv_n * adv[i] * ratio[i];

        Eigen::MatrixXd dmean(3, n);
        Eigen::Vector3d dlog_std;
        for (int j = 0; j < 3; ++j) {
            dmean.row(j) = (dl_dlp * z.row(j).transpose().array() / std[j]).transpose();
            dlog_std[j] = (dl_dlp * (z.row(j).transpose().array().square() - 1.0)).sum() -
                          config.entropy_coef;
        }
        const Eigen::MatrixXd dpre = dmean.array() * (1.0 - mean.array().square());
        const MlpGrads actor_grads = mlp_backward(policy.actor, actor_cache, dpre);

        const Eigen::MatrixXd dv = (2.0 * config.value_coef * inv_n) * v_err;
        const MlpGrads critic_grads = mlp_backward(policy.critic, critic_cache, dv);

        grad->resize(policy.parameter_count());
        Eigen::Index at = 0;
        flatten_into(actor_grads, *grad, at);
        for (int j = 0; j < 3; ++j) (*grad)[at++] = dlog_std[j];
        flatten_into(critic_grads, *grad, at);
    }
    return stats;
}

UpdateStats ppo_update(RolloutBuffer& buffer, PolicyParams& policy, Adam& adam,
                       const TrainConfig& config, double lr, RngStream& shuffle_rng) {
    if (!buffer.full()) throw ContractViolation("ppo_update: buffer must be full");
    const int capacity = buffer.capacity();
    if (capacity % config.batch_size != 0)
        throw ContractViolation("ppo_update: batch_size must divide the buffer");

    // Per-buffer advantage normalization.
    const double mean = buffer.advantages.mean();
    const double var = (buffer.advantages.array() - mean).square().mean();
    const double stddev = std::sqrt(var);
    buffer.advantages = (buffer.advantages.array() - mean) / (stddev + 1e-8);

    std::vector<int> order(capacity);
    std::iota(order.begin(), order.end(), 0);

    Eigen::VectorXd flat = flatten_policy(policy);
    Eigen::VectorXd grad;
    MiniBatch mb;
    const int batch = config.batch_size;
    mb.obs.resize(buffer.obs.rows(), batch);
    mb.actions.resize(3, batch);
    mb.old_log_probs.resize(batch);
    mb.advantages.resize(batch);
    mb.returns.resize(batch);

    UpdateStats stats;
    int minibatches = 0;
    for (int epoch = 0; epoch < config.epochs_per_update; ++epoch) {
        for (int i = capacity - 1; i > 0; --i)
            std::swap(order[i], order[shuffle_rng.uniform_int(i + 1)]);
        for (int start = 0; start < capacity; start += batch) {
            for (int k = 0; k < batch; ++k) {
                const int src = order[start + k];
                mb.obs.col(k) = buffer.obs.col(src);
                mb.actions.col(k) = buffer.actions.col(src);
                mb.old_log_probs[k] = buffer.log_probs[src];
                mb.advantages[k] = buffer.advantages[src];
                mb.returns[k] = buffer.returns[src];
            }
            const PpoLossStats loss = ppo_loss_and_grad(policy, mb, config, &grad);
            if (!std::isfinite(loss.total))
                throw TrainError("ppo_update: non-finite loss (policy=" +
                                 std::to_string(loss.policy) +
                                 ", value=" + std::to_string(loss.value) + ")");

            const double norm = grad.norm();
            if (norm > config.grad_clip_norm) grad *= config.grad_clip_norm / norm;
            adam.update(flat, grad, lr);
            unflatten_policy(policy, flat);

            stats.policy_loss += loss.policy;
            stats.value_loss += loss.value;
            stats.entropy += loss.entropy;
            stats.clip_fraction += loss.clip_fraction;
            stats.grad_norm += norm;
            ++minibatches;
        }
    }
    stats.policy_loss /= minibatches;
    stats.value_loss /= minibatches;
    stats.entropy /= minibatches;
    stats.clip_fraction /= minibatches;
    stats.grad_norm /= minibatches;
    return stats;
}

PolicyCheckpoint train(VecEnv& venv, const TrainConfig& config, const std::string& out_dir,
                       bool verbose) {
    config.validate();
    if (venv.size() != config.n_envs)
        throw ContractViolation("train: venv size must equal config.n_envs");

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::ofstream log(fs::path(out_dir) / "train_log.jsonl");
    if (!log) throw TrainError("train: cannot open log file in " + out_dir);

    const int n = config.n_envs;
    const NormConstants norms = venv.env(0).params().norms;
    PolicyParams policy = PolicyParams::create(kObservationDim, config.hidden_units, config.seed);
    Adam adam(policy.parameter_count());
    RngStream action_rng(derive_seed(config.seed, "action-sampling"));
    RngStream shuffle_rng(derive_seed(config.seed, "minibatch-shuffle"));
    RolloutBuffer buffer(config.buffer_size, n, kObservationDim);

    std::vector<ObservationVector> obs = venv.vec_reset();
    std::vector<double> ep_return(n, 0.0);
    std::vector<int64_t> ep_len(n, 0);
    std::deque<double> recent_returns;

    int64_t steps_done = 0;
    int update_index = 0;
    Eigen::VectorXd last_good = flatten_policy(policy);

    const int rounds = (config.buffer_size + n - 1) / n;
    std::vector<Vec3> actions(n);
    std::vector<ActionSample> samples(n);
    std::vector<double> step_values(n);

    while (steps_done < config.total_steps) {
        const double lr = lr_schedule(config.lr0, steps_done, config.total_steps);
        buffer.clear();
        double term_sums[4] = {0, 0, 0, 0};
        double return_sum = 0.0;
        int episodes_this_update = 0;

        for (int round = 0; round < rounds; ++round) {
            int live = 0;
            for (int e = 0; e < n; ++e)
                if (round < buffer.stream_length(e)) ++live;
            for (int e = 0; e < live; ++e) {
                step_values[e] = policy_value(policy, obs[e]);
                samples[e] = policy_sample(policy, obs[e], action_rng);
                actions[e] = samples[e].action;
            }
            std::vector<StepResult> results;
            if (live == n) {
                results = venv.vec_step(actions);
            } else {
                results.reserve(live);
                for (int e = 0; e < live; ++e) results.push_back(venv.step_one(e, actions[e]));
            }
            for (int e = 0; e < live; ++e) {
                const StepResult& r = results[e];
                buffer.add(e, obs[e], samples[e].sample, samples[e].log_prob, r.reward.total,
                           step_values[e], r.done);
                term_sums[0] += r.reward.visibility;
                term_sums[1] += r.reward.reachability;
                term_sums[2] += r.reward.physicality;
                term_sums[3] += r.reward.stability;
                ep_return[e] += r.reward.total;
                ++ep_len[e];
                ++steps_done;
                if (r.done) {
                    nlohmann::json rec = {{"type", "episode"}, {"step", steps_done},
                                          {"env", e},          {"return", ep_return[e]},
                                          {"length", ep_len[e]}};
                    log << rec.dump() << "\n";
                    recent_returns.push_back(ep_return[e]);
                    if (recent_returns.size() > 100) recent_returns.pop_front();
                    return_sum += ep_return[e];
                    ++episodes_this_update;
                    ep_return[e] = 0.0;
                    ep_len[e] = 0;
                }
                obs[e] = r.observation;
            }
        }

        std::vector<double> bootstraps(n);
        for (int e = 0; e < n; ++e) bootstraps[e] = policy_value(policy, obs[e]);
        buffer.compute_gae(bootstraps, config.gamma, config.gae_lambda);

        const UpdateStats stats = ppo_update(buffer, policy, adam, config, lr, shuffle_rng);
        ++update_index;

        const Eigen::VectorXd flat = flatten_policy(policy);
        if (!flat.allFinite()) {
            unflatten_policy(policy, last_good);
            save_checkpoint(checkpoint_from_policy(policy, steps_done, config, norms),
                            (fs::path(out_dir) / "checkpoint_final.mrrl").string());
            throw TrainError("train: non-finite parameters after update " +
                             std::to_string(update_index) + "; last good checkpoint saved");
        }
        last_good = flat;

        const double cap = static_cast<double>(config.buffer_size);
        nlohmann::json rec = {
            {"type", "update"},
            {"update", update_index},
            {"step", steps_done},
            {"lr", lr},
            {"mean_return", episodes_this_update > 0
                                ? nlohmann::json(return_sum / episodes_this_update)
                                : nlohmann::json(nullptr)},
            {"episodes", episodes_this_update},
            {"policy_loss", stats.policy_loss},
            {"value_loss", stats.value_loss},
            {"entropy", stats.entropy},
            {"clip_fraction", stats.clip_fraction},
            {"grad_norm", stats.grad_norm},
            {"reward_terms",
             {{"visibility", term_sums[0] / cap},
              {"reachability", term_sums[1] / cap},
              {"physicality", term_sums[2] / cap},
              {"stability", term_sums[3] / cap}}}};
        log << rec.dump() << "\n";
        log.flush();

        if (verbose) {
            const double mean_recent =
                recent_returns.empty()
                    ? 0.0
                    : std::accumulate(recent_returns.begin(), recent_returns.end(), 0.0) /
                          static_cast<double>(recent_returns.size());
            std::printf("update %4d  step %9lld  lr %.3e  return(100ep) %8.2f  "
                        "vloss %8.3f  clip %.3f\n",
                        update_index, static_cast<long long>(steps_done), lr, mean_recent,
                        stats.value_loss, stats.clip_fraction);
            std::fflush(stdout);
        }

        if (update_index % 10 == 0)
            save_checkpoint(checkpoint_from_policy(policy, steps_done, config, norms),
                            (fs::path(out_dir) / "checkpoint_latest.mrrl").string());
    }

    PolicyCheckpoint final_ckpt = checkpoint_from_policy(policy, steps_done, config, norms);
    save_checkpoint(final_ckpt, (fs::path(out_dir) / "checkpoint_final.mrrl").string());
    return final_ckpt;
}

}  // namespace mrrl
