#pragma once

#include <nlohmann/json.hpp>

#include "mrrl/dynamics.hpp"
#include "mrrl/env.hpp"
#include "mrrl/errors.hpp"
#include "mrrl/eval.hpp"
#include "mrrl/ppo.hpp"
#include "mrrl/reward.hpp"
#include "mrrl/sensing.hpp"
#include "mrrl/usersim.hpp"

namespace mrrl {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PhysicsParams, mass, force_scale, drag, max_speed, dt)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(UserSimParams, walk_speed, dwell_min, dwell_max, turn_rate)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RewardParams, ref_distance, kernel_width, speed_threshold,
                                   vis_scale, reach_scale, phys_scale, stab_scale, occ_ref)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CameraModel, vertical_fov, aspect, near, far)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(NormConstants, user_dist_max, max_speed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EnvConfig, dt, action_repeat, episode_length, obstacle_enabled,
                                   seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TrainConfig, total_steps, buffer_size, batch_size, lr0, gamma,
                                   gae_lambda, clip_eps, epochs_per_update, entropy_coef,
                                   value_coef, grad_clip_norm, n_envs, seed, hidden_units)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EvalConfig, steps, obstacle_enabled, deterministic_policy, seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SceneGenParams, min_width, max_width, min_height, max_height,
                                   min_depth, max_depth, min_furniture, max_furniture)

// Overlays the keys present in j onto value, rejecting keys the struct does
// not have. Sections in the run-config file may be partial.
template <typename T>
void merge_json_section(const nlohmann::json& j, T& value, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    const nlohmann::json defaults = T{};
    for (const auto& item : j.items()) {
        if (!defaults.contains(item.key()))
            throw ConfigError("unknown key \"" + item.key() + "\" in " + where);
    }
    nlohmann::json merged = value;
    merged.merge_patch(j);
    try {
        value = merged.get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

}  // namespace mrrl
