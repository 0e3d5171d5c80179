#include "mrrl/reward.hpp"

#include <cmath>

namespace mrrl {

double compute_occ_ref(const CameraModel& camera, const ContentState& content_template,
                       double ref_distance) {
    // Synthetic head-on arrangement in an empty world: eye at origin looking
    // +z, panel billboarded back at the eye.
    Scene empty;
    empty.name = "occ-ref";
    empty.bounds = {{-100, -100, -100}, {100, 100, 100}};

    UserState user;
    user.eye_pos = {0, 0, 0};
    user.forward = {0, 0, 1};

    ContentState content = content_template;
    content.pos = {0, 0, ref_distance};
    content.facing = {0, 0, -1};

    ObstacleState no_obstacle;
    return visibility(empty, content, user, no_obstacle, camera).occ;
}

double p_percent(const VisibilitySample& vs, const RewardParams& params) {
    const double occ_term = std::min(vs.occ / std::max(params.occ_ref, 1e-12), 1.0);
    return vs.f_vis * occ_term;
}

double r_visibility(double p, const RewardParams& params) {
    return p > 0.0 ? params.vis_scale * p : -params.vis_scale;
}

double r_reachability(double dist, bool in_front, const RewardParams& params) {
    if (!in_front) return -params.reach_scale;
    const double d = dist - params.ref_distance;
    return params.reach_scale * std::exp(-(d * d * d * d) / params.kernel_width);
}

double r_physicality(bool overlapping, const RewardParams& params) {
    return overlapping ? -params.phys_scale : params.phys_scale;
}

double r_stability(bool user_moving, double speed, const RewardParams& params) {
    if (user_moving) return 0.0;
    return speed < params.speed_threshold ? params.stab_scale : -params.stab_scale;
}

RewardInputs gather_reward_inputs(const Scene& scene, const ContentState& content,
                                  const UserState& user, const ObstacleState& obstacle,
                                  const CameraModel& camera) {
    RewardInputs in;
    in.vs = visibility(scene, content, user, obstacle, camera);
    in.distance = (content.pos - user.eye_pos).norm();
    in.in_front = user.forward.dot(content.pos - user.eye_pos) > 0.0;
    const OrientedBox box = content_box(content);
    in.overlap = overlaps(scene, box) || (obstacle.active && boxes_overlap(box, obstacle.box()));
    in.user_moving = user.moving;
    in.content_speed = content.speed();
    return in;
}

RewardBreakdown reward_from_inputs(const RewardInputs& in, const RewardParams& params) {
    RewardBreakdown r;
    r.visibility = r_visibility(p_percent(in.vs, params), params);
    r.reachability = r_reachability(in.distance, in.in_front, params);
    r.physicality = r_physicality(in.overlap, params);
    r.stability = r_stability(in.user_moving, in.content_speed, params);
    r.total = r.visibility + r.reachability + r.physicality + r.stability;
    return r;
}

RewardBreakdown total_reward(const Scene& scene, const ContentState& content,
                             const UserState& user, const ObstacleState& obstacle,
                             const CameraModel& camera, const RewardParams& params) {
    return reward_from_inputs(gather_reward_inputs(scene, content, user, obstacle, camera), params);
}

}  // namespace mrrl
