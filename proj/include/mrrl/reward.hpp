#pragma once

#include "mrrl/dynamics.hpp"
#include "mrrl/scene.hpp"
#include "mrrl/sensing.hpp"
#include "mrrl/usersim.hpp"

namespace mrrl {

struct RewardParams {
    double ref_distance = 0.5;      // m; reachability kernel peak
    double kernel_width = 0.05;     // m^4; reachability kernel denominator
    double speed_threshold = 0.3;   // m/s; stability cutoff
    double vis_scale = 0.1;
    double reach_scale = 0.1;
    double phys_scale = 0.01;
    double stab_scale = 0.01;
    double occ_ref = 0.2025;        // viewport fraction of a head-on panel at ref_distance
};

// occ of the panel seen head-on at ref_distance; the normalizer for occupancy.
double compute_occ_ref(const CameraModel& camera, const ContentState& content_template,
                       double ref_distance);

struct RewardBreakdown {
    double visibility = 0.0;
    double reachability = 0.0;
    double physicality = 0.0;
    double stability = 0.0;
    double total = 0.0;
};

// Composite visibility score: panel fraction visible, scaled by how much of
// the reference viewport occupancy it reaches.
double p_percent(const VisibilitySample& vs, const RewardParams& params);

// vis_scale * p when p > 0, else -vis_scale.
double r_visibility(double p, const RewardParams& params);

// reach_scale * exp(-(dist - ref)^4 / kernel_width) in front of the user, else
// -reach_scale. The exponent is negated relative to the source formula, which
// diverges as printed; the kernel peaks at ref_distance.
double r_reachability(double dist, bool in_front, const RewardParams& params);

double r_physicality(bool overlapping, const RewardParams& params);

// 0 while the user moves; otherwise rewards panel speed below the threshold.
double r_stability(bool user_moving, double speed, const RewardParams& params);

// Everything total_reward measures about the instantaneous state; kept so the
// environment can report diagnostics without recomputing geometry.
struct RewardInputs {
    VisibilitySample vs;
    double distance = 0.0;   // euclidean content-to-eye distance
    bool in_front = false;   // user.forward . (content - eye) > 0
    bool overlap = false;    // content box vs scene objects or active obstacle
    bool user_moving = false;
    double content_speed = 0.0;
};

RewardInputs gather_reward_inputs(const Scene& scene, const ContentState& content,
                                  const UserState& user, const ObstacleState& obstacle,
                                  const CameraModel& camera);

RewardBreakdown reward_from_inputs(const RewardInputs& in, const RewardParams& params);

RewardBreakdown total_reward(const Scene& scene, const ContentState& content,
                             const UserState& user, const ObstacleState& obstacle,
                             const CameraModel& camera, const RewardParams& params);

}  // namespace mrrl
