#pragma once

#include <string>
#include <vector>

#include "mrrl/env.hpp"
#include "mrrl/eval.hpp"
#include "mrrl/ppo.hpp"

namespace mrrl {

// The single run-config document: scene lists plus every parameter block.
// All sections are optional in the file and default to the values below;
// unknown keys anywhere are rejected.
struct RunConfig {
    std::vector<std::string> train_scenes;
    std::vector<std::string> validation_scenes;

    EnvConfig env;
    PhysicsParams physics;
    UserSimParams user_sim;
    RewardParams reward;
    CameraModel camera;
    TrainConfig train;
    EvalConfig eval;

    // Panel geometry and sensing scales.
    double content_width = 0.4;
    double content_height = 0.3;
    double content_thickness = 0.02;
    double ray_max_length = 5.0;
    double user_dist_max = 10.0;
    double grid_spacing = 0.5;
    std::vector<double> grid_heights{1.1, 1.6};

    std::string out_dir = "out";
};

RunConfig default_run_config();

// Parses and validates; checks that every referenced scene file exists.
// occ_ref is recomputed from the camera and panel geometry unless the reward
// section pins it explicitly.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text, const std::string& base_dir);

// Assembles the per-environment parameter block (fan, norms, occ_ref included).
EnvParams make_env_params(const RunConfig& config);

}  // namespace mrrl
