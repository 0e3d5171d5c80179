#pragma once

#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "mrrl/checkpoint.hpp"
#include "mrrl/env.hpp"

namespace mrrl {

struct EvalConfig {
    int64_t steps = 10'000;            // decisions
    bool obstacle_enabled = false;
    bool deterministic_policy = true;  // mean action
    uint64_t seed = 0;
};

// The four placement heuristics aggregated over one continuous rollout.
struct EvalReport {
    std::string scene_name;
    std::string condition;  // "static" or "dynamic"
    int64_t steps = 0;
    uint64_t seed = 0;
    double visible_ui_pct = 0.0;    // mean per-step f_vis * 100
    double non_collision_pct = 0.0; // % of steps with no overlap
    double distance_offset = 0.0;   // mean |dist - ref_distance|, meters
    double speed = 0.0;             // mean content speed, m/s
    std::string checkpoint_hash;
};

std::string eval_report_to_json(const EvalReport& report);

// Controllers map the observation to an action; scripted test controllers may
// also re-pose the content through the environment reference.
using ControllerFn = std::function<Vec3(const ObservationVector&, Environment&)>;

ControllerFn policy_controller(PolicyParams policy, bool deterministic, uint64_t seed);
ControllerFn random_controller(uint64_t seed);
// Test oracle: teleports the panel to the best collision-free pose in front of
// the user each decision and applies zero force.
ControllerFn oracle_controller();

// One continuous rollout of config.steps decisions: the user keeps cycling
// waypoints, the content persists (no respawn). When trace is non-null, a
// header record plus one JSONL record per step is written with everything the
// metrics need, so reports can be reproduced offline.
EvalReport run_eval(std::shared_ptr<const Scene> scene, std::shared_ptr<const WaypointGrid> grid,
                    const EnvParams& params, const ControllerFn& controller,
                    const EvalConfig& config, std::ostream* trace = nullptr,
                    const std::string& checkpoint_hash = "");

EvalReport run_eval_checkpoint(std::shared_ptr<const Scene> scene,
                               std::shared_ptr<const WaypointGrid> grid, const EnvParams& params,
                               const PolicyCheckpoint& ckpt, const EvalConfig& config,
                               std::ostream* trace = nullptr,
                               const std::string& checkpoint_hash = "");

// Recomputes an EvalReport from an exported trace; bitwise-identical to the
// report the producing run emitted.
EvalReport replay_metrics(const std::string& trace_path);

// Static and dynamic-obstacle conditions for every scene, Table-shaped:
// rows are metrics, columns are scene x condition, plus static-minus-dynamic
// deltas per scene.
struct ConditionMatrix {
    std::vector<EvalReport> columns;  // all static columns, then all dynamic
};

ConditionMatrix compare_conditions(
    const std::vector<std::pair<std::shared_ptr<const Scene>,
                                std::shared_ptr<const WaypointGrid>>>& scenes,
    const EnvParams& params, const PolicyCheckpoint& ckpt, const EvalConfig& base_config,
    const std::string& checkpoint_hash = "");

std::string condition_matrix_to_json(const ConditionMatrix& matrix);

}  // namespace mrrl
