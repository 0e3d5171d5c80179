#include "mrrl/eval.hpp"

#include <cmath>
#include <fstream>
#include <memory>

#include <nlohmann/json.hpp>

#include "mrrl/json_util.hpp"

namespace mrrl {

namespace {

using json = nlohmann::ordered_json;

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

}  // namespace

std::string eval_report_to_json(const EvalReport& report) {
    json j;
    j["scene"] = report.scene_name;
    j["condition"] = report.condition;
    j["steps"] = report.steps;
    j["seed"] = report.seed;
    j["metrics"] = {{"visible_ui_pct", report.visible_ui_pct},
                    {"non_collision_pct", report.non_collision_pct},
                    {"distance_offset", report.distance_offset},
                    {"speed", report.speed}};
    j["checkpoint_hash"] = report.checkpoint_hash;
    return j.dump(2);
}

ControllerFn policy_controller(PolicyParams policy, bool deterministic, uint64_t seed) {
    auto shared = std::make_shared<PolicyParams>(std::move(policy));
    auto rng = std::make_shared<RngStream>(derive_seed(seed, "eval-actions"));
    return [shared, rng, deterministic](const ObservationVector& obs, Environment&) -> Vec3 {
        if (deterministic) return policy_mean_action(*shared, obs);
        return policy_sample(*shared, obs, *rng).action;
    };
}

ControllerFn random_controller(uint64_t seed) {
    auto rng = std::make_shared<RngStream>(derive_seed(seed, "random-actions"));
    return [rng](const ObservationVector&, Environment&) -> Vec3 {
        return {rng->uniform(-1.0, 1.0), rng->uniform(-1.0, 1.0), rng->uniform(-1.0, 1.0)};
    };
}

ControllerFn oracle_controller() {
    return [](const ObservationVector&, Environment& env) -> Vec3 {
        const UserState& user = env.user();
        ContentState content = env.content();
        const double ref = env.params().reward.ref_distance;

        double d = ref;
        const RayHit ahead = raycast(env.scene(), user.eye_pos, user.forward, ref + 0.5);
        if (ahead.hit) d = std::min(d, ahead.distance - 0.3);
        d = std::max(d, 0.2);

        auto place = [&](double dist) {
            content.pos = user.eye_pos + user.forward * dist;
            content.vel = {0, 0, 0};
            content = billboard(content, user.eye_pos);
        };
        auto collides = [&](const ContentState& c) {
            const OrientedBox box = content_box(c);
            if (overlaps(env.scene(), box)) return true;
            return env.obstacle().active && boxes_overlap(box, env.obstacle().box());
        };
        place(d);
        // Waypoints keep 0.3 m clearance, so pulling toward the eye always
        // frees the panel (its bounding sphere shrinks inside that clearance).
        for (int i = 0; i < 8 && collides(content); ++i) {
            d = std::max(0.2, d - 0.05);
            place(d);
        }
        env.override_content(content);
        return {0, 0, 0};
    };
}

EvalReport run_eval(std::shared_ptr<const Scene> scene, std::shared_ptr<const WaypointGrid> grid,
                    const EnvParams& params, const ControllerFn& controller,
                    const EvalConfig& config, std::ostream* trace,
                    const std::string& checkpoint_hash) {
    if (config.steps < 1) throw ContractViolation("run_eval: steps must be >= 1");

    EnvConfig env_config;
    env_config.obstacle_enabled = config.obstacle_enabled;
    env_config.episode_length = static_cast<int>(config.steps);  // one continuous rollout
    Environment env(scene, grid, params, env_config);

    EvalReport report;
    report.scene_name = scene->name;
    report.condition = config.obstacle_enabled ? "dynamic" : "static";
    report.steps = config.steps;
    report.seed = config.seed;
    report.checkpoint_hash = checkpoint_hash;

    if (trace != nullptr) {
        json header = {{"type", "header"},
                       {"scene", scene->name},
                       {"condition", report.condition},
                       {"steps", config.steps},
                       {"seed", config.seed},
                       {"ref_distance", params.reward.ref_distance},
                       {"checkpoint_hash", checkpoint_hash}};
        *trace << header.dump() << "\n";
    }

    ObservationVector obs = env.reset(config.seed);
    double sum_fvis = 0.0, sum_offset = 0.0, sum_speed = 0.0;
    int64_t clear_steps = 0;
    const double ref = params.reward.ref_distance;

    for (int64_t t = 0; t < config.steps; ++t) {
        const Vec3 action = controller(obs, env);
        const StepResult r = env.step(action);
        sum_fvis += r.info.f_vis;
        if (!r.info.overlap) ++clear_steps;
        sum_offset += std::abs(r.info.distance - ref);
        sum_speed += r.info.content_speed;

        if (trace != nullptr) {
            json line = {{"type", "step"},
                         {"t", t},
                         {"user_pos", vec3_json(env.user().eye_pos)},
                         {"user_forward", vec3_json(env.user().forward)},
                         {"user_moving", r.info.user_moving},
                         {"content_pos", vec3_json(env.content().pos)},
                         {"content_vel", vec3_json(env.content().vel)},
                         {"content_facing", vec3_json(env.content().facing)},
                         {"reward",
                          {{"visibility", r.reward.visibility},
                           {"reachability", r.reward.reachability},
                           {"physicality", r.reward.physicality},
                           {"stability", r.reward.stability},
                           {"total", r.reward.total}}},
                         {"f_vis", r.info.f_vis},
                         {"occ", r.info.occ},
                         {"overlap", r.info.overlap},
                         {"distance", r.info.distance},
                         {"speed", r.info.content_speed}};
            if (env.obstacle().active) line["obstacle_center"] = vec3_json(env.obstacle().center);
            *trace << line.dump() << "\n";
        }
        obs = r.observation;
    }

    const double steps = static_cast<double>(config.steps);
    report.visible_ui_pct = sum_fvis / steps * 100.0;
    report.non_collision_pct = static_cast<double>(clear_steps) / steps * 100.0;
    report.distance_offset = sum_offset / steps;
    report.speed = sum_speed / steps;
    return report;
}

EvalReport run_eval_checkpoint(std::shared_ptr<const Scene> scene,
                               std::shared_ptr<const WaypointGrid> grid, const EnvParams& params,
                               const PolicyCheckpoint& ckpt, const EvalConfig& config,
                               std::ostream* trace, const std::string& checkpoint_hash) {
    PolicyParams policy = policy_from_checkpoint(ckpt);
    return run_eval(std::move(scene), std::move(grid), params,
                    policy_controller(std::move(policy), config.deterministic_policy, config.seed),
                    config, trace, checkpoint_hash);
}

EvalReport replay_metrics(const std::string& trace_path) {
    std::ifstream in(trace_path);
    if (!in) throw ParseError("cannot open trace file: " + trace_path);

    EvalReport report;
    double ref = 0.5;
    double sum_fvis = 0.0, sum_offset = 0.0, sum_speed = 0.0;
    int64_t clear_steps = 0, steps = 0;

    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(std::string("malformed trace line: ") + e.what());
        }
        const std::string type = j.value("type", "");
        try {
            if (type == "header") {
                report.scene_name = j.at("scene").get<std::string>();
                report.condition = j.at("condition").get<std::string>();
                report.seed = j.at("seed").get<uint64_t>();
                report.checkpoint_hash = j.value("checkpoint_hash", "");
                ref = j.at("ref_distance").get<double>();
                have_header = true;
            } else if (type == "step") {
                if (!have_header) throw ParseError("trace step record precedes the header");
                sum_fvis += j.at("f_vis").get<double>();
                if (!j.at("overlap").get<bool>()) ++clear_steps;
                sum_offset += std::abs(j.at("distance").get<double>() - ref);
                sum_speed += j.at("speed").get<double>();
                ++steps;
            } else {
                throw ParseError("trace line with unknown type \"" + type + "\"");
            }
        } catch (const json::exception& e) {
            throw ParseError(std::string("trace record missing field: ") + e.what());
        }
    }
    if (!have_header) throw ParseError("trace has no header record: " + trace_path);
    if (steps == 0) throw ParseError("trace has no step records: " + trace_path);

    report.steps = steps;
    const double n = static_cast<double>(steps);
    report.visible_ui_pct = sum_fvis / n * 100.0;
    report.non_collision_pct = static_cast<double>(clear_steps) / n * 100.0;
    report.distance_offset = sum_offset / n;
    report.speed = sum_speed / n;
    return report;
}

ConditionMatrix compare_conditions(
    const std::vector<std::pair<std::shared_ptr<const Scene>,
                                std::shared_ptr<const WaypointGrid>>>& scenes,
    const EnvParams& params, const PolicyCheckpoint& ckpt, const EvalConfig& base_config,
    const std::string& checkpoint_hash) {
    if (scenes.empty()) throw ContractViolation("compare_conditions: at least one scene required");

    ConditionMatrix matrix;
    for (bool dynamic : {false, true}) {
        for (const auto& [scene, grid] : scenes) {
            EvalConfig config = base_config;
            config.obstacle_enabled = dynamic && base_config.obstacle_enabled;
            EvalReport report =
                run_eval_checkpoint(scene, grid, params, ckpt, config, nullptr, checkpoint_hash);
            // Column labels reflect the requested condition even when the
            // obstacle is globally disabled (the delta is then zero).
            report.condition = dynamic ? "dynamic" : "static";
            matrix.columns.push_back(std::move(report));
        }
    }
    return matrix;
}

std::string condition_matrix_to_json(const ConditionMatrix& matrix) {
    json j;
    j["metrics"] = {"visible_ui_pct", "non_collision_pct", "distance_offset", "speed"};
    j["columns"] = json::array();
    for (const auto& col : matrix.columns) {
        j["columns"].push_back({{"scene", col.scene_name},
                                {"condition", col.condition},
                                {"visible_ui_pct", col.visible_ui_pct},
                                {"non_collision_pct", col.non_collision_pct},
                                {"distance_offset", col.distance_offset},
                                {"speed", col.speed}});
    }
    j["deltas"] = json::array();
    const size_t half = matrix.columns.size() / 2;
    for (size_t i = 0; i < half; ++i) {
        const EvalReport& s = matrix.columns[i];
        const EvalReport& d = matrix.columns[i + half];
        j["deltas"].push_back(
            {{"scene", s.scene_name},
             {"visible_ui_pct", s.visible_ui_pct - d.visible_ui_pct},
             {"non_collision_pct", s.non_collision_pct - d.non_collision_pct},
             {"distance_offset", s.distance_offset - d.distance_offset},
             {"speed", s.speed - d.speed}});
    }
    return j.dump(2);
}

}  // namespace mrrl
