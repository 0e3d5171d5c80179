#include "mrrl/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mrrl/json_util.hpp"

namespace mrrl {

namespace {

using json = nlohmann::json;

std::string resolve_path(const std::string& path, const std::string& base_dir) {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (fs::path(base_dir) / p).lexically_normal().string();
}

std::vector<std::string> parse_scene_list(const json& j, const std::string& where,
                                          const std::string& base_dir) {
    if (!j.is_array()) throw ConfigError(where + " must be an array of paths");
    std::vector<std::string> out;
    for (const auto& item : j) {
        if (!item.is_string()) throw ConfigError(where + " entries must be strings");
        out.push_back(resolve_path(item.get<std::string>(), base_dir));
    }
    return out;
}

}  // namespace

RunConfig default_run_config() { return {}; }

RunConfig parse_run_config(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed run config: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");

    static constexpr const char* kSections[] = {"scenes",  "env",    "physics", "user_sim",
                                                "reward",  "camera", "content", "sensing",
                                                "train",   "eval",   "out_dir"};
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* s : kSections)
            if (item.key() == s) { known = true; break; }
        if (!known) throw ConfigError("unknown key \"" + item.key() + "\" in run config");
    }

    RunConfig config;
    if (j.contains("scenes")) {
        const json& js = j["scenes"];
        if (!js.is_object()) throw ConfigError("scenes must be an object");
        for (const auto& item : js.items())
            if (item.key() != "train" && item.key() != "validation")
                throw ConfigError("unknown key \"" + item.key() + "\" in scenes");
        if (js.contains("train"))
            config.train_scenes = parse_scene_list(js["train"], "scenes.train", base_dir);
        if (js.contains("validation"))
            config.validation_scenes =
                parse_scene_list(js["validation"], "scenes.validation", base_dir);
    }

    if (j.contains("env")) merge_json_section(j["env"], config.env, "env");
    if (j.contains("physics")) merge_json_section(j["physics"], config.physics, "physics");
    if (j.contains("user_sim")) merge_json_section(j["user_sim"], config.user_sim, "user_sim");
    bool occ_ref_pinned = false;
    if (j.contains("reward")) {
        occ_ref_pinned = j["reward"].is_object() && j["reward"].contains("occ_ref");
        merge_json_section(j["reward"], config.reward, "reward");
    }
    if (j.contains("camera")) merge_json_section(j["camera"], config.camera, "camera");
    if (j.contains("train")) merge_json_section(j["train"], config.train, "train");
    if (j.contains("eval")) merge_json_section(j["eval"], config.eval, "eval");

    if (j.contains("content")) {
        const json& jc = j["content"];
        if (!jc.is_object()) throw ConfigError("content must be an object");
        for (const auto& item : jc.items()) {
            if (item.key() == "width") config.content_width = item.value().get<double>();
            else if (item.key() == "height") config.content_height = item.value().get<double>();
            else if (item.key() == "thickness") config.content_thickness = item.value().get<double>();
            else throw ConfigError("unknown key \"" + item.key() + "\" in content");
        }
    }
    if (j.contains("sensing")) {
        const json& js = j["sensing"];
        if (!js.is_object()) throw ConfigError("sensing must be an object");
        for (const auto& item : js.items()) {
            if (item.key() == "ray_max_length") config.ray_max_length = item.value().get<double>();
            else if (item.key() == "user_dist_max") config.user_dist_max = item.value().get<double>();
            else if (item.key() == "grid_spacing") config.grid_spacing = item.value().get<double>();
            else if (item.key() == "grid_heights")
                config.grid_heights = item.value().get<std::vector<double>>();
            else throw ConfigError("unknown key \"" + item.key() + "\" in sensing");
        }
    }
    if (j.contains("out_dir")) {
        if (!j["out_dir"].is_string()) throw ConfigError("out_dir must be a string");
        config.out_dir = j["out_dir"].get<std::string>();
    }

    if (!(config.content_width > 0 && config.content_height > 0 && config.content_thickness > 0))
        throw ConfigError("content dimensions must be > 0");
    if (!(config.ray_max_length > 0) || !(config.user_dist_max > 0))
        throw ConfigError("sensing scales must be > 0");
    if (!(config.grid_spacing > 0) || config.grid_heights.empty())
        throw ConfigError("sensing.grid_spacing must be > 0 and grid_heights non-empty");
    if (!(config.physics.mass > 0 && config.physics.force_scale > 0 && config.physics.drag > 0 &&
          config.physics.max_speed > 0 && config.physics.dt > 0))
        throw ConfigError("physics parameters must all be > 0");
    if (!(config.user_sim.walk_speed > 0) || !(config.user_sim.dwell_min > 0) ||
        config.user_sim.dwell_max < config.user_sim.dwell_min)
        throw ConfigError("user_sim: walk_speed > 0 and 0 < dwell_min <= dwell_max required");
    if (!(config.camera.vertical_fov > 0) || config.camera.vertical_fov >= M_PI ||
        !(config.camera.near < config.camera.far))
        throw ConfigError("camera: 0 < vertical_fov < pi and near < far required");
    config.train.validate();
    if (config.eval.steps < 1) throw ConfigError("eval.steps must be >= 1");

    if (!occ_ref_pinned) {
        ContentState panel;
        panel.width = config.content_width;
        panel.height = config.content_height;
        panel.thickness = config.content_thickness;
        config.reward.occ_ref = compute_occ_ref(config.camera, panel, config.reward.ref_distance);
    }

    for (const auto& path : config.train_scenes)
        if (!std::filesystem::exists(path)) throw ConfigError("train scene not found: " + path);
    for (const auto& path : config.validation_scenes)
        if (!std::filesystem::exists(path)) throw ConfigError("validation scene not found: " + path);

    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open run config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), std::filesystem::path(path).parent_path().string());
}

EnvParams make_env_params(const RunConfig& config) {
    EnvParams params;
    params.physics = config.physics;
    params.user_sim = config.user_sim;
    params.reward = config.reward;
    params.camera = config.camera;
    params.fan = ray_fan_directions();
    params.fan.max_length = config.ray_max_length;
    params.norms.user_dist_max = config.user_dist_max;
    params.norms.max_speed = config.physics.max_speed;
    params.content_template.width = config.content_width;
    params.content_template.height = config.content_height;
    params.content_template.thickness = config.content_thickness;
    return params;
}

}  // namespace mrrl
