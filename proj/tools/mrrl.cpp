#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mrrl/checkpoint.hpp"
#include "mrrl/config.hpp"
#include "mrrl/env.hpp"
#include "mrrl/eval.hpp"
#include "mrrl/json_util.hpp"
#include "mrrl/ppo.hpp"
#include "mrrl/scene.hpp"
#include "mrrl/usersim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;      // bad arguments, config, or scene inputs
constexpr int kExitCheckpoint = 3; // unreadable or incompatible checkpoint

struct LoadedScene {
    std::shared_ptr<const mrrl::Scene> scene;
    std::shared_ptr<const mrrl::WaypointGrid> grid;
};

LoadedScene load_scene_with_grid(const std::string& path, const mrrl::RunConfig& config) {
    auto scene = std::make_shared<mrrl::Scene>(mrrl::load_scene(path));
    auto grid = std::make_shared<mrrl::WaypointGrid>(
        mrrl::build_grid(*scene, config.grid_spacing, config.grid_heights));
    return {std::move(scene), std::move(grid)};
}

mrrl::TrainConfig preset_by_name(const std::string& name) {
    if (name == "paper") return mrrl::TrainConfig::paper_preset();
    if (name == "desk") return mrrl::TrainConfig::desk_preset();
    throw mrrl::ConfigError("unknown preset \"" + name + "\" (expected paper|desk)");
}

int cmd_train(const std::string& config_path, const std::string& preset, uint64_t seed,
              bool has_seed, const std::string& out_override, bool quiet) {
    mrrl::RunConfig config =
        config_path.empty() ? mrrl::default_run_config() : mrrl::load_run_config(config_path);
    if (!preset.empty()) {
        // Preset supplies the training block; the config file's train section
        // (already merged) keeps only seed unless a preset was requested.
        mrrl::TrainConfig base = preset_by_name(preset);
        base.seed = config.train.seed;
        config.train = base;
    }
    if (has_seed) config.train.seed = seed;
    if (!out_override.empty()) config.out_dir = out_override;
    if (config.train_scenes.empty())
        throw mrrl::ConfigError("no training scenes configured (scenes.train)");

    std::vector<LoadedScene> scenes;
    for (const auto& path : config.train_scenes) scenes.push_back(load_scene_with_grid(path, config));

    const mrrl::EnvParams params = make_env_params(config);
    mrrl::EnvConfig env_config = config.env;
    std::vector<std::unique_ptr<mrrl::Environment>> envs;
    for (int i = 0; i < config.train.n_envs; ++i) {
        const LoadedScene& s = scenes[i % scenes.size()];
        envs.push_back(std::make_unique<mrrl::Environment>(s.scene, s.grid, params, env_config));
    }
    mrrl::VecEnv venv(std::move(envs), config.train.seed, mrrl::threads_from_env());

    const mrrl::PolicyCheckpoint ckpt =
        mrrl::train(venv, config.train, config.out_dir, /*verbose=*/!quiet);

    json summary = {{"total_steps", ckpt.train_steps},
                    {"checkpoint", (fs::path(config.out_dir) / "checkpoint_final.mrrl").string()},
                    {"log", (fs::path(config.out_dir) / "train_log.jsonl").string()},
                    {"train_config", ckpt.config},
                    {"scenes", config.train_scenes}};
    std::ofstream summary_out(fs::path(config.out_dir) / "train_summary.json");
    summary_out << summary.dump(2) << "\n";
    std::printf("training complete: %s\n",
                (fs::path(config.out_dir) / "checkpoint_final.mrrl").c_str());
    return kExitOk;
}

int cmd_eval(const std::string& checkpoint_path, const std::vector<std::string>& scene_paths,
             const std::string& config_path, int64_t steps, bool obstacles, bool matrix,
             bool do_trace, bool stochastic, uint64_t seed, const std::string& out_dir) {
    mrrl::PolicyCheckpoint ckpt;
    std::string hash;
    try {
        ckpt = mrrl::load_checkpoint(checkpoint_path);
        hash = mrrl::checkpoint_file_hash(checkpoint_path);
    } catch (const mrrl::CheckpointError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitCheckpoint;
    }

    mrrl::RunConfig config =
        config_path.empty() ? mrrl::default_run_config() : mrrl::load_run_config(config_path);
    const mrrl::EnvParams params = make_env_params(config);

    mrrl::EvalConfig eval_config = config.eval;
    eval_config.steps = steps;
    eval_config.seed = seed;
    eval_config.deterministic_policy = !stochastic;

    fs::create_directories(out_dir);

    if (matrix) {
        std::vector<std::pair<std::shared_ptr<const mrrl::Scene>,
                              std::shared_ptr<const mrrl::WaypointGrid>>> scenes;
        for (const auto& path : scene_paths) {
            LoadedScene s = load_scene_with_grid(path, config);
            scenes.emplace_back(s.scene, s.grid);
        }
        eval_config.obstacle_enabled = true;  // matrix always runs the dynamic condition
        const mrrl::ConditionMatrix result =
            mrrl::compare_conditions(scenes, params, ckpt, eval_config, hash);
        const std::string out_path = (fs::path(out_dir) / "eval_matrix.json").string();
        std::ofstream out(out_path);
        out << mrrl::condition_matrix_to_json(result) << "\n";
        for (const auto& col : result.columns)
            std::printf("%-24s %-8s visible %6.2f%%  non-collision %6.2f%%  offset %.3f m  "
                        "speed %.3f m/s\n",
                        col.scene_name.c_str(), col.condition.c_str(), col.visible_ui_pct,
                        col.non_collision_pct, col.distance_offset, col.speed);
        std::printf("matrix written to %s\n", out_path.c_str());
        return kExitOk;
    }

    eval_config.obstacle_enabled = obstacles;
    for (const auto& path : scene_paths) {
        LoadedScene s = load_scene_with_grid(path, config);
        const std::string stem = fs::path(path).stem().string();
        const std::string condition = obstacles ? "dynamic" : "static";

        std::ofstream trace_out;
        std::ostream* trace = nullptr;
        std::string trace_path;
        if (do_trace) {
            trace_path = (fs::path(out_dir) / ("trace_" + stem + "_" + condition + ".jsonl")).string();
            trace_out.open(trace_path);
            trace = &trace_out;
        }
        const mrrl::EvalReport report =
            mrrl::run_eval_checkpoint(s.scene, s.grid, params, ckpt, eval_config, trace, hash);
        const std::string report_path =
            (fs::path(out_dir) / ("eval_" + stem + "_" + condition + ".json")).string();
        std::ofstream out(report_path);
        out << mrrl::eval_report_to_json(report) << "\n";
        std::printf("%-24s %-8s visible %6.2f%%  non-collision %6.2f%%  offset %.3f m  "
                    "speed %.3f m/s\n",
                    report.scene_name.c_str(), report.condition.c_str(), report.visible_ui_pct,
                    report.non_collision_pct, report.distance_offset, report.speed);
        std::printf("report written to %s\n", report_path.c_str());
        if (do_trace) std::printf("trace written to %s\n", trace_path.c_str());
    }
    return kExitOk;
}

int cmd_gen_scene(uint64_t seed, const std::string& out_path, const mrrl::SceneGenParams& params) {
    const mrrl::Scene scene = mrrl::generate_scene(seed, params);
    mrrl::save_scene(scene, out_path);
    std::printf("scene \"%s\" (%zu objects) written to %s\n", scene.name.c_str(),
                scene.objects.size(), out_path.c_str());
    return kExitOk;
}

int cmd_inspect(const std::string& checkpoint_path) {
    mrrl::PolicyCheckpoint ckpt;
    std::string hash;
    try {
        ckpt = mrrl::load_checkpoint(checkpoint_path);
        hash = mrrl::checkpoint_file_hash(checkpoint_path);
    } catch (const mrrl::CheckpointError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitCheckpoint;
    }
    json info = {{"format_version", ckpt.format_version},
                 {"obs_layout_version", ckpt.obs_layout_version},
                 {"observation_length", ckpt.observation_length},
                 {"action_dim", ckpt.action_dim},
                 {"hidden_units", ckpt.hidden_units},
                 {"param_count", ckpt.params.size()},
                 {"train_steps", ckpt.train_steps},
                 {"file_hash", hash},
                 {"norms", ckpt.norms},
                 {"train_config", ckpt.config}};
    std::printf("%s\n", info.dump(2).c_str());
    return kExitOk;
}

int cmd_replay(const std::string& trace_path, const std::string& out_path) {
    const mrrl::EvalReport report = mrrl::replay_metrics(trace_path);
    const std::string text = mrrl::eval_report_to_json(report);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        out << text << "\n";
        std::printf("report written to %s\n", out_path.c_str());
    } else {
        std::printf("%s\n", text.c_str());
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mrrl: RL-driven 3D UI placement simulator and trainer"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "Train a placement policy with PPO");
    std::string train_config, train_preset, train_out;
    uint64_t train_seed = 0;
    bool train_quiet = false;
    train->add_option("--config", train_config, "Run-config JSON file");
    train->add_option("--preset", train_preset, "Training preset: paper or desk")
        ->check(CLI::IsMember({"paper", "desk"}));
    auto* seed_opt = train->add_option("--seed", train_seed, "Master seed");
    train->add_option("--out", train_out, "Output directory (overrides config)");
    train->add_flag("--quiet", train_quiet, "Suppress per-update progress lines");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint over continuous rollouts");
    std::string eval_ckpt, eval_config_path, eval_out = "out";
    std::vector<std::string> eval_scenes;
    int64_t eval_steps = 10000;
    bool eval_obstacles = false, eval_matrix = false, eval_trace = false, eval_stochastic = false;
    uint64_t eval_seed = 0;
    eval->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required();
    eval->add_option("--scene", eval_scenes, "Scene JSON file (repeatable)")->required();
    eval->add_option("--config", eval_config_path, "Run-config JSON for simulation parameters");
    eval->add_option("--steps", eval_steps, "Decisions per rollout (default 10000)");
    eval->add_flag("--obstacles", eval_obstacles, "Enable the dynamic obstacle");
    eval->add_flag("--matrix", eval_matrix, "Static and dynamic conditions for every scene");
    eval->add_flag("--trace", eval_trace, "Write a per-step JSONL trace");
    eval->add_flag("--stochastic", eval_stochastic, "Sample actions instead of the mean");
    eval->add_option("--seed", eval_seed, "Rollout seed");
    eval->add_option("--out", eval_out, "Output directory");

    // gen-scene
    auto* gen = app.add_subcommand("gen-scene", "Procedurally generate a room");
    uint64_t gen_seed = 0;
    std::string gen_out;
    mrrl::SceneGenParams gen_params;
    gen->add_option("--seed", gen_seed, "Generator seed")->required();
    gen->add_option("--out", gen_out, "Output scene JSON path")->required();
    gen->add_option("--min-width", gen_params.min_width);
    gen->add_option("--max-width", gen_params.max_width);
    gen->add_option("--min-depth", gen_params.min_depth);
    gen->add_option("--max-depth", gen_params.max_depth);
    gen->add_option("--min-height", gen_params.min_height);
    gen->add_option("--max-height", gen_params.max_height);
    gen->add_option("--min-furniture", gen_params.min_furniture);
    gen->add_option("--max-furniture", gen_params.max_furniture);

    // inspect
    auto* inspect = app.add_subcommand("inspect", "Print checkpoint metadata");
    std::string inspect_ckpt;
    inspect->add_option("--checkpoint", inspect_ckpt, "Checkpoint file")->required();

    // replay
    auto* replay = app.add_subcommand("replay", "Recompute eval metrics from a trace");
    std::string replay_trace, replay_out;
    replay->add_option("--trace", replay_trace, "Trace JSONL file")->required();
    replay->add_option("--out", replay_out, "Report JSON output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*train)
            return cmd_train(train_config, train_preset, train_seed, seed_opt->count() > 0,
                             train_out, train_quiet);
        if (*eval)
            return cmd_eval(eval_ckpt, eval_scenes, eval_config_path, eval_steps, eval_obstacles,
                            eval_matrix, eval_trace, eval_stochastic, eval_seed, eval_out);
        if (*gen) return cmd_gen_scene(gen_seed, gen_out, gen_params);
        if (*inspect) return cmd_inspect(inspect_ckpt);
        if (*replay) return cmd_replay(replay_trace, replay_out);
    } catch (const mrrl::CheckpointError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitCheckpoint;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
