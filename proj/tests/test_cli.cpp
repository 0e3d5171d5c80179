#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "mrrl/checkpoint.hpp"
#include "mrrl/scene.hpp"

// End-to-end checks of the installed binary. The harness provides MRRL_BIN and
// MRRL_SCENES via the test environment.

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string bin() {
    const char* v = std::getenv("MRRL_BIN");
    REQUIRE(v != nullptr);
    return v;
}

std::string scenes_dir() {
    const char* v = std::getenv("MRRL_SCENES");
    REQUIRE(v != nullptr);
    return v;
}

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run(const std::string& args) {
    const std::string out_path = "/tmp/mrrl_cli_out.txt";
    const std::string cmd = bin() + " " + args + " > " + out_path + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(out_path);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WEXITSTATUS(status), ss.str()};
}

std::string micro_config(const std::string& out_dir) {
    const std::string path = "/tmp/mrrl_cli_config.json";
    json config = {
        {"scenes", {{"train", {scenes_dir() + "/office_small.json"}}}},
        {"env", {{"episode_length", 40}}},
        {"train",
         {{"total_steps", 512}, {"buffer_size", 256}, {"batch_size", 64}, {"n_envs", 2}}},
        {"out_dir", out_dir}};
    std::ofstream out(path);
    out << config.dump(2);
    return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help enumerates the documented flags; unknown flags are hard errors") {
    const RunResult help = run("eval --help");
    CHECK(help.exit_code == 0);
    for (const char* flag : {"--checkpoint", "--scene", "--steps", "--obstacles", "--matrix",
                             "--trace", "--seed", "--out", "--config"})
        CHECK(help.output.find(flag) != std::string::npos);

    CHECK(run("eval --definitely-not-a-flag").exit_code == 2);
    CHECK(run("--help").exit_code == 0);
    CHECK(run("trainx").exit_code == 2);
}

TEST_CASE("gen-scene output loads and a seed sweep yields distinct valid files") {
    std::string prev;
    for (int seed = 0; seed < 10; ++seed) {
        const std::string path = "/tmp/mrrl_cli_scene_" + std::to_string(seed) + ".json";
        const RunResult r =
            run("gen-scene --seed " + std::to_string(seed) + " --out " + path);
        CHECK(r.exit_code == 0);
        const mrrl::Scene scene = mrrl::load_scene(path);
        CHECK_NOTHROW(mrrl::validate_scene(scene));
        std::ifstream in(path);
        std::stringstream ss;
        ss << in.rdbuf();
        CHECK(ss.str() != prev);
        prev = ss.str();
    }
    CHECK(run("gen-scene --seed 1 --out /tmp/x.json --min-width 1").exit_code == 2);
}

TEST_CASE("train then eval round trip through the CLI") {
    const std::string out_dir = "/tmp/mrrl_cli_train";
    fs::remove_all(out_dir);
    const std::string config = micro_config(out_dir);

    const RunResult trained = run("train --config " + config + " --seed 3 --quiet");
    CHECK(trained.exit_code == 0);
    const std::string ckpt = out_dir + "/checkpoint_final.mrrl";
    CHECK(fs::exists(ckpt));
    CHECK(fs::exists(out_dir + "/train_log.jsonl"));
    CHECK(fs::exists(out_dir + "/train_summary.json"));

    const RunResult evaled = run("eval --checkpoint " + ckpt + " --scene " + scenes_dir() +
                                 "/office_small.json --steps 100 --trace --out " + out_dir);
    CHECK(evaled.exit_code == 0);
    const std::string report_path = out_dir + "/eval_office_small_static.json";
    REQUIRE(fs::exists(report_path));
    const std::string trace_path = out_dir + "/trace_office_small_static.jsonl";
    REQUIRE(fs::exists(trace_path));

    // Replay reproduces the written report's metrics exactly.
    const RunResult replayed =
        run("replay --trace " + trace_path + " --out " + out_dir + "/replay.json");
    CHECK(replayed.exit_code == 0);
    std::ifstream a(report_path), b(out_dir + "/replay.json");
    json ja = json::parse(a), jb = json::parse(b);
    CHECK(ja["metrics"] == jb["metrics"]);
    CHECK(ja["steps"] == jb["steps"]);

    const RunResult inspected = run("inspect --checkpoint " + ckpt);
    CHECK(inspected.exit_code == 0);
    CHECK(inspected.output.find("\"observation_length\": 171") != std::string::npos);
    CHECK(inspected.output.find("\"train_steps\": 512") != std::string::npos);
}

TEST_CASE("same seed, sequential mode: identical checkpoint hashes") {
    fs::remove_all("/tmp/mrrl_cli_det_a");
    fs::remove_all("/tmp/mrrl_cli_det_b");
    const std::string ca = micro_config("/tmp/mrrl_cli_det_a");
    CHECK(run("train --config " + ca + " --seed 11 --quiet").exit_code == 0);
    const std::string cb = micro_config("/tmp/mrrl_cli_det_b");
    CHECK(run("train --config " + cb + " --seed 11 --quiet").exit_code == 0);
    CHECK(mrrl::checkpoint_file_hash("/tmp/mrrl_cli_det_a/checkpoint_final.mrrl") ==
          mrrl::checkpoint_file_hash("/tmp/mrrl_cli_det_b/checkpoint_final.mrrl"));
}

TEST_CASE("error exit codes: missing scene is 2, corrupt checkpoint is 3") {
    {
        std::ofstream out("/tmp/mrrl_cli_missing_scene.json");
        out << R"({"scenes": {"train": ["/tmp/definitely_missing_scene.json"]}})";
    }
    const RunResult r = run("train --config /tmp/mrrl_cli_missing_scene.json");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("/tmp/definitely_missing_scene.json") != std::string::npos);

    {
        std::ofstream out("/tmp/mrrl_cli_corrupt.mrrl", std::ios::binary);
        out << "garbage";
    }
    CHECK(run("inspect --checkpoint /tmp/mrrl_cli_corrupt.mrrl").exit_code == 3);
    CHECK(run("eval --checkpoint /tmp/mrrl_cli_corrupt.mrrl --scene " + scenes_dir() +
              "/office_small.json")
              .exit_code == 3);
}

}  // TEST_SUITE
