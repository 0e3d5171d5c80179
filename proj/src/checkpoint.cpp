#include "mrrl/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mrrl/json_util.hpp"

namespace mrrl {

namespace {

using json = nlohmann::json;

constexpr char kMagic[4] = {'M', 'R', 'R', 'L'};

Eigen::Index expected_param_count(int obs_dim, int hidden, int act_dim) {
    const auto mlp = [&](int in, int out) {
        return static_cast<Eigen::Index>(in) * hidden + hidden + hidden * hidden + hidden +
               hidden * out + out;
    };
    return mlp(obs_dim, act_dim) + act_dim + mlp(obs_dim, 1);
}

template <typename T>
void write_raw(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in, const char* field) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw CheckpointError(std::string("corrupt header: truncated ") + field);
    return value;
}

}  // namespace

PolicyCheckpoint checkpoint_from_policy(const PolicyParams& policy, int64_t train_steps,
                                        const TrainConfig& config, const NormConstants& norms) {
    PolicyCheckpoint ckpt;
    ckpt.observation_length = policy.actor.input_dim();
    ckpt.hidden_units = static_cast<int>(policy.actor.w1.rows());
    ckpt.action_dim = policy.actor.output_dim();
    ckpt.train_steps = train_steps;
    ckpt.config = config;
    ckpt.norms = norms;

    const Eigen::VectorXd flat = flatten_policy(policy);
    ckpt.params.resize(static_cast<size_t>(flat.size()));
    for (Eigen::Index i = 0; i < flat.size(); ++i)
        ckpt.params[static_cast<size_t>(i)] = static_cast<float>(flat[i]);
    return ckpt;
}

PolicyParams policy_from_checkpoint(const PolicyCheckpoint& ckpt) {
    PolicyParams policy =
        PolicyParams::create(ckpt.observation_length, ckpt.hidden_units, /*seed=*/0);
    if (static_cast<Eigen::Index>(ckpt.params.size()) != policy.parameter_count())
        throw CheckpointError("parameter count mismatch: checkpoint has " +
                              std::to_string(ckpt.params.size()) + ", layer dims imply " +
                              std::to_string(policy.parameter_count()));
    Eigen::VectorXd flat(policy.parameter_count());
    for (Eigen::Index i = 0; i < flat.size(); ++i)
        flat[i] = static_cast<double>(ckpt.params[static_cast<size_t>(i)]);
    unflatten_policy(policy, flat);
    return policy;
}

void save_checkpoint(const PolicyCheckpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot open checkpoint file for writing: " + path);

    json meta;
    meta["obs_layout_version"] = ckpt.obs_layout_version;
    meta["observation_length"] = ckpt.observation_length;
    meta["action_dim"] = ckpt.action_dim;
    meta["hidden_units"] = ckpt.hidden_units;
    meta["param_count"] = ckpt.params.size();
    meta["train_steps"] = ckpt.train_steps;
    meta["norms"] = ckpt.norms;
    meta["train_config"] = ckpt.config;
    const std::string meta_str = meta.dump();

    out.write(kMagic, sizeof(kMagic));
    write_raw(out, ckpt.format_version);
    write_raw(out, static_cast<uint64_t>(meta_str.size()));
    out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
    write_raw(out, static_cast<uint64_t>(ckpt.params.size()));
    out.write(reinterpret_cast<const char*>(ckpt.params.data()),
              static_cast<std::streamsize>(ckpt.params.size() * sizeof(float)));
    if (!out) throw CheckpointError("failed writing checkpoint: " + path);
}

PolicyCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint file: " + path);

    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw CheckpointError("corrupt header: bad magic, not a checkpoint file: " + path);

    PolicyCheckpoint ckpt;
    ckpt.format_version = read_raw<uint32_t>(in, "format_version");
    if (ckpt.format_version != kCheckpointFormatVersion)
        throw CheckpointError("unsupported format_version " + std::to_string(ckpt.format_version) +
                              " (build supports " + std::to_string(kCheckpointFormatVersion) + ")");

    const auto meta_len = read_raw<uint64_t>(in, "metadata length");
    if (meta_len > (1ull << 24)) throw CheckpointError("corrupt header: implausible metadata length");
    std::string meta_str(meta_len, '\0');
    in.read(meta_str.data(), static_cast<std::streamsize>(meta_len));
    if (!in) throw CheckpointError("corrupt header: truncated metadata block");

    json meta;
    try {
        meta = json::parse(meta_str);
        ckpt.obs_layout_version = meta.at("obs_layout_version").get<int>();
        ckpt.observation_length = meta.at("observation_length").get<int>();
        ckpt.action_dim = meta.at("action_dim").get<int>();
        ckpt.hidden_units = meta.at("hidden_units").get<int>();
        ckpt.train_steps = meta.at("train_steps").get<int64_t>();
        ckpt.norms = meta.at("norms").get<NormConstants>();
        ckpt.config = meta.at("train_config").get<TrainConfig>();
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("corrupt metadata block: ") + e.what());
    }

    if (ckpt.obs_layout_version != kObservationLayoutVersion)
        throw CheckpointError("obs_layout_version mismatch: checkpoint has " +
                              std::to_string(ckpt.obs_layout_version) + ", build expects " +
                              std::to_string(kObservationLayoutVersion));
    if (ckpt.observation_length != kObservationDim)
        throw CheckpointError("observation_length mismatch: checkpoint has " +
                              std::to_string(ckpt.observation_length) + ", build expects " +
                              std::to_string(kObservationDim));

    const auto param_count = read_raw<uint64_t>(in, "param_count");
    const auto expected = expected_param_count(ckpt.observation_length, ckpt.hidden_units,
                                               ckpt.action_dim);
    if (param_count != static_cast<uint64_t>(expected) ||
        param_count != meta.at("param_count").get<uint64_t>())
        throw CheckpointError("param_count mismatch: file declares " + std::to_string(param_count) +
                              ", layer dims imply " + std::to_string(expected));

    ckpt.params.resize(param_count);
    in.read(reinterpret_cast<char*>(ckpt.params.data()),
            static_cast<std::streamsize>(param_count * sizeof(float)));
    if (!in) throw CheckpointError("truncated parameter data in " + path);
    return ckpt;
}

std::string checkpoint_file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint file: " + path);
    uint64_t h = 0xcbf29ce484222325ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
        if (!in) break;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

}  // namespace mrrl
