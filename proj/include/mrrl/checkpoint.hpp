#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrrl/ppo.hpp"
#include "mrrl/sensing.hpp"

namespace mrrl {

inline constexpr uint32_t kCheckpointFormatVersion = 1;

// Serialized policy: file layout is the magic "MRRL", a u32 format version, a
// u64-length-prefixed JSON metadata block, then the parameters as raw
// little-endian float32 in flatten_policy() order.
struct PolicyCheckpoint {
    uint32_t format_version = kCheckpointFormatVersion;
    int obs_layout_version = kObservationLayoutVersion;
    int observation_length = kObservationDim;
    int action_dim = 3;
    int hidden_units = 128;
    std::vector<float> params;
    int64_t train_steps = 0;
    TrainConfig config;
    NormConstants norms;
};

PolicyCheckpoint checkpoint_from_policy(const PolicyParams& policy, int64_t train_steps,
                                        const TrainConfig& config, const NormConstants& norms);
PolicyParams policy_from_checkpoint(const PolicyCheckpoint& ckpt);

void save_checkpoint(const PolicyCheckpoint& ckpt, const std::string& path);
// Validates magic, format version, observation length, and parameter counts;
// throws CheckpointError naming the offending field.
PolicyCheckpoint load_checkpoint(const std::string& path);

// FNV-1a over the file bytes, as a hex string; recorded in eval reports.
std::string checkpoint_file_hash(const std::string& path);

}  // namespace mrrl
