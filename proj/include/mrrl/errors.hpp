#pragma once

#include <stdexcept>
#include <string>

namespace mrrl {

// Precondition breach by the caller; a programming error, not an input error.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// Malformed scene/config file. Message names the offending field.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Procedural generation could not satisfy its packing constraints.
struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rejection sampling exhausted its try budget.
struct SamplingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Waypoint grid construction produced no valid points.
struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Checkpoint file is corrupt, truncated, or incompatible with this build.
struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training aborted (non-finite loss or parameters).
struct TrainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mrrl
