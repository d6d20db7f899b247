#pragma once

// Checkpoint container:
//   8 bytes   "ACTPCNGC"
//   8 bytes   header length n (little-endian uint64)
//   n bytes   UTF-8 JSON header {version, config_hash, config, env, scalars,
//             tensors: [{name, role, rows, cols}, ...]}
//   float32 little-endian row-major data for each tensor in header order.

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "actpc/agent.hpp"
#include "actpc/config.hpp"

namespace actpc::persistence {

inline constexpr int kFormatVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Written atomically (temp file + rename). With `snapshot_buffers` the
/// replay, demo and actor buffers are stored too, which makes a resumed run
/// follow the uninterrupted one exactly from the next episode boundary.
void save(const Agent& agent, const RunConfig& cfg, const std::string& path, bool snapshot_buffers = false);

/// Rebuilds the agent for `cfg`. Rejects a format-version or config-hash
/// mismatch unless `force`; a tensor whose shape differs from what `cfg`
/// builds is always an error naming the tensor.
Agent load(const std::string& path, const RunConfig& cfg, bool force = false);

nlohmann::json read_header(const std::string& path);

/// Names of the model tensors (circuits, targets, optimizer moments,
/// working-memory projection) in container order.
std::vector<std::string> tensor_names(const Agent& agent);

}  // namespace actpc::persistence
