#pragma once

#include <filesystem>
#include <string>

#include "hetjssp/nn/parameters.hpp"
#include "hetjssp/nn/policy.hpp"

namespace hetjssp::nn {

/// Everything needed to resume or evaluate a run.
struct Checkpoint {
  PolicyModel model;
  Adam<Real> optimizer;
  std::string rng_state;
  long env_steps = 0;
};

/// Binary container: 8-byte magic, u64 header length, JSON header (arch,
/// hyperparameters, optimizer settings, RNG state, parameter shapes), then
/// raw little-endian doubles for parameter values and Adam moments.
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hetjssp::nn
