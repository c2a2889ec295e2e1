#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "asv/nn/mlp.hpp"

namespace asv::nn {

constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Named networks plus the observation settings a policy was trained with.
/// Byte layout is documented in docs/checkpoint_format.md.
struct Checkpoint {
  std::uint32_t history = 4;
  std::uint32_t observation_mode = 0;  // 0 relative, 1 absolute
  double f_max = 4.0;
  std::vector<std::pair<std::string, Mlp>> networks;

  const Mlp& network(const std::string& name) const;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

/// Writes to `path.tmp` and renames over `path`.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace asv::nn
