#pragma once

#include "bcnn/model.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace bcnn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  ModelConfig config;
  ParameterSet params;
  std::uint32_t train_seed = 0;
  std::uint32_t epoch = 0;

  bool operator==(const Checkpoint&) const = default;
};

// Little-endian layout:
//   "BCNN" | u32 version | u32 input_size | u32 n | n x u32 channels | u32 classes | u32 seed
//   | u32 tensor count | per tensor: u32 name length, name bytes, u32 rank, rank x u32 extents,
//   f32 payload | trailer: u32 train_seed, u32 epoch
// The trailer is optional on read (absent means zero).
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint);

// FormatError on bad magic, VersionError on an unknown version, IntegrityError
// on truncation, trailing bytes, or tensors that disagree with the config.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace bcnn
