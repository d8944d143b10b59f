#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "trajnav/nn/layers.hpp"

namespace trajnav::nn {

inline constexpr std::uint32_t kCheckpointFormat = 1;
inline constexpr const char* kSubstrateVersion = "trajnav-nn/1";

struct StoredTensor {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

struct Checkpoint {
  std::uint32_t format = kCheckpointFormat;
  std::string substrate;
  std::uint64_t config_hash = 0;
  std::vector<StoredTensor> tensors;
};

// Binary layout (little endian):
//   "TRAJNAV\0" | u32 format | u32 len + substrate | u64 config hash | u32 count
//   count x { u32 len + name | u32 rank | rank x u64 dim | numel x f32 }
void write_checkpoint(const std::filesystem::path& path, const ParameterList<float>& params,
                      std::uint64_t config_hash);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Copies stored values into matching parameters. Every parameter must be
// present with the same shape; extra stored tensors are ignored unless
// `strict` is set.
void load_into(const Checkpoint& ckpt, const ParameterList<float>& params, bool strict = false);

}  // namespace trajnav::nn
