#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "bwe/models/model.hpp"
#include "bwe/nn/optim.hpp"
#include "bwe/run_config.hpp"

namespace bwe {

// Binary layout, little-endian:
//   "BWEH", u32 version, u32 blob length, config blob (text config plus
//   meta.* lines), u32 tensor count, then per tensor: u32 name length,
//   name, u8 rank, rank x u32 dims, raw float32 data.
// Optimizer moments are stored as extra tensors "adam.m.<name>" and
// "adam.v.<name>".
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  RunConfig config;
  nn::ParameterSet<float> params;
  std::optional<nn::AdamState<float>> adam;
  int epoch = 0;
  double best_valid_ce = std::numeric_limits<double>::infinity();

  // A model of config.model carrying these parameters.
  template <typename T = float>
  std::unique_ptr<WaveformModel<T>> make_model() const;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
// Validates everything before returning; throws FormatError on bad magic,
// version, truncation, trailing bytes, unknown, duplicate or missing
// tensors and shape mismatches.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes,
                             const std::string& what = "checkpoint");
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace bwe
