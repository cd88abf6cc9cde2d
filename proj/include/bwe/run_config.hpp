#pragma once

#include <cstdint>
#include <filesystem>

#include "bwe/models/config.hpp"
#include "bwe/text_config.hpp"

namespace bwe {

struct TrainConfig {
  double lr = 1e-3;
  int batch_size = 8;  // desk scale; full-size runs use 64
  int max_epochs = 200;
  int patience = 5;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;
  int chunk_len = 480;  // samples at the output rate

  void validate() const;
};

struct DataConfig {
  std::filesystem::path train;
  std::filesystem::path valid;
  std::filesystem::path test;
};

struct EvalConfig {
  int lsd_frame = 512;  // 32 ms at 16 kHz
  int lsd_shift = 256;
  double snr_cap_db = 120.0;
  double lsd_epsilon = 1e-10;

  void validate() const;
};

// Everything a run needs, as read from a `section.key = value` file.
// Defaults are the desk-scale system: full-size tier layout, hidden 32,
// embedding 16, batch 8.
struct RunConfig {
  ModelConfig model = desk_model();
  TrainConfig train;
  DataConfig data;
  EvalConfig eval;

  static ModelConfig desk_model();
  static RunConfig full();

  // Unknown keys are rejected. Relative data paths resolve against base_dir.
  static RunConfig from_text(const TextConfig& text, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);
  // Every field written out explicitly, so the text alone rebuilds the run.
  TextConfig to_text() const;
  void validate() const;
};

}  // namespace bwe
