#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bwe/condition_track.hpp"
#include "bwe/dsp/mfcc.hpp"
#include "bwe/dsp/waveform.hpp"
#include "bwe/models/config.hpp"
#include "bwe/models/tiers.hpp"

namespace bwe {

struct ManifestEntry {
  std::string id;
  std::filesystem::path wav;
  std::optional<std::filesystem::path> features;
};

struct Manifest {
  std::string split;  // informational: train / valid / test
  std::vector<ManifestEntry> entries;
};

// One record per line: id <TAB> wav [<TAB> features]. '#' starts a comment
// line, blank lines are skipped. Relative paths resolve against base_dir.
Manifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir = {},
                        const std::string& split = {});
// Also checks that every referenced file exists.
Manifest load_manifest(const std::filesystem::path& path, const std::string& split = {});

struct UtterancePair {
  std::string id;
  QuantizedWaveform input;   // mu-law of the upsampled narrowband, 16 kHz
  QuantizedWaveform target;  // mu-law of the wideband or amplified HF signal
  Waveform narrowband;       // 8 kHz, for reconstruction
  std::optional<ConditionTrack> conditions;
};

// Fig. 7 data path. `external` supplies conditions when the source is
// External; MFCCs are computed on the narrowband signal for Mfcc.
UtterancePair build_pair(const Waveform& wideband, Strategy strategy, double hf_gain,
                         ConditionSource source = ConditionSource::None,
                         const ConditionTrack* external = nullptr, std::string id = {});

// Loads every manifest entry and builds its pair under the model's
// strategy, gain and condition source.
std::vector<UtterancePair> load_corpus(const Manifest& manifest, const ModelConfig& cfg);

// Zero-padded batch. Rows hold `length` levels; positions at or past a
// row's valid length are padding (level 128, mask 0).
struct PaddedBatch {
  std::vector<std::string> ids;
  std::int64_t batch = 0;
  std::int64_t length = 0;  // Lmax rounded up to the model step
  std::vector<std::uint8_t> inputs;   // [batch x length]
  std::vector<std::uint8_t> targets;  // [batch x length]
  std::vector<std::uint8_t> mask;     // [batch x length]
  std::vector<std::int64_t> valid_len;
  std::vector<ConditionTrack> conditions;  // empty or one per row

  std::int64_t mask_count() const;
  // Time-major targets and mask over [begin, end), matching model logits rows.
  void time_major(std::int64_t begin, std::int64_t end, std::vector<std::uint8_t>& targets_out,
                  std::vector<std::uint8_t>& mask_out) const;
};

PaddedBatch make_padded_batch(const std::vector<UtterancePair>& pairs,
                              const std::vector<std::size_t>& indices, const ModelConfig& cfg);

// Model view of a padded batch. Only each row's valid prefix is handed on,
// so whatever sits in the padding cannot influence the model.
SequenceBatch to_sequence_batch(const PaddedBatch& pb, const ModelConfig& cfg);

// Deterministic split of [0, n) into batches, shuffled by seed when asked.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch_size,
                                                    std::uint64_t seed, bool shuffle = true);

// Single-consumer stream of padded batches in seed-determined order.
class BatchStream {
 public:
  BatchStream(const std::vector<UtterancePair>& pairs, std::size_t batch_size, std::uint64_t seed,
              const ModelConfig& cfg, bool shuffle = true);
  std::optional<PaddedBatch> next();
  std::size_t batch_count() const { return order_.size(); }

 private:
  const std::vector<UtterancePair>* pairs_;
  ModelConfig cfg_;
  std::vector<std::vector<std::size_t>> order_;
  std::size_t pos_ = 0;
};

struct TbpttChunk {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  bool reset_state = false;  // true on the first chunk of a batch
};

// Rounds chunk_len up to a multiple of the model step and splits [0, length).
std::vector<TbpttChunk> tbptt_chunks(std::int64_t length, std::int64_t chunk_len,
                                     const ModelConfig& cfg);

}  // namespace bwe
