#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bwe/condition_track.hpp"
#include "bwe/dsp/waveform.hpp"
#include "bwe/models/config.hpp"
#include "bwe/nn/layers.hpp"

namespace bwe {

// Level sequence padded for a model: `model_len` output positions
// (a multiple of L^(K)) plus trailing lookahead samples.
struct PaddedInput {
  std::vector<std::uint8_t> levels;
  std::vector<std::uint8_t> mask;  // 1 on the original samples
  std::int64_t valid_len = 0;
  std::int64_t model_len = 0;
};

// Appends zero-amplitude levels (128) so the output range is divisible by
// L^(K), then the lookahead the frame and sample tiers read past it.
PaddedInput pad_for_model(const QuantizedWaveform& x, const ModelConfig& cfg);
PaddedInput pad_for_model(std::span<const std::uint8_t> x, const ModelConfig& cfg);

// Rectangular batch of padded sequences. Levels past each row's valid
// length are forced to 128, so padding content never reaches the model.
struct SequenceBatch {
  std::int64_t batch = 0;
  std::int64_t total_len = 0;  // per row, including lookahead
  std::int64_t model_len = 0;  // output positions per row
  std::vector<std::uint8_t> levels;  // [batch x total_len]
  std::vector<std::int64_t> valid_len;
  std::vector<ConditionTrack> conditions;  // empty, or one per row

  std::uint8_t level(std::int64_t b, std::int64_t i) const {
    return levels[static_cast<std::size_t>(b * total_len + i)];
  }
  std::span<const std::uint8_t> row(std::int64_t b) const {
    return {levels.data() + b * total_len, static_cast<std::size_t>(total_len)};
  }
};

// `min_model_len` lets callers (batching, TBPTT) request a longer output
// range than the longest row needs. Conditions, when given, are extended
// by repeating their last frame to cover every top-tier step.
SequenceBatch make_sequence_batch(const std::vector<std::span<const std::uint8_t>>& rows,
                                  const ModelConfig& cfg,
                                  std::vector<ConditionTrack> conditions = {},
                                  std::int64_t min_model_len = 0);
SequenceBatch make_sequence_batch(const QuantizedWaveform& x, const ModelConfig& cfg,
                                  const ConditionTrack* conditions = nullptr);

// Frame inputs f_t of a waveform tier for steps [first_step, first_step +
// n_steps): row (t, b) holds concat * frame_size decoded amplitudes
// starting at sample (first_step + t) * frame_size. Time-major rows.
template <typename T>
void gather_frame_inputs(const SequenceBatch& batch, const TierSpec& tier,
                         std::int64_t first_step, std::int64_t n_steps, nn::Mat<T>& out);

// Single-sequence convenience form of the above, covering all model steps.
template <typename T>
nn::Mat<T> frame_tier_inputs(const PaddedInput& x, const TierSpec& tier);

// Sample-tier input: concatenation of `concat` consecutive embeddings.
// `embeddings` has one row per input position of a single sequence.
template <typename T>
nn::Mat<T> concat_sample_embeddings(const nn::Mat<T>& embeddings, int concat,
                                    std::int64_t n_steps);

// Conditioning fan-out: for each upper step t and j < r, output row
// ((t * r + j) * batch + b) = W_j * h(t * batch + b), where W_j is the j-th
// block of `weight` ([r * D x H]).
template <typename T>
void conditioning_fanout(const nn::Mat<T>& h, const nn::Tensor<T>& weight, int ratio,
                         std::int64_t batch, nn::Mat<T>& out);

// Backward of conditioning_fanout: accumulates into dweight, writes dh.
template <typename T>
void conditioning_fanout_backward(const nn::Mat<T>& h, const nn::Tensor<T>& weight,
                                  int ratio, std::int64_t batch, const nn::Mat<T>& dout,
                                  nn::Tensor<T>& dweight, nn::Mat<T>& dh);

}  // namespace bwe
