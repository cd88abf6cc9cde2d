#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bwe {

enum class ModelKind { Srnn, Hrnn };
enum class Strategy { Wideband, HighFrequency };
enum class TierKind { Sample, Intermediate, Top, Conditional };
enum class ConditionSource { None, Mfcc, External };

std::string to_string(ModelKind k);
std::string to_string(Strategy s);
std::string to_string(TierKind k);
std::string to_string(ConditionSource c);

// One tier of the hierarchy. frame_size is L^(k) in samples, concat is the
// number of consecutive frames (or sample embeddings) joined into one input.
struct TierSpec {
  int frame_size = 1;
  int concat = 1;
  TierKind kind = TierKind::Sample;
  int hidden = 0;  // LSTM width (frame tiers) or FF width (sample tier)
  int layers = 1;  // LSTM layers (frame tiers) or FF layers (sample tier)

  friend bool operator==(const TierSpec&, const TierSpec&) = default;
};

struct ModelConfig {
  ModelKind kind = ModelKind::Hrnn;
  // Bottom (sample tier, k = 1) first, top tier last. Unused for SRNN.
  std::vector<TierSpec> tiers;
  int embed_dim = 256;
  int hidden = 1024;  // SRNN width
  int srnn_lstm_layers = 2;
  int srnn_ff_layers = 2;
  Strategy strategy = Strategy::HighFrequency;
  double hf_gain = 4.0;
  double forget_bias = 1.0;
  ConditionSource condition = ConditionSource::None;
  int condition_dim = 0;
  // Analysis window of the condition features; bounds the model latency.
  double condition_window_ms = 0.0;

  // Three-tier HRNN, (L3, L2, L1) = (16, 4, 1), c3 = c2 = 2, c1 = 4.
  static ModelConfig full_hrnn(int hidden = 1024, int embed_dim = 256);
  static ModelConfig full_srnn(int hidden = 1024, int embed_dim = 256);
  // full_hrnn plus a conditional tier with frame shift 160 on top.
  static ModelConfig full_chrnn(int condition_dim, double window_ms = 25.0,
                                 int hidden = 1024, int embed_dim = 256);
  static ModelConfig hrnn(std::vector<int> frame_sizes_top_down,
                          std::vector<int> concat_top_down, int hidden, int embed_dim);

  bool conditional() const { return kind == ModelKind::Hrnn && !tiers.empty() &&
                                    tiers.back().kind == TierKind::Conditional; }
  const TierSpec& top() const { return tiers.back(); }
  int tier_count() const { return static_cast<int>(tiers.size()); }

  // Output positions are produced in blocks of this many samples (L^(K)).
  int step_samples() const;
  // Extra input samples needed past the end of the output range.
  int lookahead_samples() const;

  // Throws ConfigError describing the first violated invariant.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Future input needed to emit one output sample, in milliseconds.
double max_latency_ms(const ModelConfig& cfg, int sample_rate_hz);

}  // namespace bwe
