#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "bwe/models/config.hpp"
#include "bwe/models/tiers.hpp"
#include "bwe/nn/layers.hpp"
#include "bwe/nn/tensor.hpp"

namespace bwe {

// Recurrent state of every LSTM layer in a model, carried across TBPTT
// chunks of the same batch.
template <typename T>
struct ModelState {
  std::vector<nn::LstmState<T>> layers;
};

// Activations kept by forward() for backward(). Model-specific.
struct ForwardCache {
  virtual ~ForwardCache() = default;
};

// Common surface of SRNN and HRNN. Logit rows are time-major within the
// requested range: row (t - begin) * batch + b.
template <typename T>
class WaveformModel {
 public:
  virtual ~WaveformModel() = default;

  virtual const ModelConfig& config() const = 0;
  virtual nn::ParameterSet<T>& parameters() = 0;
  virtual const nn::ParameterSet<T>& parameters() const = 0;

  virtual ModelState<T> zero_state(std::int64_t batch) const = 0;

  // Computes logits for output positions [begin, end). Both bounds must be
  // multiples of config().step_samples(). `state` is read and advanced.
  virtual std::unique_ptr<ForwardCache> forward(const SequenceBatch& batch,
                                                std::int64_t begin, std::int64_t end,
                                                ModelState<T>& state, nn::Mat<T>& logits,
                                                bool keep_cache) const = 0;

  // Accumulates d(loss)/d(params) into grads given d(loss)/d(logits) for
  // the range of the cached forward. Gradients stop at the range start.
  virtual void backward(const ForwardCache& cache, const nn::Mat<T>& dlogits,
                        nn::ParameterSet<T>& grads) const = 0;
};

// Builds the model described by cfg with deterministic initialization from
// seed. The same seed yields the same values (up to rounding) for float
// and double models.
template <typename T>
std::unique_ptr<WaveformModel<T>> make_model(const ModelConfig& cfg, std::uint64_t seed);

// Convenience: forward over the whole batch from a zero state.
template <typename T>
nn::Mat<T> forward_all(const WaveformModel<T>& model, const SequenceBatch& batch);

// Reorders time-major rows into one contiguous [model_len x 256] block per
// batch row, truncated to that row's valid length.
template <typename T>
nn::Mat<T> row_logits(const nn::Mat<T>& time_major, std::int64_t batch, std::int64_t b,
                      std::int64_t length);

// Argmax decoding of a single sequence; ties go to the lowest level. The
// output has the input's length. Conditions are required for conditional
// models. `chunk` bounds memory by running the forward pass in pieces.
template <typename T>
QuantizedWaveform generate(const WaveformModel<T>& model, const QuantizedWaveform& x,
                           const ConditionTrack* conditions = nullptr,
                           std::int64_t chunk = 16000);

std::uint8_t argmax_level(std::span<const float> logits);
std::uint8_t argmax_level(std::span<const double> logits);

}  // namespace bwe
