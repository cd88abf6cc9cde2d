#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "bwe/data/corpus.hpp"
#include "bwe/models/model.hpp"
#include "bwe/nn/optim.hpp"
#include "bwe/run_config.hpp"
#include "bwe/train/checkpoint.hpp"

namespace bwe {

struct ValidationResult {
  double ce = 0.0;        // mean nats per unmasked sample
  double accuracy = 0.0;  // percent
  std::int64_t count = 0;
};

// Number of unmasked rows whose argmax (lowest level on ties) equals the
// target.
template <typename T>
std::int64_t count_correct(const nn::Mat<T>& logits, std::span<const std::uint8_t> targets,
                           std::span<const std::uint8_t> mask);

// Teacher-forced CE and accuracy over `pairs`, in batches of batch_size
// and TBPTT-sized forward chunks. Does not touch the parameters.
template <typename T>
ValidationResult validate(const WaveformModel<T>& model, const std::vector<UtterancePair>& pairs,
                          int batch_size, int chunk_len);

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_ce = 0.0;
  double valid_ce = 0.0;
  double valid_accuracy = 0.0;
  bool improved = false;
};

// Owns a float model and its Adam state. Each TBPTT chunk is one update:
// forward, masked mean CE, backward, global-norm clip, Adam.
class Trainer {
 public:
  explicit Trainer(const RunConfig& cfg);
  // Resumes from a checkpoint, including optimizer state when present.
  explicit Trainer(const Checkpoint& ckpt);

  // Trains on one padded batch; returns (CE sum, unmasked count) measured
  // before each chunk's update.
  std::pair<double, std::int64_t> train_batch(const PaddedBatch& batch, const std::string& tag);
  // One pass over `pairs` in seeded shuffled order; returns mean CE.
  double run_epoch(const std::vector<UtterancePair>& pairs, int epoch);

  const RunConfig& config() const { return cfg_; }
  WaveformModel<float>& model() { return *model_; }
  const WaveformModel<float>& model() const { return *model_; }
  const nn::AdamState<float>& optimizer() const { return adam_; }
  std::int64_t updates() const { return adam_.step; }

  Checkpoint checkpoint(int epoch, double best_valid_ce) const;

 private:
  RunConfig cfg_;
  std::unique_ptr<WaveformModel<float>> model_;
  nn::AdamState<float> adam_;
  nn::ParameterSet<float> grads_;
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochStats> history;
};

// Epochs until max_epochs or until `patience` epochs pass without a lower
// validation CE. The returned checkpoint holds the best-validation
// parameters.
TrainResult train(const RunConfig& cfg, const std::vector<UtterancePair>& train_set,
                  const std::vector<UtterancePair>& valid_set,
                  const std::function<void(const EpochStats&)>& on_epoch = {});

}  // namespace bwe
