#include "bwe/train/trainer.hpp"

#include <cmath>

#include "bwe/error.hpp"

namespace bwe {

namespace {

// Independent per-epoch shuffle seeds from one run seed.
std::uint64_t epoch_seed(std::uint64_t seed, int epoch) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(epoch + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

nn::AdamHyper hyper_from(const TrainConfig& t) {
  nn::AdamHyper h;
  h.lr = t.lr;
  return h;
}

}  // namespace

template <typename T>
std::int64_t count_correct(const nn::Mat<T>& logits, std::span<const std::uint8_t> targets,
                           std::span<const std::uint8_t> mask) {
  if (static_cast<std::size_t>(logits.rows()) != targets.size() || targets.size() != mask.size())
    throw ShapeError("count_correct: logits, targets and mask disagree in length");
  std::int64_t n = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const std::span<const T> row(logits.data() + i * logits.cols(),
                                 static_cast<std::size_t>(logits.cols()));
    n += argmax_level(row) == targets[static_cast<std::size_t>(i)];
  }
  return n;
}

template <typename T>
ValidationResult validate(const WaveformModel<T>& model, const std::vector<UtterancePair>& pairs,
                          int batch_size, int chunk_len) {
  const ModelConfig& cfg = model.config();
  ValidationResult res;
  if (pairs.empty()) return res;
  double loss_sum = 0.0;
  std::int64_t correct = 0;
  std::vector<std::uint8_t> tg, mk;
  nn::Mat<T> logits;
  for (const auto& idx : batch_indices(pairs.size(), static_cast<std::size_t>(batch_size), 0, false)) {
    const PaddedBatch pb = make_padded_batch(pairs, idx, cfg);
    const SequenceBatch sb = to_sequence_batch(pb, cfg);
    auto state = model.zero_state(pb.batch);
    for (const auto& c : tbptt_chunks(sb.model_len, chunk_len, cfg)) {
      model.forward(sb, c.begin, c.end, state, logits, false);
      pb.time_major(c.begin, c.end, tg, mk);
      const auto ce = nn::softmax_ce<T>(logits, tg, mk, false);
      loss_sum += ce.loss_sum;
      res.count += ce.count;
      correct += count_correct(logits, tg, mk);
    }
  }
  if (res.count > 0) {
    res.ce = loss_sum / static_cast<double>(res.count);
    res.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(res.count);
  }
  return res;
}

Trainer::Trainer(const RunConfig& cfg)
    : cfg_(cfg), model_(make_model<float>(cfg.model, cfg.train.seed)) {
  cfg_.validate();
  adam_ = nn::AdamState<float>::init(model_->parameters(), hyper_from(cfg_.train));
  grads_ = model_->parameters().zeros_like();
}

Trainer::Trainer(const Checkpoint& ckpt) : cfg_(ckpt.config), model_(ckpt.make_model<float>()) {
  if (ckpt.adam) {
    adam_ = *ckpt.adam;
    adam_.hyper.lr = cfg_.train.lr;
  } else {
    adam_ = nn::AdamState<float>::init(model_->parameters(), hyper_from(cfg_.train));
  }
  grads_ = model_->parameters().zeros_like();
}

std::pair<double, std::int64_t> Trainer::train_batch(const PaddedBatch& pb, const std::string& tag) {
  const ModelConfig& mc = cfg_.model;
  const SequenceBatch sb = to_sequence_batch(pb, mc);
  auto state = model_->zero_state(pb.batch);
  double loss_sum = 0.0;
  std::int64_t count = 0;
  std::vector<std::uint8_t> tg, mk;
  nn::Mat<float> logits;
  int chunk_no = 0;
  for (const auto& c : tbptt_chunks(sb.model_len, cfg_.train.chunk_len, mc)) {
    const std::string where = tag + ", chunk " + std::to_string(chunk_no++) + " [" +
                              std::to_string(c.begin) + ", " + std::to_string(c.end) + ")";
    auto cache = model_->forward(sb, c.begin, c.end, state, logits, true);
    pb.time_major(c.begin, c.end, tg, mk);
    auto ce = nn::softmax_ce<float>(logits, tg, mk);
    if (ce.all_masked) continue;
    if (!std::isfinite(ce.loss)) throw NumericError("non-finite loss at " + where);
    loss_sum += ce.loss_sum;
    count += ce.count;
    grads_.zero();
    model_->backward(*cache, ce.dlogits, grads_);
    const double norm = nn::clip_global_norm(grads_, cfg_.train.clip_norm);
    if (!std::isfinite(norm)) throw NumericError("non-finite gradient at " + where);
    nn::adam_update(adam_, model_->parameters(), grads_);
  }
  return {loss_sum, count};
}

double Trainer::run_epoch(const std::vector<UtterancePair>& pairs, int epoch) {
  BatchStream stream(pairs, static_cast<std::size_t>(cfg_.train.batch_size),
                     epoch_seed(cfg_.train.seed, epoch), cfg_.model, true);
  double loss_sum = 0.0;
  std::int64_t count = 0;
  int b = 0;
  while (auto pb = stream.next()) {
    const auto [l, n] = train_batch(*pb, "epoch " + std::to_string(epoch) + ", batch " +
                                             std::to_string(b++));
    loss_sum += l;
    count += n;
  }
  return count ? loss_sum / static_cast<double>(count) : 0.0;
}

Checkpoint Trainer::checkpoint(int epoch, double best_valid_ce) const {
  Checkpoint ck;
  ck.config = cfg_;
  ck.params = model_->parameters();
  ck.adam = adam_;
  ck.epoch = epoch;
  ck.best_valid_ce = best_valid_ce;
  return ck;
}

TrainResult train(const RunConfig& cfg, const std::vector<UtterancePair>& train_set,
                  const std::vector<UtterancePair>& valid_set,
                  const std::function<void(const EpochStats&)>& on_epoch) {
  if (train_set.empty()) throw DataError("training set is empty");
  if (valid_set.empty()) throw DataError("validation set is empty");
  Trainer trainer(cfg);
  TrainResult result;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int epoch = 1; epoch <= cfg.train.max_epochs; ++epoch) {
    EpochStats s;
    s.epoch = epoch;
    s.train_ce = trainer.run_epoch(train_set, epoch);
    const auto v = validate(trainer.model(), valid_set, cfg.train.batch_size, cfg.train.chunk_len);
    s.valid_ce = v.ce;
    s.valid_accuracy = v.accuracy;
    if (!std::isfinite(v.ce))
      throw NumericError("non-finite validation loss after epoch " + std::to_string(epoch));
    s.improved = v.ce < best;
    if (s.improved) {
      best = v.ce;
      since_best = 0;
      result.best = trainer.checkpoint(epoch, best);
    } else {
      ++since_best;
    }
    result.history.push_back(s);
    if (on_epoch) on_epoch(s);
    if (since_best >= cfg.train.patience) break;
  }
  result.best.best_valid_ce = best;
  return result;
}

template std::int64_t count_correct<float>(const nn::Mat<float>&, std::span<const std::uint8_t>,
                                           std::span<const std::uint8_t>);
template std::int64_t count_correct<double>(const nn::Mat<double>&, std::span<const std::uint8_t>,
                                            std::span<const std::uint8_t>);
template ValidationResult validate<float>(const WaveformModel<float>&,
                                          const std::vector<UtterancePair>&, int, int);
template ValidationResult validate<double>(const WaveformModel<double>&,
                                           const std::vector<UtterancePair>&, int, int);

}  // namespace bwe
