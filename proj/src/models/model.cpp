#include "bwe/models/model.hpp"

#include <algorithm>

#include "bwe/error.hpp"
#include "model_detail.hpp"

namespace bwe {

template <typename T>
std::unique_ptr<WaveformModel<T>> make_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  return cfg.kind == ModelKind::Srnn ? make_srnn<T>(cfg, seed) : make_hrnn<T>(cfg, seed);
}

template <typename T>
nn::Mat<T> forward_all(const WaveformModel<T>& model, const SequenceBatch& batch) {
  auto state = model.zero_state(batch.batch);
  nn::Mat<T> logits;
  model.forward(batch, 0, batch.model_len, state, logits, false);
  return logits;
}

template <typename T>
nn::Mat<T> row_logits(const nn::Mat<T>& time_major, std::int64_t batch, std::int64_t b,
                      std::int64_t length) {
  nn::Mat<T> out(length, time_major.cols());
  for (std::int64_t t = 0; t < length; ++t) out.row(t) = time_major.row(t * batch + b);
  return out;
}

namespace {

template <typename T>
std::uint8_t argmax_impl(std::span<const T> logits) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < logits.size(); ++k)
    if (logits[k] > logits[best]) best = k;
  return static_cast<std::uint8_t>(best);
}

}  // namespace

std::uint8_t argmax_level(std::span<const float> logits) { return argmax_impl(logits); }
std::uint8_t argmax_level(std::span<const double> logits) { return argmax_impl(logits); }

template <typename T>
QuantizedWaveform generate(const WaveformModel<T>& model, const QuantizedWaveform& x,
                           const ConditionTrack* conditions, std::int64_t chunk) {
  const ModelConfig& cfg = model.config();
  if (cfg.conditional() && !conditions)
    throw DataError("conditional model needs condition features to generate");
  const SequenceBatch sb = make_sequence_batch(x, cfg, cfg.conditional() ? conditions : nullptr);
  const std::int64_t step = cfg.step_samples();
  chunk = std::max<std::int64_t>(step, chunk / step * step);
  auto state = model.zero_state(1);
  std::vector<std::uint8_t> out(x.size());
  const auto valid = static_cast<std::int64_t>(x.size());
  nn::Mat<T> logits;
  for (std::int64_t begin = 0; begin < sb.model_len; begin += chunk) {
    const std::int64_t end = std::min(sb.model_len, begin + chunk);
    model.forward(sb, begin, end, state, logits, false);
    for (std::int64_t t = begin; t < std::min(end, valid); ++t) {
      const auto row = logits.row(t - begin);
      out[static_cast<std::size_t>(t)] =
          argmax_level(std::span<const T>(row.data(), static_cast<std::size_t>(row.size())));
    }
  }
  return QuantizedWaveform(std::move(out), x.sample_rate());
}

#define BWE_INSTANTIATE_MODEL(T)                                                            \
  template std::unique_ptr<WaveformModel<T>> make_model<T>(const ModelConfig&,              \
                                                           std::uint64_t);                  \
  template nn::Mat<T> forward_all<T>(const WaveformModel<T>&, const SequenceBatch&);        \
  template nn::Mat<T> row_logits<T>(const nn::Mat<T>&, std::int64_t, std::int64_t,          \
                                    std::int64_t);                                          \
  template QuantizedWaveform generate<T>(const WaveformModel<T>&, const QuantizedWaveform&, \
                                         const ConditionTrack*, std::int64_t);

BWE_INSTANTIATE_MODEL(float)
BWE_INSTANTIATE_MODEL(double)

}  // namespace bwe
