#include "bwe/models/tiers.hpp"

#include <algorithm>
#include <string>

#include "bwe/dsp/mulaw.hpp"
#include "bwe/error.hpp"

namespace bwe {

namespace {

std::int64_t round_up(std::int64_t n, std::int64_t m) { return (n + m - 1) / m * m; }

}  // namespace

PaddedInput pad_for_model(std::span<const std::uint8_t> x, const ModelConfig& cfg) {
  if (x.empty()) throw DataError("pad_for_model: empty input");
  PaddedInput out;
  out.valid_len = static_cast<std::int64_t>(x.size());
  out.model_len = round_up(out.valid_len, cfg.step_samples());
  const std::int64_t total = out.model_len + cfg.lookahead_samples();
  out.levels.assign(static_cast<std::size_t>(total), kZeroLevel);
  std::copy(x.begin(), x.end(), out.levels.begin());
  out.mask.assign(static_cast<std::size_t>(total), 0);
  std::fill_n(out.mask.begin(), x.size(), 1);
  return out;
}

PaddedInput pad_for_model(const QuantizedWaveform& x, const ModelConfig& cfg) {
  return pad_for_model(x.levels(), cfg);
}

SequenceBatch make_sequence_batch(const std::vector<std::span<const std::uint8_t>>& rows,
                                  const ModelConfig& cfg,
                                  std::vector<ConditionTrack> conditions,
                                  std::int64_t min_model_len) {
  if (rows.empty()) throw DataError("empty batch");
  SequenceBatch sb;
  sb.batch = static_cast<std::int64_t>(rows.size());
  std::int64_t longest = 0;
  for (const auto& r : rows) {
    if (r.empty()) throw DataError("empty sequence in batch");
    longest = std::max<std::int64_t>(longest, static_cast<std::int64_t>(r.size()));
  }
  sb.model_len = round_up(std::max(longest, min_model_len), cfg.step_samples());
  sb.total_len = sb.model_len + cfg.lookahead_samples();
  sb.levels.assign(static_cast<std::size_t>(sb.batch * sb.total_len), kZeroLevel);
  for (std::int64_t b = 0; b < sb.batch; ++b) {
    std::copy(rows[b].begin(), rows[b].end(), sb.levels.begin() + b * sb.total_len);
    sb.valid_len.push_back(static_cast<std::int64_t>(rows[b].size()));
  }
  if (cfg.conditional()) {
    if (conditions.size() != rows.size())
      throw DataError("conditional model needs one condition track per sequence, got " +
                      std::to_string(conditions.size()));
    const auto shift = static_cast<std::uint32_t>(cfg.top().frame_size);
    const auto needed = static_cast<std::size_t>(sb.model_len / cfg.top().frame_size);
    for (auto& c : conditions) {
      if (c.frame_shift_samples != shift)
        throw DataError("condition frame shift " + std::to_string(c.frame_shift_samples) +
                        " does not match conditional tier frame size " +
                        std::to_string(shift));
      if (static_cast<int>(c.dim) != cfg.condition_dim)
        throw DataError("condition dimension " + std::to_string(c.dim) +
                        " does not match model (" + std::to_string(cfg.condition_dim) + ")");
      if (c.n_frames() == 0) throw DataError("empty condition track");
      c = c.extended_to(needed);
    }
    sb.conditions = std::move(conditions);
  }
  return sb;
}

SequenceBatch make_sequence_batch(const QuantizedWaveform& x, const ModelConfig& cfg,
                                  const ConditionTrack* conditions) {
  std::vector<ConditionTrack> conds;
  if (conditions) conds.push_back(*conditions);
  return make_sequence_batch({x.levels()}, cfg, std::move(conds));
}

template <typename T>
void gather_frame_inputs(const SequenceBatch& batch, const TierSpec& tier,
                         std::int64_t first_step, std::int64_t n_steps, nn::Mat<T>& out) {
  const std::int64_t width = static_cast<std::int64_t>(tier.concat) * tier.frame_size;
  const std::int64_t last = (first_step + n_steps - 1) * tier.frame_size + width;
  if (n_steps > 0 && last > batch.total_len)
    throw ShapeError("frame tier with L=" + std::to_string(tier.frame_size) +
                     ", c=" + std::to_string(tier.concat) + " needs " +
                     std::to_string(last) + " samples, sequence has " +
                     std::to_string(batch.total_len) + " (insufficient lookahead padding)");
  const auto& table = mulaw_table();
  out.resize(n_steps * batch.batch, width);
  for (std::int64_t t = 0; t < n_steps; ++t) {
    const std::int64_t start = (first_step + t) * tier.frame_size;
    for (std::int64_t b = 0; b < batch.batch; ++b) {
      T* dst = out.row(t * batch.batch + b).data();
      const std::uint8_t* src = batch.levels.data() + b * batch.total_len + start;
      for (std::int64_t i = 0; i < width; ++i) dst[i] = static_cast<T>(table[src[i]]);
    }
  }
}

template <typename T>
nn::Mat<T> frame_tier_inputs(const PaddedInput& x, const TierSpec& tier) {
  SequenceBatch sb;
  sb.batch = 1;
  sb.total_len = static_cast<std::int64_t>(x.levels.size());
  sb.model_len = x.model_len;
  sb.levels = x.levels;
  sb.valid_len = {x.valid_len};
  nn::Mat<T> out;
  gather_frame_inputs<T>(sb, tier, 0, x.model_len / tier.frame_size, out);
  return out;
}

template <typename T>
nn::Mat<T> concat_sample_embeddings(const nn::Mat<T>& embeddings, int concat,
                                    std::int64_t n_steps) {
  if (n_steps + concat - 1 > embeddings.rows())
    throw ShapeError("sample tier needs " + std::to_string(n_steps + concat - 1) +
                     " embeddings, got " + std::to_string(embeddings.rows()) +
                     " (insufficient lookahead padding)");
  const std::int64_t e = embeddings.cols();
  nn::Mat<T> out(n_steps, concat * e);
  for (std::int64_t t = 0; t < n_steps; ++t)
    for (int j = 0; j < concat; ++j) out.row(t).segment(j * e, e) = embeddings.row(t + j);
  return out;
}

template <typename T>
void conditioning_fanout(const nn::Mat<T>& h, const nn::Tensor<T>& weight, int ratio,
                         std::int64_t batch, nn::Mat<T>& out) {
  if (ratio <= 0 || weight.rows() % ratio != 0)
    throw ShapeError("fan-out weight rows " + std::to_string(weight.rows()) +
                     " not divisible by ratio " + std::to_string(ratio));
  if (batch <= 0 || h.rows() % batch != 0)
    throw ShapeError("fan-out input rows not a multiple of batch");
  const std::int64_t d = weight.rows() / ratio;
  const std::int64_t steps = h.rows() / batch;
  nn::Mat<T> g;
  g.noalias() = h * weight.matrix().transpose();  // [steps*B x r*D]
  out.resize(steps * ratio * batch, d);
  for (std::int64_t t = 0; t < steps; ++t)
    for (std::int64_t b = 0; b < batch; ++b)
      for (int j = 0; j < ratio; ++j)
        out.row((t * ratio + j) * batch + b) = g.row(t * batch + b).segment(j * d, d);
}

template <typename T>
void conditioning_fanout_backward(const nn::Mat<T>& h, const nn::Tensor<T>& weight,
                                  int ratio, std::int64_t batch, const nn::Mat<T>& dout,
                                  nn::Tensor<T>& dweight, nn::Mat<T>& dh) {
  const std::int64_t d = weight.rows() / ratio;
  const std::int64_t steps = h.rows() / batch;
  if (dout.rows() != steps * ratio * batch || dout.cols() != d)
    throw ShapeError("fan-out backward: gradient shape mismatch");
  nn::Mat<T> dg(steps * batch, ratio * d);
  for (std::int64_t t = 0; t < steps; ++t)
    for (std::int64_t b = 0; b < batch; ++b)
      for (int j = 0; j < ratio; ++j)
        dg.row(t * batch + b).segment(j * d, d) = dout.row((t * ratio + j) * batch + b);
  dweight.matrix().noalias() += dg.transpose() * h;
  dh.noalias() = dg * weight.matrix();
}

#define BWE_INSTANTIATE_TIERS(T)                                                            \
  template void gather_frame_inputs<T>(const SequenceBatch&, const TierSpec&, std::int64_t, \
                                       std::int64_t, nn::Mat<T>&);                          \
  template nn::Mat<T> frame_tier_inputs<T>(const PaddedInput&, const TierSpec&);            \
  template nn::Mat<T> concat_sample_embeddings<T>(const nn::Mat<T>&, int, std::int64_t);    \
  template void conditioning_fanout<T>(const nn::Mat<T>&, const nn::Tensor<T>&, int,        \
                                       std::int64_t, nn::Mat<T>&);                          \
  template void conditioning_fanout_backward<T>(const nn::Mat<T>&, const nn::Tensor<T>&,    \
                                                int, std::int64_t, const nn::Mat<T>&,       \
                                                nn::Tensor<T>&, nn::Mat<T>&);

BWE_INSTANTIATE_TIERS(float)
BWE_INSTANTIATE_TIERS(double)

}  // namespace bwe
