#include <algorithm>
#include <limits>
#include <string>

#include "bwe/dsp/mulaw.hpp"
#include "bwe/error.hpp"
#include "bwe/models/model.hpp"
#include "bwe/nn/optim.hpp"
#include "model_detail.hpp"

namespace bwe {

using nn::Mat;
using nn::ParameterSet;
using nn::Tensor;

namespace detail {

std::size_t add_weight(ParameterSet<double>& ps, const std::string& name, std::int64_t out,
                       std::int64_t in, nn::Rng& rng) {
  Tensor<double> w({out, in});
  nn::init_uniform(w, 1.0 / std::sqrt(static_cast<double>(in)), rng);
  return ps.add(name, std::move(w));
}

AffineHandles add_affine(ParameterSet<double>& ps, const std::string& name, std::int64_t out,
                         std::int64_t in, nn::Rng& rng) {
  AffineHandles h;
  h.weight = add_weight(ps, name + ".weight", out, in, rng);
  h.bias = ps.add(name + ".bias", Tensor<double>({out}));
  return h;
}

LstmHandles add_lstm(ParameterSet<double>& ps, const std::string& name, std::int64_t in,
                     std::int64_t hidden, double forget_bias, nn::Rng& rng) {
  LstmHandles h;
  h.input_weights = add_weight(ps, name + ".input_weights", 4 * hidden, in, rng);
  h.recurrent_weights = add_weight(ps, name + ".recurrent_weights", 4 * hidden, hidden, rng);
  Tensor<double> b({4 * hidden});
  for (std::int64_t j = 0; j < hidden; ++j) b[static_cast<std::size_t>(hidden + j)] = forget_bias;
  h.biases = ps.add(name + ".biases", std::move(b));
  return h;
}

std::size_t add_embedding(ParameterSet<double>& ps, std::int64_t dim, nn::Rng& rng) {
  return add_weight(ps, "embedding.table", nn::kVocab, dim, rng);
}

template <typename T>
void relu_inplace(Mat<T>& m) {
  m = m.cwiseMax(T(0));
}

template <typename T>
void ff_forward(const ParameterSet<T>& p, const std::vector<AffineHandles>& layers,
                Mat<T> input, std::vector<Mat<T>>* inputs_out, Mat<T>& logits) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Mat<T> out;
    nn::affine_forward(p[layers[l].weight], p[layers[l].bias], input, out);
    if (l + 1 < layers.size()) relu_inplace(out);
    if (inputs_out) inputs_out->push_back(std::move(input));
    if (l + 1 < layers.size())
      input = std::move(out);
    else
      logits = std::move(out);
  }
}

template <typename T>
Mat<T> ff_backward(const ParameterSet<T>& p, const std::vector<AffineHandles>& layers,
                   const std::vector<Mat<T>>& inputs, const Mat<T>& dlogits,
                   ParameterSet<T>& g) {
  Mat<T> dy = dlogits;
  for (std::size_t l = layers.size(); l-- > 0;) {
    Mat<T> dx;
    nn::affine_backward(p[layers[l].weight], inputs[l], dy, g[layers[l].weight],
                        &g[layers[l].bias], &dx);
    // inputs[l] for l > 0 is a ReLU output; its derivative is the step.
    if (l > 0) dx = (inputs[l].array() > T(0)).select(dx, T(0));
    dy = std::move(dx);
  }
  return dy;
}

template void relu_inplace<float>(Mat<float>&);
template void relu_inplace<double>(Mat<double>&);
template void ff_forward<float>(const ParameterSet<float>&, const std::vector<AffineHandles>&,
                                Mat<float>, std::vector<Mat<float>>*, Mat<float>&);
template void ff_forward<double>(const ParameterSet<double>&,
                                 const std::vector<AffineHandles>&, Mat<double>,
                                 std::vector<Mat<double>>*, Mat<double>&);
template Mat<float> ff_backward<float>(const ParameterSet<float>&,
                                       const std::vector<AffineHandles>&,
                                       const std::vector<Mat<float>>&, const Mat<float>&,
                                       ParameterSet<float>&);
template Mat<double> ff_backward<double>(const ParameterSet<double>&,
                                         const std::vector<AffineHandles>&,
                                         const std::vector<Mat<double>>&, const Mat<double>&,
                                         ParameterSet<double>&);

}  // namespace detail

namespace {

using detail::AffineHandles;
using detail::LstmHandles;

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct FrameTierLayout {
  std::size_t proj = kNone;  // W^(k); absent for the top tier
  std::vector<LstmHandles> lstm;
  std::size_t fanout = kNone;  // stacked W_j^(k), [r * D x H]
  std::size_t state_offset = 0;
};

struct HrnnLayout {
  std::size_t embedding = kNone;
  std::size_t sample_proj = kNone;  // W^(1)
  std::vector<AffineHandles> ff;
  std::vector<FrameTierLayout> frame;  // frame tiers, bottom-up
  std::size_t state_layers = 0;

  // Layout of tier k (0-based, k >= 1).
  const FrameTierLayout& tier(std::size_t k) const { return frame[k - 1]; }
};

HrnnLayout build_hrnn(const ModelConfig& cfg, ParameterSet<double>& ps, nn::Rng& rng) {
  HrnnLayout lay;
  const auto& tiers = cfg.tiers;
  const std::size_t n = tiers.size();
  const TierSpec& sample = tiers[0];
  lay.embedding = detail::add_embedding(ps, cfg.embed_dim, rng);
  lay.sample_proj = detail::add_weight(ps, "tier1.proj.weight", sample.hidden,
                                       static_cast<std::int64_t>(sample.concat) * cfg.embed_dim,
                                       rng);
  for (int l = 0; l < sample.layers; ++l) {
    const bool last = l + 1 == sample.layers;
    lay.ff.push_back(detail::add_affine(ps, "tier1.ff" + std::to_string(l),
                                        last ? nn::kVocab : sample.hidden, sample.hidden, rng));
  }
  for (std::size_t k = 1; k < n; ++k) {
    const TierSpec& t = tiers[k];
    const std::string prefix = "tier" + std::to_string(k + 1);
    FrameTierLayout fl;
    const std::int64_t frame_width = static_cast<std::int64_t>(t.concat) * t.frame_size;
    std::int64_t lstm_in = t.hidden;
    if (t.kind == TierKind::Intermediate)
      fl.proj = detail::add_weight(ps, prefix + ".proj.weight", t.hidden, frame_width, rng);
    else if (t.kind == TierKind::Top)
      lstm_in = frame_width;
    else
      lstm_in = cfg.condition_dim;
    for (int l = 0; l < t.layers; ++l) {
      fl.lstm.push_back(detail::add_lstm(ps, prefix + ".lstm" + std::to_string(l),
                                         l == 0 ? lstm_in : t.hidden, t.hidden,
                                         cfg.forget_bias, rng));
    }
    const int ratio = t.frame_size / tiers[k - 1].frame_size;
    fl.fanout = detail::add_weight(ps, prefix + ".fanout.weight",
                                   static_cast<std::int64_t>(ratio) * tiers[k - 1].hidden,
                                   t.hidden, rng);
    fl.state_offset = lay.state_layers;
    lay.state_layers += fl.lstm.size();
    lay.frame.push_back(std::move(fl));
  }
  return lay;
}

template <typename T>
struct TierCache {
  Mat<T> frames;                  // f^(k) or condition vectors
  std::vector<Mat<T>> layer_in;   // input of each LSTM layer
  std::vector<nn::LstmCache<T>> lstm;
  Mat<T> h;                       // output of the last LSTM layer
};

template <typename T>
struct HrnnCache final : ForwardCache {
  std::int64_t batch = 0;
  std::int64_t begin = 0;
  std::int64_t end = 0;
  std::vector<std::uint8_t> sample_levels;  // [n_rows x concat] level per block
  Mat<T> sample_frames;                     // f^(1)
  std::vector<Mat<T>> ff_inputs;            // ff_inputs[0] = i^(1)
  std::vector<TierCache<T>> tiers;          // index k, k >= 1
};

template <typename T>
class Hrnn final : public WaveformModel<T> {
 public:
  Hrnn(ModelConfig cfg, ParameterSet<T> params, HrnnLayout layout)
      : cfg_(std::move(cfg)), params_(std::move(params)), layout_(std::move(layout)) {}

  const ModelConfig& config() const override { return cfg_; }
  ParameterSet<T>& parameters() override { return params_; }
  const ParameterSet<T>& parameters() const override { return params_; }

  ModelState<T> zero_state(std::int64_t batch) const override {
    ModelState<T> s;
    for (std::size_t k = 1; k < cfg_.tiers.size(); ++k)
      for (int l = 0; l < cfg_.tiers[k].layers; ++l)
        s.layers.push_back(nn::LstmState<T>::zeros(batch, cfg_.tiers[k].hidden));
    return s;
  }

  std::unique_ptr<ForwardCache> forward(const SequenceBatch& sb, std::int64_t begin,
                                        std::int64_t end, ModelState<T>& state,
                                        Mat<T>& logits, bool keep_cache) const override {
    const std::int64_t step = cfg_.step_samples();
    if (begin < 0 || end > sb.model_len || begin >= end || begin % step || end % step)
      throw ShapeError("HRNN forward range [" + std::to_string(begin) + ", " +
                       std::to_string(end) + ") not aligned to " + std::to_string(step) +
                       " within model length " + std::to_string(sb.model_len));
    if (state.layers.size() != layout_.state_layers)
      throw ShapeError("HRNN state has wrong layer count");
    const std::int64_t batch = sb.batch;
    const std::int64_t span = end - begin;
    const std::size_t n_tiers = cfg_.tiers.size();

    auto cache = std::make_unique<HrnnCache<T>>();
    cache->batch = batch;
    cache->begin = begin;
    cache->end = end;
    cache->tiers.resize(n_tiers);

    Mat<T> cond;  // conditioning vectors d^(k+1) for the tier being processed
    for (std::size_t k = n_tiers - 1; k >= 1; --k) {
      const TierSpec& tier = cfg_.tiers[k];
      const FrameTierLayout& fl = layout_.tier(k);
      TierCache<T>& tc = cache->tiers[k];
      const std::int64_t steps = span / tier.frame_size;
      const std::int64_t first = begin / tier.frame_size;

      if (tier.kind == TierKind::Conditional)
        gather_conditions(sb, first, steps, tc.frames);
      else
        gather_frame_inputs<T>(sb, tier, first, steps, tc.frames);

      Mat<T> input;
      if (tier.kind == TierKind::Intermediate) {
        nn::affine_forward(params_[fl.proj], Tensor<T>(), tc.frames, input);
        input += cond;
      } else {
        input = tc.frames;
      }
      for (std::size_t l = 0; l < fl.lstm.size(); ++l) {
        const auto& lh = fl.lstm[l];
        Mat<T> out;
        nn::LstmCache<T> lc;
        nn::lstm_forward(params_[lh.input_weights], params_[lh.recurrent_weights],
                         params_[lh.biases], input, batch, state.layers[fl.state_offset + l],
                         out, keep_cache ? &lc : nullptr);
        if (keep_cache) {
          tc.layer_in.push_back(std::move(input));
          tc.lstm.push_back(std::move(lc));
        }
        input = std::move(out);
      }
      const int ratio = tier.frame_size / cfg_.tiers[k - 1].frame_size;
      conditioning_fanout(input, params_[fl.fanout], ratio, batch, cond);
      if (keep_cache)
        tc.h = std::move(input);
      else
        tc = TierCache<T>{};
    }

    // Sample tier: f^(1) = concat of c^(1) embeddings, i^(1) = W^(1) f + d^(2).
    const TierSpec& sample = cfg_.tiers[0];
    const std::int64_t need = end + sample.concat - 1;
    if (need > sb.total_len)
      throw ShapeError("sample tier needs " + std::to_string(need) +
                       " input samples, sequence has " + std::to_string(sb.total_len) +
                       " (insufficient lookahead padding)");
    const Tensor<T>& table = params_[layout_.embedding];
    const std::int64_t e = cfg_.embed_dim;
    const auto tab = table.matrix();
    Mat<T> frames(span * batch, sample.concat * e);
    std::vector<std::uint8_t> lv(static_cast<std::size_t>(span * batch * sample.concat));
    for (std::int64_t t = 0; t < span; ++t)
      for (std::int64_t b = 0; b < batch; ++b)
        for (int j = 0; j < sample.concat; ++j) {
          const std::uint8_t q = sb.level(b, begin + t + j);
          lv[static_cast<std::size_t>((t * batch + b) * sample.concat + j)] = q;
          frames.row(t * batch + b).segment(j * e, e) = tab.row(q);
        }
    Mat<T> i1;
    nn::affine_forward(params_[layout_.sample_proj], Tensor<T>(), frames, i1);
    i1 += cond;
    detail::ff_forward(params_, layout_.ff, std::move(i1),
                       keep_cache ? &cache->ff_inputs : nullptr, logits);
    if (!keep_cache) return nullptr;
    cache->sample_levels = std::move(lv);
    cache->sample_frames = std::move(frames);
    return cache;
  }

  void backward(const ForwardCache& base, const Mat<T>& dlogits,
                ParameterSet<T>& g) const override {
    const auto* cache = dynamic_cast<const HrnnCache<T>*>(&base);
    if (!cache) throw ShapeError("HRNN backward got a foreign cache");
    const std::int64_t batch = cache->batch;
    const TierSpec& sample = cfg_.tiers[0];
    const std::int64_t e = cfg_.embed_dim;

    Mat<T> di = detail::ff_backward(params_, layout_.ff, cache->ff_inputs, dlogits, g);
    Mat<T> dframes;
    nn::affine_backward<T>(params_[layout_.sample_proj], cache->sample_frames, di,
                        g[layout_.sample_proj], nullptr, &dframes);
    auto dtab = g[layout_.embedding].matrix();
    for (std::int64_t r = 0; r < dframes.rows(); ++r)
      for (int j = 0; j < sample.concat; ++j)
        dtab.row(cache->sample_levels[static_cast<std::size_t>(r * sample.concat + j)]) +=
            dframes.row(r).segment(j * e, e);

    Mat<T> dcond = std::move(di);  // gradient w.r.t. d^(k) for the tier below
    for (std::size_t k = 1; k < cfg_.tiers.size(); ++k) {
      const TierSpec& tier = cfg_.tiers[k];
      const FrameTierLayout& fl = layout_.tier(k);
      const TierCache<T>& tc = cache->tiers[k];
      const int ratio = tier.frame_size / cfg_.tiers[k - 1].frame_size;
      Mat<T> dh;
      conditioning_fanout_backward(tc.h, params_[fl.fanout], ratio, batch, dcond,
                                   g[fl.fanout], dh);
      const bool needs_input_grad = tier.kind == TierKind::Intermediate;
      for (std::size_t l = fl.lstm.size(); l-- > 0;) {
        const auto& lh = fl.lstm[l];
        Mat<T> dx;
        const bool want_dx = l > 0 || needs_input_grad;
        nn::lstm_backward(params_[lh.input_weights], params_[lh.recurrent_weights],
                          tc.lstm[l], tc.layer_in[l], dh, g[lh.input_weights],
                          g[lh.recurrent_weights], g[lh.biases], want_dx ? &dx : nullptr);
        dh = std::move(dx);
      }
      if (!needs_input_grad) break;
      nn::affine_backward<T>(params_[fl.proj], tc.frames, dh, g[fl.proj], nullptr, nullptr);
      dcond = std::move(dh);
    }
  }

 private:
  void gather_conditions(const SequenceBatch& sb, std::int64_t first, std::int64_t steps,
                         Mat<T>& out) const {
    if (sb.conditions.size() != static_cast<std::size_t>(sb.batch))
      throw DataError("conditional HRNN called without condition features");
    out.resize(steps * sb.batch, cfg_.condition_dim);
    for (std::int64_t b = 0; b < sb.batch; ++b) {
      const ConditionTrack& c = sb.conditions[static_cast<std::size_t>(b)];
      if (static_cast<int>(c.dim) != cfg_.condition_dim)
        throw DataError("condition dimension mismatch");
      if (static_cast<std::int64_t>(c.n_frames()) < first + steps)
        throw DataError("condition track has " + std::to_string(c.n_frames()) +
                        " frames, model needs " + std::to_string(first + steps));
      for (std::int64_t t = 0; t < steps; ++t) {
        const auto f = c.frame(static_cast<std::size_t>(first + t));
        for (std::int64_t d = 0; d < cfg_.condition_dim; ++d)
          out(t * sb.batch + b, d) = static_cast<T>(f[static_cast<std::size_t>(d)]);
      }
    }
  }

  ModelConfig cfg_;
  ParameterSet<T> params_;
  HrnnLayout layout_;
};

}  // namespace

template <typename T>
std::unique_ptr<WaveformModel<T>> make_hrnn(const ModelConfig& cfg, std::uint64_t seed) {
  nn::Rng rng(seed);
  ParameterSet<double> ps;
  HrnnLayout layout = build_hrnn(cfg, ps, rng);
  return std::make_unique<Hrnn<T>>(cfg, ps.template cast<T>(), std::move(layout));
}

template std::unique_ptr<WaveformModel<float>> make_hrnn<float>(const ModelConfig&,
                                                                std::uint64_t);
template std::unique_ptr<WaveformModel<double>> make_hrnn<double>(const ModelConfig&,
                                                                  std::uint64_t);

}  // namespace bwe
