#include <string>

#include "bwe/error.hpp"
#include "bwe/models/model.hpp"
#include "model_detail.hpp"

namespace bwe {

using nn::Mat;
using nn::ParameterSet;
using nn::Tensor;

namespace {

struct SrnnLayout {
  std::size_t embedding = 0;
  std::vector<detail::LstmHandles> lstm;
  std::vector<detail::AffineHandles> ff;
};

template <typename T>
struct SrnnCache final : ForwardCache {
  std::int64_t batch = 0;
  std::vector<std::uint8_t> levels;  // time-major
  std::vector<Mat<T>> layer_in;
  std::vector<nn::LstmCache<T>> lstm;
  std::vector<Mat<T>> ff_inputs;
};

// Embedding -> stacked LSTM -> FF layers; strictly causal in the input.
template <typename T>
class Srnn final : public WaveformModel<T> {
 public:
  Srnn(ModelConfig cfg, ParameterSet<T> params, SrnnLayout layout)
      : cfg_(std::move(cfg)), params_(std::move(params)), layout_(std::move(layout)) {}

  const ModelConfig& config() const override { return cfg_; }
  ParameterSet<T>& parameters() override { return params_; }
  const ParameterSet<T>& parameters() const override { return params_; }

  ModelState<T> zero_state(std::int64_t batch) const override {
    ModelState<T> s;
    for (std::size_t l = 0; l < layout_.lstm.size(); ++l)
      s.layers.push_back(nn::LstmState<T>::zeros(batch, cfg_.hidden));
    return s;
  }

  std::unique_ptr<ForwardCache> forward(const SequenceBatch& sb, std::int64_t begin,
                                        std::int64_t end, ModelState<T>& state,
                                        Mat<T>& logits, bool keep_cache) const override {
    if (begin < 0 || end > sb.model_len || begin >= end)
      throw ShapeError("SRNN forward range [" + std::to_string(begin) + ", " +
                       std::to_string(end) + ") outside model length " +
                       std::to_string(sb.model_len));
    if (state.layers.size() != layout_.lstm.size())
      throw ShapeError("SRNN state has wrong layer count");
    const std::int64_t batch = sb.batch;
    auto cache = std::make_unique<SrnnCache<T>>();
    cache->batch = batch;
    std::vector<std::uint8_t> lv(static_cast<std::size_t>((end - begin) * batch));
    for (std::int64_t t = begin; t < end; ++t)
      for (std::int64_t b = 0; b < batch; ++b)
        lv[static_cast<std::size_t>((t - begin) * batch + b)] = sb.level(b, t);
    Mat<T> input;
    nn::embed_forward(params_[layout_.embedding], lv, input);
    for (std::size_t l = 0; l < layout_.lstm.size(); ++l) {
      const auto& lh = layout_.lstm[l];
      Mat<T> out;
      nn::LstmCache<T> lc;
      nn::lstm_forward(params_[lh.input_weights], params_[lh.recurrent_weights],
                       params_[lh.biases], input, batch, state.layers[l], out,
                       keep_cache ? &lc : nullptr);
      if (keep_cache) {
        cache->layer_in.push_back(std::move(input));
        cache->lstm.push_back(std::move(lc));
      }
      input = std::move(out);
    }
    detail::ff_forward(params_, layout_.ff, std::move(input),
                       keep_cache ? &cache->ff_inputs : nullptr, logits);
    if (!keep_cache) return nullptr;
    cache->levels = std::move(lv);
    return cache;
  }

  void backward(const ForwardCache& base, const Mat<T>& dlogits,
                ParameterSet<T>& g) const override {
    const auto* cache = dynamic_cast<const SrnnCache<T>*>(&base);
    if (!cache) throw ShapeError("SRNN backward got a foreign cache");
    Mat<T> dh = detail::ff_backward(params_, layout_.ff, cache->ff_inputs, dlogits, g);
    for (std::size_t l = layout_.lstm.size(); l-- > 0;) {
      const auto& lh = layout_.lstm[l];
      Mat<T> dx;
      nn::lstm_backward(params_[lh.input_weights], params_[lh.recurrent_weights],
                        cache->lstm[l], cache->layer_in[l], dh, g[lh.input_weights],
                        g[lh.recurrent_weights], g[lh.biases], &dx);
      dh = std::move(dx);
    }
    nn::embed_backward(cache->levels, dh, g[layout_.embedding]);
  }

 private:
  ModelConfig cfg_;
  ParameterSet<T> params_;
  SrnnLayout layout_;
};

}  // namespace

template <typename T>
std::unique_ptr<WaveformModel<T>> make_srnn(const ModelConfig& cfg, std::uint64_t seed) {
  nn::Rng rng(seed);
  ParameterSet<double> ps;
  SrnnLayout lay;
  lay.embedding = detail::add_embedding(ps, cfg.embed_dim, rng);
  for (int l = 0; l < cfg.srnn_lstm_layers; ++l)
    lay.lstm.push_back(detail::add_lstm(ps, "lstm" + std::to_string(l),
                                        l == 0 ? cfg.embed_dim : cfg.hidden, cfg.hidden,
                                        cfg.forget_bias, rng));
  for (int l = 0; l < cfg.srnn_ff_layers; ++l) {
    const bool last = l + 1 == cfg.srnn_ff_layers;
    lay.ff.push_back(detail::add_affine(ps, "ff" + std::to_string(l),
                                        last ? nn::kVocab : cfg.hidden, cfg.hidden, rng));
  }
  return std::make_unique<Srnn<T>>(cfg, ps.template cast<T>(), std::move(lay));
}

template std::unique_ptr<WaveformModel<float>> make_srnn<float>(const ModelConfig&,
                                                                std::uint64_t);
template std::unique_ptr<WaveformModel<double>> make_srnn<double>(const ModelConfig&,
                                                                  std::uint64_t);

}  // namespace bwe
