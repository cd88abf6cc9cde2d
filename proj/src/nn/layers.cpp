#include "bwe/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bwe::nn {

namespace {

std::string mat_shape(std::int64_t r, std::int64_t c) {
  return "[" + std::to_string(r) + " x " + std::to_string(c) + "]";
}

template <typename T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

}  // namespace

template <typename T>
void affine_forward(const Tensor<T>& weight, const Tensor<T>& bias, const Mat<T>& x,
                    Mat<T>& y) {
  const auto w = weight.matrix();
  if (x.cols() != w.cols())
    throw ShapeError("affine: input " + mat_shape(x.rows(), x.cols()) +
                     " does not match weight " + shape_string(weight.dims()));
  y.noalias() = x * w.transpose();
  if (bias.size() != 0) {
    if (static_cast<std::int64_t>(bias.size()) != w.rows())
      throw ShapeError("affine: bias " + shape_string(bias.dims()) +
                       " does not match weight " + shape_string(weight.dims()));
    y.rowwise() += bias.matrix().row(0);
  }
}

template <typename T>
void affine_backward(const Tensor<T>& weight, const Mat<T>& x, const Mat<T>& dy,
                     Tensor<T>& dweight, Tensor<T>* dbias, Mat<T>* dx) {
  const auto w = weight.matrix();
  if (dy.cols() != w.rows() || x.cols() != w.cols() || dy.rows() != x.rows())
    throw ShapeError("affine backward: dy " + mat_shape(dy.rows(), dy.cols()) +
                     ", x " + mat_shape(x.rows(), x.cols()) + ", weight " +
                     shape_string(weight.dims()));
  dweight.matrix().noalias() += dy.transpose() * x;
  if (dbias && dbias->size() != 0) dbias->matrix().row(0) += dy.colwise().sum();
  if (dx) dx->noalias() = dy * w;
}

template <typename T>
void lstm_forward(const Tensor<T>& input_weights, const Tensor<T>& recurrent_weights,
                  const Tensor<T>& biases, const Mat<T>& x, std::int64_t batch,
                  LstmState<T>& state, Mat<T>& h_out, LstmCache<T>* cache) {
  const auto wh = recurrent_weights.matrix();
  const std::int64_t hidden = wh.cols();
  if (wh.rows() != 4 * hidden)
    throw ShapeError("lstm: recurrent weights " + shape_string(recurrent_weights.dims()) +
                     " are not [4H x H]");
  if (batch <= 0 || x.rows() % batch != 0)
    throw ShapeError("lstm: input rows " + std::to_string(x.rows()) +
                     " not a multiple of batch " + std::to_string(batch));
  if (state.h.rows() != batch || state.h.cols() != hidden)
    throw ShapeError("lstm: state " + mat_shape(state.h.rows(), state.h.cols()) +
                     " does not match " + mat_shape(batch, hidden));
  const std::int64_t steps = x.rows() / batch;

  Mat<T> pre;
  affine_forward(input_weights, biases, x, pre);  // [S*B x 4H]

  h_out.resize(x.rows(), hidden);
  Mat<T> cells(x.rows(), hidden);
  Mat<T> tanh_c(x.rows(), hidden);
  if (cache) {
    cache->batch = batch;
    cache->steps = steps;
    cache->h0 = state.h;
    cache->c0 = state.c;
  }
  Mat<T> a(batch, 4 * hidden);
  for (std::int64_t t = 0; t < steps; ++t) {
    const std::int64_t r0 = t * batch;
    a.noalias() = pre.middleRows(r0, batch);
    a.noalias() += state.h * wh.transpose();
    for (std::int64_t b = 0; b < batch; ++b) {
      T* g = a.row(b).data();
      for (std::int64_t j = 0; j < hidden; ++j) {
        const T ig = sigmoid(g[j]);
        const T fg = sigmoid(g[hidden + j]);
        const T cg = std::tanh(g[2 * hidden + j]);
        const T og = sigmoid(g[3 * hidden + j]);
        g[j] = ig;
        g[hidden + j] = fg;
        g[2 * hidden + j] = cg;
        g[3 * hidden + j] = og;
        const T c = fg * state.c(b, j) + ig * cg;
        const T tc = std::tanh(c);
        state.c(b, j) = c;
        state.h(b, j) = og * tc;
        cells(r0 + b, j) = c;
        tanh_c(r0 + b, j) = tc;
      }
    }
    h_out.middleRows(r0, batch) = state.h;
    if (cache) pre.middleRows(r0, batch) = a;
  }
  if (cache) {
    cache->gates = std::move(pre);
    cache->cells = std::move(cells);
    cache->tanh_c = std::move(tanh_c);
    cache->outputs = h_out;
  }
}

template <typename T>
void lstm_backward(const Tensor<T>& input_weights, const Tensor<T>& recurrent_weights,
                   const LstmCache<T>& cache, const Mat<T>& x, const Mat<T>& dh,
                   Tensor<T>& dinput_weights, Tensor<T>& drecurrent_weights,
                   Tensor<T>& dbiases, Mat<T>* dx, LstmState<T>* dstate0) {
  const auto wh = recurrent_weights.matrix();
  const std::int64_t hidden = wh.cols();
  const std::int64_t batch = cache.batch;
  const std::int64_t steps = cache.steps;
  if (dh.rows() != steps * batch || dh.cols() != hidden)
    throw ShapeError("lstm backward: dh " + mat_shape(dh.rows(), dh.cols()) +
                     " does not match cache " + mat_shape(steps * batch, hidden));

  Mat<T> da(steps * batch, 4 * hidden);
  Mat<T> dh_next = Mat<T>::Zero(batch, hidden);
  Mat<T> dc_next = Mat<T>::Zero(batch, hidden);
  for (std::int64_t t = steps - 1; t >= 0; --t) {
    const std::int64_t r0 = t * batch;
    for (std::int64_t b = 0; b < batch; ++b) {
      const T* g = cache.gates.row(r0 + b).data();
      T* d = da.row(r0 + b).data();
      for (std::int64_t j = 0; j < hidden; ++j) {
        const T ig = g[j], fg = g[hidden + j], cg = g[2 * hidden + j], og = g[3 * hidden + j];
        const T tc = cache.tanh_c(r0 + b, j);
        const T c_prev = t > 0 ? cache.cells(r0 - batch + b, j) : cache.c0(b, j);
        const T dht = dh(r0 + b, j) + dh_next(b, j);
        const T dc = dc_next(b, j) + dht * og * (T(1) - tc * tc);
        d[j] = dc * cg * ig * (T(1) - ig);
        d[hidden + j] = dc * c_prev * fg * (T(1) - fg);
        d[2 * hidden + j] = dc * ig * (T(1) - cg * cg);
        d[3 * hidden + j] = dht * tc * og * (T(1) - og);
        dc_next(b, j) = dc * fg;
      }
    }
    dh_next.noalias() = da.middleRows(r0, batch) * wh;
  }
  if (dstate0) {
    dstate0->h = dh_next;
    dstate0->c = dc_next;
  }
  // Hidden state entering each step: h0 followed by outputs shifted by one.
  Mat<T> h_prev(steps * batch, hidden);
  h_prev.topRows(batch) = cache.h0;
  if (steps > 1)
    h_prev.bottomRows((steps - 1) * batch) = cache.outputs.topRows((steps - 1) * batch);
  drecurrent_weights.matrix().noalias() += da.transpose() * h_prev;
  affine_backward(input_weights, x, da, dinput_weights, &dbiases, dx);
}

template <typename T>
LstmState<T> lstm_step(const LstmParams<T>& p, const LstmState<T>& prev, const Mat<T>& x) {
  LstmState<T> state = prev;
  Mat<T> h;
  lstm_forward<T>(p.input_weights, p.recurrent_weights, p.biases, x, x.rows(), state, h,
               nullptr);
  return state;
}

template <typename T>
void embed_forward(const Tensor<T>& table, std::span<const std::uint8_t> levels,
                   Mat<T>& out) {
  if (table.rank() != 2 || table.dims()[0] != kVocab)
    throw ShapeError("embedding table must be [256 x E], got " +
                     shape_string(table.dims()));
  const auto tab = table.matrix();
  out.resize(static_cast<std::int64_t>(levels.size()), tab.cols());
  for (std::size_t i = 0; i < levels.size(); ++i)
    out.row(static_cast<std::int64_t>(i)) = tab.row(levels[i]);
}

template <typename T>
Mat<T> embed(const Tensor<T>& table, std::span<const int> levels) {
  std::vector<std::uint8_t> checked(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 0 || levels[i] >= kVocab)
      throw ShapeError("embedding level " + std::to_string(levels[i]) +
                       " outside [0, 255]");
    checked[i] = static_cast<std::uint8_t>(levels[i]);
  }
  Mat<T> out;
  embed_forward(table, checked, out);
  return out;
}

template <typename T>
void embed_backward(std::span<const std::uint8_t> levels, const Mat<T>& dy,
                    Tensor<T>& dtable) {
  auto tab = dtable.matrix();
  if (dy.rows() != static_cast<std::int64_t>(levels.size()) || dy.cols() != tab.cols())
    throw ShapeError("embedding backward: dy " + mat_shape(dy.rows(), dy.cols()) +
                     " does not match table " + shape_string(dtable.dims()));
  for (std::size_t i = 0; i < levels.size(); ++i)
    tab.row(levels[i]) += dy.row(static_cast<std::int64_t>(i));
}

template <typename T>
CrossEntropy<T> softmax_ce(const Mat<T>& logits, std::span<const std::uint8_t> targets,
                           std::span<const std::uint8_t> mask, bool want_grad) {
  const std::int64_t n = logits.rows();
  if (logits.cols() != kVocab || static_cast<std::int64_t>(targets.size()) != n ||
      static_cast<std::int64_t>(mask.size()) != n)
    throw ShapeError("softmax_ce: logits " + mat_shape(n, logits.cols()) + ", " +
                     std::to_string(targets.size()) + " targets, " +
                     std::to_string(mask.size()) + " mask entries");
  CrossEntropy<T> out;
  for (auto m : mask) out.count += m ? 1 : 0;
  if (want_grad) out.dlogits = Mat<T>::Zero(n, kVocab);
  if (out.count == 0) {
    out.all_masked = true;
    return out;
  }
  const T inv_count = T(1) / static_cast<T>(out.count);
  for (std::int64_t r = 0; r < n; ++r) {
    if (!mask[r]) continue;
    const auto row = logits.row(r);
    const T mx = row.maxCoeff();
    double z = 0.0;
    for (std::int64_t k = 0; k < kVocab; ++k) z += std::exp(static_cast<double>(row(k) - mx));
    const double log_z = std::log(z) + static_cast<double>(mx);
    out.loss_sum += log_z - static_cast<double>(row(targets[r]));
    if (want_grad) {
      auto d = out.dlogits.row(r);
      for (std::int64_t k = 0; k < kVocab; ++k)
        d(k) = static_cast<T>(std::exp(static_cast<double>(row(k)) - log_z)) * inv_count;
      d(targets[r]) -= inv_count;
    }
  }
  out.loss = out.loss_sum / static_cast<double>(out.count);
  return out;
}

#define BWE_INSTANTIATE_LAYERS(T)                                                       \
  template void affine_forward<T>(const Tensor<T>&, const Tensor<T>&, const Mat<T>&,    \
                                  Mat<T>&);                                             \
  template void affine_backward<T>(const Tensor<T>&, const Mat<T>&, const Mat<T>&,      \
                                   Tensor<T>&, Tensor<T>*, Mat<T>*);                    \
  template void lstm_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,   \
                                const Mat<T>&, std::int64_t, LstmState<T>&, Mat<T>&,    \
                                LstmCache<T>*);                                         \
  template void lstm_backward<T>(const Tensor<T>&, const Tensor<T>&, const LstmCache<T>&, \
                                 const Mat<T>&, const Mat<T>&, Tensor<T>&, Tensor<T>&,  \
                                 Tensor<T>&, Mat<T>*, LstmState<T>*);                   \
  template LstmState<T> lstm_step<T>(const LstmParams<T>&, const LstmState<T>&,         \
                                     const Mat<T>&);                                    \
  template void embed_forward<T>(const Tensor<T>&, std::span<const std::uint8_t>,       \
                                 Mat<T>&);                                              \
  template Mat<T> embed<T>(const Tensor<T>&, std::span<const int>);                     \
  template void embed_backward<T>(std::span<const std::uint8_t>, const Mat<T>&,         \
                                  Tensor<T>&);                                          \
  template CrossEntropy<T> softmax_ce<T>(const Mat<T>&, std::span<const std::uint8_t>,  \
                                         std::span<const std::uint8_t>, bool);

BWE_INSTANTIATE_LAYERS(float)
BWE_INSTANTIATE_LAYERS(double)

}  // namespace bwe::nn
