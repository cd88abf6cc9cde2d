#pragma once

#include <cstdint>
#include <span>

#include "bwe/nn/tensor.hpp"

namespace bwe::nn {

// ---------------------------------------------------------------------------
// Affine: Y = X * W^T + b, with W [out x in]. An empty bias tensor means a
// bias-free projection.

template <typename T>
struct AffineParams {
  Tensor<T> weight;  // [out x in]
  Tensor<T> bias;    // [out]
};

template <typename T>
void affine_forward(const Tensor<T>& weight, const Tensor<T>& bias, const Mat<T>& x,
                    Mat<T>& y);

// Accumulates into dweight / dbias (dbias may be null for bias-free
// layers). dx, when requested, is overwritten.
template <typename T>
void affine_backward(const Tensor<T>& weight, const Mat<T>& x, const Mat<T>& dy,
                     Tensor<T>& dweight, Tensor<T>* dbias, Mat<T>* dx);

template <typename T>
Mat<T> affine(const AffineParams<T>& p, const Mat<T>& x) {
  Mat<T> y;
  affine_forward(p.weight, p.bias, x, y);
  return y;
}

// ---------------------------------------------------------------------------
// LSTM with gate order (input, forget, cell, output); no peepholes.
// Sequences are laid out time-major: row t * batch + b.

template <typename T>
struct LstmParams {
  Tensor<T> input_weights;      // [4H x in]
  Tensor<T> recurrent_weights;  // [4H x H]
  Tensor<T> biases;             // [4H]

  std::int64_t hidden() const { return recurrent_weights.dims()[1]; }
  std::int64_t input_size() const { return input_weights.dims()[1]; }
};

template <typename T>
struct LstmState {
  Mat<T> h;  // [B x H]
  Mat<T> c;  // [B x H]

  static LstmState zeros(std::int64_t batch, std::int64_t hidden) {
    return {Mat<T>::Zero(batch, hidden), Mat<T>::Zero(batch, hidden)};
  }
};

template <typename T>
struct LstmCache {
  std::int64_t batch = 0;
  std::int64_t steps = 0;
  Mat<T> h0, c0;   // state entering the sequence
  Mat<T> gates;    // activated gates [S*B x 4H]
  Mat<T> cells;    // c_t [S*B x H]
  Mat<T> tanh_c;   // tanh(c_t)
  Mat<T> outputs;  // h_t [S*B x H]
};

// Runs x [S*B x in] through the cell starting at `state`; on return
// `state` holds the final (h, c) and `h_out` all hidden outputs.
template <typename T>
void lstm_forward(const Tensor<T>& input_weights, const Tensor<T>& recurrent_weights,
                  const Tensor<T>& biases, const Mat<T>& x, std::int64_t batch,
                  LstmState<T>& state, Mat<T>& h_out, LstmCache<T>* cache);

// Backpropagation through the whole cached sequence. Gradient flowing in
// from beyond the last step is taken as zero (truncation point). Parameter
// gradients accumulate; dx and dstate0 are overwritten when non-null.
template <typename T>
void lstm_backward(const Tensor<T>& input_weights, const Tensor<T>& recurrent_weights,
                   const LstmCache<T>& cache, const Mat<T>& x, const Mat<T>& dh,
                   Tensor<T>& dinput_weights, Tensor<T>& drecurrent_weights,
                   Tensor<T>& dbiases, Mat<T>* dx, LstmState<T>* dstate0 = nullptr);

// Single-step convenience wrapper: (h, c) = cell(h_prev, c_prev, x).
template <typename T>
LstmState<T> lstm_step(const LstmParams<T>& p, const LstmState<T>& prev, const Mat<T>& x);

// ---------------------------------------------------------------------------
// Embedding over the 256-level mu-law alphabet.

inline constexpr std::int64_t kVocab = 256;

template <typename T>
void embed_forward(const Tensor<T>& table, std::span<const std::uint8_t> levels,
                   Mat<T>& out);

// Checked variant for untyped input; throws ShapeError on levels outside
// [0, 255].
template <typename T>
Mat<T> embed(const Tensor<T>& table, std::span<const int> levels);

// Scatter-adds rows of dy into the rows of dtable named by levels.
template <typename T>
void embed_backward(std::span<const std::uint8_t> levels, const Mat<T>& dy,
                    Tensor<T>& dtable);

// ---------------------------------------------------------------------------
// Masked softmax cross-entropy over 256 classes.

template <typename T>
struct CrossEntropy {
  double loss = 0.0;       // mean over unmasked rows
  double loss_sum = 0.0;   // sum over unmasked rows
  std::int64_t count = 0;  // unmasked rows
  bool all_masked = false;
  Mat<T> dlogits;          // d(mean loss) / d(logits)
};

template <typename T>
CrossEntropy<T> softmax_ce(const Mat<T>& logits, std::span<const std::uint8_t> targets,
                           std::span<const std::uint8_t> mask, bool want_grad = true);

}  // namespace bwe::nn
