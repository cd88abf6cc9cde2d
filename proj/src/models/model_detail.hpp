#pragma once

// Internal helpers shared by the SRNN and HRNN implementations.

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "bwe/models/model.hpp"
#include "bwe/nn/optim.hpp"

namespace bwe {
namespace detail {

struct AffineHandles {
  std::size_t weight = 0;
  std::size_t bias = 0;
};

struct LstmHandles {
  std::size_t input_weights = 0;
  std::size_t recurrent_weights = 0;
  std::size_t biases = 0;
};

std::size_t add_weight(nn::ParameterSet<double>& ps, const std::string& name,
                       std::int64_t out, std::int64_t in, nn::Rng& rng);
AffineHandles add_affine(nn::ParameterSet<double>& ps, const std::string& name,
                         std::int64_t out, std::int64_t in, nn::Rng& rng);
LstmHandles add_lstm(nn::ParameterSet<double>& ps, const std::string& name, std::int64_t in,
                     std::int64_t hidden, double forget_bias, nn::Rng& rng);
std::size_t add_embedding(nn::ParameterSet<double>& ps, std::int64_t dim, nn::Rng& rng);

template <typename T>
void relu_inplace(nn::Mat<T>& m);

// FF stack: ReLU after every layer but the last. `inputs_out` receives the
// input of each layer for backward.
template <typename T>
void ff_forward(const nn::ParameterSet<T>& p, const std::vector<AffineHandles>& layers,
                nn::Mat<T> input, std::vector<nn::Mat<T>>* inputs_out, nn::Mat<T>& logits);

// Returns the gradient w.r.t. the stack input.
template <typename T>
nn::Mat<T> ff_backward(const nn::ParameterSet<T>& p, const std::vector<AffineHandles>& layers,
                       const std::vector<nn::Mat<T>>& inputs, const nn::Mat<T>& dlogits,
                       nn::ParameterSet<T>& g);

}  // namespace detail

template <typename T>
std::unique_ptr<WaveformModel<T>> make_hrnn(const ModelConfig& cfg, std::uint64_t seed);
template <typename T>
std::unique_ptr<WaveformModel<T>> make_srnn(const ModelConfig& cfg, std::uint64_t seed);

}  // namespace bwe
