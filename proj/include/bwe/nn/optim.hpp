#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include "bwe/nn/tensor.hpp"

namespace bwe::nn {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  AdamHyper hyper;
  std::int64_t step = 0;
  ParameterSet<T> first_moment;
  ParameterSet<T> second_moment;

  static AdamState init(const ParameterSet<T>& params, AdamHyper hyper = {}) {
    return {hyper, 0, params.zeros_like(), params.zeros_like()};
  }
};

// Bias-corrected Adam step. Throws NumericError, leaving params and state
// untouched, when any gradient is non-finite.
template <typename T>
void adam_update(AdamState<T>& state, ParameterSet<T>& params, const ParameterSet<T>& grads);

// Rescales grads so that their global L2 norm is at most max_norm.
// Returns the norm before clipping.
template <typename T>
double clip_global_norm(ParameterSet<T>& grads, double max_norm);

// uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for rank-2 weights.
using Rng = std::mt19937_64;
double uniform01(Rng& rng);
template <typename T>
void init_uniform(Tensor<T>& t, double scale, Rng& rng);

struct GradCheckOptions {
  double step = 1e-5;
  // Denominator floor of the relative error, so that near-zero gradients
  // are judged by absolute error.
  double denominator_floor = 1e-6;
  // Probe at most this many entries per tensor (0 = all); entries are
  // drawn with `seed`.
  std::size_t max_entries_per_tensor = 0;
  std::uint64_t seed = 0;
  // When an entry fails and its one-sided differences disagree (a ReLU
  // kink inside the stencil), retry with the step divided by 10, at most
  // this many times.
  int kink_refinements = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  std::size_t kink_refinements = 0;
  bool passed = false;
};

// Central differences of `loss` w.r.t. every probed entry of `params`,
// compared against `analytic`. Step for an entry p is step * max(|p|, 1).
GradCheckReport grad_check(const std::function<double()>& loss, ParameterSet<double>& params,
                           const ParameterSet<double>& analytic, double tolerance,
                           const GradCheckOptions& opts = {});

}  // namespace bwe::nn
