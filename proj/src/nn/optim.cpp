#include "bwe/nn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bwe::nn {

template <typename T>
void adam_update(AdamState<T>& state, ParameterSet<T>& params, const ParameterSet<T>& grads) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size())
    throw ShapeError("adam: parameter, gradient and moment sets differ in size");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].dims() != params[i].dims())
      throw ShapeError("adam: gradient " + grads.name(i) + " " +
                       shape_string(grads[i].dims()) + " vs parameter " +
                       shape_string(params[i].dims()));
    if (!grads[i].all_finite())
      throw NumericError("adam: non-finite gradient in " + grads.name(i));
  }
  const auto& h = state.hyper;
  ++state.step;
  const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(h.beta1), b2 = static_cast<T>(h.beta2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].data();
    auto g = grads[i].data();
    auto m = state.first_moment[i].data();
    auto v = state.second_moment[i].data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = b1 * m[k] + (T(1) - b1) * g[k];
      v[k] = b2 * v[k] + (T(1) - b2) * g[k] * g[k];
      const double mhat = static_cast<double>(m[k]) / bc1;
      const double vhat = static_cast<double>(v[k]) / bc2;
      p[k] -= static_cast<T>(h.lr * mhat / (std::sqrt(vhat) + h.epsilon));
    }
  }
}

template <typename T>
double clip_global_norm(ParameterSet<T>& grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (std::isfinite(norm) && norm > max_norm && max_norm > 0.0)
    grads.scale(static_cast<T>(max_norm / norm));
  return norm;
}

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
void init_uniform(Tensor<T>& t, double scale, Rng& rng) {
  for (T& v : t.data()) v = static_cast<T>((2.0 * uniform01(rng) - 1.0) * scale);
}

GradCheckReport grad_check(const std::function<double()>& loss, ParameterSet<double>& params,
                           const ParameterSet<double>& analytic, double tolerance,
                           const GradCheckOptions& opts) {
  if (params.size() != analytic.size())
    throw ShapeError("grad_check: parameter and gradient sets differ in size");
  GradCheckReport report;
  Rng rng(opts.seed);
  for (std::size_t ti = 0; ti < params.size(); ++ti) {
    auto p = params[ti].data();
    const auto g = analytic[ti].data();
    std::vector<std::size_t> idx(p.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (opts.max_entries_per_tensor != 0 && idx.size() > opts.max_entries_per_tensor) {
      for (std::size_t k = 0; k < opts.max_entries_per_tensor; ++k) {
        const std::size_t j = k + rng() % (idx.size() - k);
        std::swap(idx[k], idx[j]);
      }
      idx.resize(opts.max_entries_per_tensor);
    }
    for (std::size_t k : idx) {
      const double orig = p[k];
      double h = opts.step * std::max(std::abs(orig), 1.0);
      auto rel_to = [&](double a, double b) {
        return std::abs(a - b) / std::max({std::abs(a), std::abs(b), opts.denominator_floor});
      };
      double numeric = 0.0, rel = 0.0;
      for (int refine = 0;; ++refine) {
        p[k] = orig + h;
        const double up = loss();
        p[k] = orig - h;
        const double down = loss();
        p[k] = orig;
        numeric = (up - down) / (2.0 * h);
        rel = rel_to(numeric, g[k]);
        if (rel <= tolerance || refine == opts.kink_refinements) break;
        // A kink inside [orig - h, orig + h] shows up as one-sided slopes
        // that disagree; shrink the stencil until it no longer straddles it.
        const double mid = loss();
        if (rel_to((up - mid) / h, (mid - down) / h) <= tolerance) break;
        ++report.kink_refinements;
        h /= 10.0;
      }
      ++report.checked;
      if (rel > report.max_rel_error || !std::isfinite(rel)) {
        report.max_rel_error = std::isfinite(rel) ? rel : INFINITY;
        report.worst_param = params.name(ti);
        report.worst_index = k;
        report.worst_analytic = g[k];
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_rel_error < tolerance;
  return report;
}

template void adam_update<float>(AdamState<float>&, ParameterSet<float>&,
                                 const ParameterSet<float>&);
template void adam_update<double>(AdamState<double>&, ParameterSet<double>&,
                                  const ParameterSet<double>&);
template double clip_global_norm<float>(ParameterSet<float>&, double);
template double clip_global_norm<double>(ParameterSet<double>&, double);
template void init_uniform<float>(Tensor<float>&, double, Rng&);
template void init_uniform<double>(Tensor<double>&, double, Rng&);

}  // namespace bwe::nn
