#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "bwe/data/corpus.hpp"

namespace bwe::testing {

// 1 kHz + 6 kHz mixture; utterance u gets its own amplitudes so the
// model has to read the input rather than memorize one waveform.
inline Waveform toy_wideband(double u, std::int64_t n) {
  const double a1 = 0.3 + 0.08 * u, a6 = 0.08 + 0.02 * u;
  std::vector<double> s(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kWidebandRate;
    s[static_cast<std::size_t>(i)] = a1 * std::sin(2 * std::numbers::pi * 1000.0 * t) +
                                     a6 * std::sin(2 * std::numbers::pi * 6000.0 * t);
  }
  return Waveform(std::move(s), kWidebandRate);
}

inline std::vector<UtterancePair> toy_pairs(int count, std::int64_t n, const ModelConfig& cfg) {
  std::vector<UtterancePair> out;
  for (int u = 0; u < count; ++u)
    out.push_back(build_pair(toy_wideband(u, n), cfg.strategy, cfg.hf_gain, cfg.condition, nullptr,
                             "toy" + std::to_string(u)));
  return out;
}

}  // namespace bwe::testing
