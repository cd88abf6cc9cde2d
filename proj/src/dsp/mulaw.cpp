#include "bwe/dsp/mulaw.hpp"

#include <algorithm>
#include <cmath>

namespace bwe {

namespace {

constexpr double kMu = 255.0;

double compand(double s) {
  return std::copysign(std::log1p(kMu * std::abs(s)) / std::log1p(kMu), s);
}

double expand(double f) {
  return std::copysign(std::expm1(std::abs(f) * std::log1p(kMu)) / kMu, f);
}

}  // namespace

std::uint8_t mulaw_encode_sample(double s) {
  s = std::clamp(s, -1.0, 1.0);
  const double bin = std::floor((compand(s) + 1.0) * 0.5 * kMulawLevels);
  return static_cast<std::uint8_t>(std::clamp(bin, 0.0, 255.0));
}

double mulaw_decode_level(std::uint8_t q) {
  const double center = (q + 0.5) * 2.0 / kMulawLevels - 1.0;
  return std::clamp(expand(center), -1.0, 1.0);
}

const std::array<double, kMulawLevels>& mulaw_table() {
  static const auto table = [] {
    std::array<double, kMulawLevels> t{};
    for (int q = 0; q < kMulawLevels; ++q)
      t[q] = mulaw_decode_level(static_cast<std::uint8_t>(q));
    return t;
  }();
  return table;
}

QuantizedWaveform mulaw_encode(const Waveform& w) {
  std::vector<std::uint8_t> levels(w.size());
  std::transform(w.samples().begin(), w.samples().end(), levels.begin(),
                 mulaw_encode_sample);
  return QuantizedWaveform(std::move(levels), w.sample_rate());
}

Waveform mulaw_decode(const QuantizedWaveform& q) {
  const auto& table = mulaw_table();
  std::vector<double> s(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) s[i] = table[q[i]];
  return Waveform(std::move(s), q.sample_rate());
}

}  // namespace bwe
