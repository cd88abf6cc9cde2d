#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bwe {

inline constexpr int kWidebandRate = 16000;
inline constexpr int kNarrowbandRate = 8000;

// Mono audio with amplitudes in [-1, 1]. Samples are clipped on
// construction.
class Waveform {
 public:
  Waveform() = default;
  Waveform(std::vector<double> samples, int sample_rate_hz);

  static Waveform zeros(std::size_t n, int sample_rate_hz);

  std::span<const double> samples() const { return samples_; }
  const std::vector<double>& vec() const { return samples_; }
  double operator[](std::size_t i) const { return samples_[i]; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  int sample_rate() const { return rate_; }

 private:
  std::vector<double> samples_;
  int rate_ = kWidebandRate;
};

// 8-bit mu-law level sequence; every level is in [0, 255] by type.
class QuantizedWaveform {
 public:
  QuantizedWaveform() = default;
  QuantizedWaveform(std::vector<std::uint8_t> levels, int sample_rate_hz);

  std::span<const std::uint8_t> levels() const { return levels_; }
  const std::vector<std::uint8_t>& vec() const { return levels_; }
  std::uint8_t operator[](std::size_t i) const { return levels_[i]; }
  std::size_t size() const { return levels_.size(); }
  bool empty() const { return levels_.empty(); }
  int sample_rate() const { return rate_; }

 private:
  std::vector<std::uint8_t> levels_;
  int rate_ = kWidebandRate;
};

}  // namespace bwe
