#include "bwe/dsp/spectral.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "bwe/error.hpp"

namespace bwe {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_inplace(std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw ParameterError("FFT size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> w(std::cos(ang * k), std::sin(ang * k));
        const auto u = x[i + k];
        const auto v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
      }
    }
  }
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
  return w;
}

std::vector<double> hamming_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
  return w;
}

std::size_t frame_count(std::size_t n_samples, std::size_t frame_len,
                        std::size_t frame_shift) {
  if (frame_len == 0 || n_samples < frame_len) return 0;
  return (n_samples - frame_len) / frame_shift + 1;
}

Spectrogram stft(std::span<const double> x, std::size_t frame_len,
                 std::size_t frame_shift) {
  if (frame_shift == 0 || frame_shift > frame_len)
    throw ParameterError("stft needs 0 < frame_shift <= frame_len");
  Spectrogram spec;
  spec.frame_len = frame_len;
  spec.frame_shift = frame_shift;
  spec.n_fft = next_pow2(frame_len);
  spec.n_frames = frame_count(x.size(), frame_len, frame_shift);
  const auto window = hann_window(frame_len);
  const std::size_t n_bins = spec.n_bins();
  spec.bins.resize(spec.n_frames * n_bins);
  std::vector<std::complex<double>> buf(spec.n_fft);
  for (std::size_t f = 0; f < spec.n_frames; ++f) {
    std::fill(buf.begin(), buf.end(), std::complex<double>{});
    for (std::size_t i = 0; i < frame_len; ++i)
      buf[i] = x[f * frame_shift + i] * window[i];
    fft_inplace(buf);
    std::copy_n(buf.begin(), n_bins, spec.bins.begin() + f * n_bins);
  }
  return spec;
}

Spectrogram stft(const Waveform& w, std::size_t frame_len,
                 std::size_t frame_shift) {
  return stft(w.samples(), frame_len, frame_shift);
}

}  // namespace bwe
