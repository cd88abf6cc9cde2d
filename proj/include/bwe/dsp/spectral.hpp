#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "bwe/dsp/waveform.hpp"

namespace bwe {

// In-place iterative radix-2 FFT. Size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& x);

std::size_t next_pow2(std::size_t n);

// Symmetric Hann window of the given length.
std::vector<double> hann_window(std::size_t n);
std::vector<double> hamming_window(std::size_t n);

// One-sided complex spectrogram (n_fft/2 + 1 bins per frame).
struct Spectrogram {
  std::size_t n_frames = 0;
  std::size_t n_fft = 0;
  std::size_t frame_len = 0;
  std::size_t frame_shift = 0;
  std::vector<std::complex<double>> bins;  // row-major [n_frames x n_bins]

  std::size_t n_bins() const { return n_fft / 2 + 1; }
  std::complex<double> at(std::size_t frame, std::size_t bin) const {
    return bins[frame * n_bins() + bin];
  }
  bool empty() const { return n_frames == 0; }
};

std::size_t frame_count(std::size_t n_samples, std::size_t frame_len,
                        std::size_t frame_shift);

// Hann-windowed STFT, FFT size = next power of two >= frame_len. Returns
// an empty spectrogram when the signal is shorter than one frame.
Spectrogram stft(std::span<const double> x, std::size_t frame_len,
                 std::size_t frame_shift);
Spectrogram stft(const Waveform& w, std::size_t frame_len,
                 std::size_t frame_shift);

}  // namespace bwe
