#pragma once

#include <span>
#include <vector>

#include "bwe/dsp/waveform.hpp"

namespace bwe {

// Linear-phase FIR filter: odd tap count, taps symmetric about the center.
class FirFilter {
 public:
  explicit FirFilter(std::vector<double> taps);

  std::span<const double> taps() const { return taps_; }
  std::size_t size() const { return taps_.size(); }
  int group_delay_samples() const {
    return static_cast<int>((taps_.size() - 1) / 2);
  }

  // |H(e^{jw})| at the given frequency.
  double magnitude_at(double freq_hz, int sample_rate_hz) const;

 private:
  std::vector<double> taps_;
};

// Hamming-windowed sinc designs. Throws ParameterError on even n_taps or a
// cutoff outside (0, fs/2).
FirFilter design_lowpass(double cutoff_hz, int sample_rate_hz, int n_taps);
// Spectral inversion of the matching lowpass.
FirFilter design_highpass(double cutoff_hz, int sample_rate_hz, int n_taps);

// Zero-padded convolution, compensated for group delay so that the output
// has the input's length and no time shift.
Waveform filter(const Waveform& w, const FirFilter& f);
std::vector<double> filter(std::span<const double> x, const FirFilter& f);

// Filters shared by the pipeline.
inline constexpr double kHighpassCutoffHz = 4000.0;
inline constexpr int kHighpassTaps = 101;
inline constexpr double kResampleCutoffHz = 0.45 * kNarrowbandRate;
inline constexpr int kResampleTaps = 255;

const FirFilter& hf_highpass();     // 4 kHz @ 16 kHz, 101 taps
const FirFilter& resample_lowpass();  // 3.6 kHz @ 16 kHz, 255 taps

// 16 kHz -> 8 kHz: anti-alias lowpass then keep even-indexed samples.
Waveform downsample2(const Waveform& w);
// 8 kHz -> 16 kHz: zero-stuff, interpolation lowpass, gain 2.
Waveform upsample2(const Waveform& w);

// HF-strategy training target: highpass at 4 kHz, multiply by gain, clip.
Waveform make_hf_target(const Waveform& wideband, double gain);

}  // namespace bwe
