#include "bwe/dsp/fir.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bwe/error.hpp"

namespace bwe {

FirFilter::FirFilter(std::vector<double> taps) : taps_(std::move(taps)) {
  if (taps_.empty() || taps_.size() % 2 == 0)
    throw ParameterError("FIR filter needs an odd number of taps, got " +
                         std::to_string(taps_.size()));
  const std::size_t n = taps_.size();
  for (std::size_t i = 0; i < n / 2; ++i)
    if (std::abs(taps_[i] - taps_[n - 1 - i]) > 1e-12)
      throw ParameterError("FIR taps are not symmetric");
}

double FirFilter::magnitude_at(double freq_hz, int sample_rate_hz) const {
  const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < taps_.size(); ++k) {
    re += taps_[k] * std::cos(w * static_cast<double>(k));
    im -= taps_[k] * std::sin(w * static_cast<double>(k));
  }
  return std::hypot(re, im);
}

namespace {

void check_design(double cutoff_hz, int sample_rate_hz, int n_taps) {
  if (n_taps <= 0 || n_taps % 2 == 0)
    throw ParameterError("n_taps must be odd and positive, got " +
                         std::to_string(n_taps));
  if (sample_rate_hz <= 0 || !(cutoff_hz > 0.0) ||
      !(cutoff_hz < sample_rate_hz / 2.0))
    throw ParameterError("cutoff " + std::to_string(cutoff_hz) +
                         " Hz outside (0, fs/2) for fs " +
                         std::to_string(sample_rate_hz));
}

std::vector<double> lowpass_taps(double cutoff_hz, int sample_rate_hz,
                                 int n_taps) {
  const double fc = cutoff_hz / sample_rate_hz;  // cycles per sample
  const int mid = n_taps / 2;
  std::vector<double> taps(n_taps);
  double sum = 0.0;
  for (int i = 0; i < n_taps; ++i) {
    const int m = i - mid;
    const double sinc =
        m == 0 ? 2.0 * fc
               : std::sin(2.0 * std::numbers::pi * fc * m) / (std::numbers::pi * m);
    const double window =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (n_taps - 1));
    taps[i] = sinc * window;
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  // Exact symmetry; the cosine window is symmetric only up to rounding.
  for (int i = 0; i < mid; ++i) taps[n_taps - 1 - i] = taps[i];
  return taps;
}

}  // namespace

FirFilter design_lowpass(double cutoff_hz, int sample_rate_hz, int n_taps) {
  check_design(cutoff_hz, sample_rate_hz, n_taps);
  return FirFilter(lowpass_taps(cutoff_hz, sample_rate_hz, n_taps));
}

FirFilter design_highpass(double cutoff_hz, int sample_rate_hz, int n_taps) {
  check_design(cutoff_hz, sample_rate_hz, n_taps);
  auto taps = lowpass_taps(cutoff_hz, sample_rate_hz, n_taps);
  for (double& t : taps) t = -t;
  taps[n_taps / 2] += 1.0;
  return FirFilter(std::move(taps));
}

std::vector<double> filter(std::span<const double> x, const FirFilter& f) {
  const auto taps = f.taps();
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto n_taps = static_cast<std::ptrdiff_t>(taps.size());
  const std::ptrdiff_t delay = f.group_delay_samples();
  std::vector<double> y(x.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    // y[i] = sum_k taps[k] * x[i + delay - k]
    const std::ptrdiff_t k_lo = std::max<std::ptrdiff_t>(0, i + delay - (n - 1));
    const std::ptrdiff_t k_hi = std::min<std::ptrdiff_t>(n_taps - 1, i + delay);
    double acc = 0.0;
    for (std::ptrdiff_t k = k_lo; k <= k_hi; ++k) acc += taps[k] * x[i + delay - k];
    y[i] = acc;
  }
  return y;
}

Waveform filter(const Waveform& w, const FirFilter& f) {
  return Waveform(filter(w.samples(), f), w.sample_rate());
}

const FirFilter& hf_highpass() {
  static const FirFilter f =
      design_highpass(kHighpassCutoffHz, kWidebandRate, kHighpassTaps);
  return f;
}

const FirFilter& resample_lowpass() {
  static const FirFilter f =
      design_lowpass(kResampleCutoffHz, kWidebandRate, kResampleTaps);
  return f;
}

Waveform downsample2(const Waveform& w) {
  if (w.sample_rate() % 2 != 0)
    throw ParameterError("downsample2 needs an even sample rate");
  const FirFilter& lp = w.sample_rate() == kWidebandRate
                            ? resample_lowpass()
                            : design_lowpass(0.45 * w.sample_rate() / 2.0,
                                             w.sample_rate(), kResampleTaps);
  const auto smooth = filter(w.samples(), lp);
  std::vector<double> out((w.size() + 1) / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = smooth[2 * i];
  return Waveform(std::move(out), w.sample_rate() / 2);
}

Waveform upsample2(const Waveform& w) {
  const int rate = 2 * w.sample_rate();
  const FirFilter& lp = rate == kWidebandRate
                            ? resample_lowpass()
                            : design_lowpass(0.45 * w.sample_rate(), rate,
                                             kResampleTaps);
  std::vector<double> stuffed(2 * w.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) stuffed[2 * i] = 2.0 * w[i];
  return Waveform(filter(stuffed, lp), rate);
}

Waveform make_hf_target(const Waveform& wideband, double gain) {
  if (wideband.sample_rate() != kWidebandRate)
    throw ParameterError("make_hf_target expects 16 kHz input");
  if (!(gain >= 1.0)) throw ParameterError("HF gain must be >= 1");
  auto hf = filter(wideband.samples(), hf_highpass());
  for (double& s : hf) s *= gain;
  return Waveform(std::move(hf), wideband.sample_rate());
}

}  // namespace bwe
