#include "bwe/dsp/mfcc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bwe/dsp/spectral.hpp"
#include "bwe/error.hpp"

namespace bwe {

MfccConfig MfccConfig::narrowband() {
  MfccConfig cfg;
  cfg.sample_rate_hz = kNarrowbandRate;
  cfg.frame_len_samples = 200;
  cfg.frame_shift_samples = 80;
  return cfg;
}

void MfccConfig::validate() const {
  if (sample_rate_hz <= 0 || frame_len_samples <= 0 || frame_shift_samples <= 0)
    throw ParameterError("MFCC framing parameters must be positive");
  if (frame_shift_samples > frame_len_samples)
    throw ParameterError("MFCC frame shift exceeds frame length");
  if (n_cepstra <= 0 || n_cepstra > n_mel_filters)
    throw ParameterError("MFCC needs 0 < n_cepstra <= n_mel_filters");
  if (kWidebandRate % sample_rate_hz != 0)
    throw ParameterError("MFCC rate must divide the 16 kHz model rate");
}

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filters over one-sided FFT bins, [n_filters x n_bins].
std::vector<std::vector<double>> mel_filterbank(int n_filters, std::size_t n_fft,
                                                int sample_rate) {
  const std::size_t n_bins = n_fft / 2 + 1;
  const double mel_hi = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(n_filters + 2);
  for (int m = 0; m < n_filters + 2; ++m)
    edges[m] = mel_to_hz(mel_hi * m / (n_filters + 1));
  std::vector<std::vector<double>> bank(n_filters, std::vector<double>(n_bins, 0.0));
  for (int m = 0; m < n_filters; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (std::size_t b = 0; b < n_bins; ++b) {
      const double f = static_cast<double>(b) * sample_rate / n_fft;
      if (f > lo && f <= mid)
        bank[m][b] = (f - lo) / (mid - lo);
      else if (f > mid && f < hi)
        bank[m][b] = (hi - f) / (hi - mid);
    }
  }
  return bank;
}

void append_deltas(std::vector<std::vector<double>>& feats, int base_dim,
                   int offset) {
  const auto n = static_cast<std::ptrdiff_t>(feats.size());
  constexpr int kSpan = 2;
  constexpr double kNorm = 2.0 * (1 * 1 + 2 * 2);
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    for (int d = 0; d < base_dim; ++d) {
      double acc = 0.0;
      for (int k = 1; k <= kSpan; ++k) {
        const auto fwd = std::min(n - 1, t + k);
        const auto back = std::max<std::ptrdiff_t>(0, t - k);
        acc += k * (feats[fwd][offset + d] - feats[back][offset + d]);
      }
      feats[t].push_back(acc / kNorm);
    }
  }
}

}  // namespace

ConditionTrack mfcc(const Waveform& w, const MfccConfig& cfg) {
  cfg.validate();
  if (w.sample_rate() != cfg.sample_rate_hz)
    throw ParameterError("mfcc: input rate " + std::to_string(w.sample_rate()) +
                         " Hz does not match config rate " +
                         std::to_string(cfg.sample_rate_hz));
  ConditionTrack track;
  track.dim = static_cast<std::size_t>(cfg.dim());
  track.frame_shift_samples = static_cast<std::uint32_t>(
      cfg.frame_shift_samples * (kWidebandRate / cfg.sample_rate_hz));

  const auto frame_len = static_cast<std::size_t>(cfg.frame_len_samples);
  const auto shift = static_cast<std::size_t>(cfg.frame_shift_samples);
  const std::size_t n_frames = frame_count(w.size(), frame_len, shift);
  if (n_frames == 0) return track;

  const std::size_t n_fft = next_pow2(frame_len);
  const auto bank = mel_filterbank(cfg.n_mel_filters, n_fft, cfg.sample_rate_hz);
  const auto window = hamming_window(frame_len);

  std::vector<double> emph(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    emph[i] = w[i] - (i > 0 ? cfg.preemphasis * w[i - 1] : 0.0);

  std::vector<std::vector<double>> feats(n_frames);
  std::vector<std::complex<double>> buf(n_fft);
  std::vector<double> logmel(cfg.n_mel_filters);
  const double dct_scale0 = std::sqrt(1.0 / cfg.n_mel_filters);
  const double dct_scale = std::sqrt(2.0 / cfg.n_mel_filters);
  for (std::size_t f = 0; f < n_frames; ++f) {
    std::fill(buf.begin(), buf.end(), std::complex<double>{});
    for (std::size_t i = 0; i < frame_len; ++i) buf[i] = emph[f * shift + i] * window[i];
    fft_inplace(buf);
    for (int m = 0; m < cfg.n_mel_filters; ++m) {
      double e = 0.0;
      for (std::size_t b = 0; b <= n_fft / 2; ++b) e += bank[m][b] * std::norm(buf[b]);
      logmel[m] = std::log(e + cfg.log_floor);
    }
    auto& c = feats[f];
    c.resize(cfg.n_cepstra);
    for (int k = 0; k < cfg.n_cepstra; ++k) {
      double acc = 0.0;
      for (int m = 0; m < cfg.n_mel_filters; ++m)
        acc += logmel[m] *
               std::cos(std::numbers::pi * k * (m + 0.5) / cfg.n_mel_filters);
      c[k] = acc * (k == 0 ? dct_scale0 : dct_scale);
    }
  }
  if (cfg.include_deltas) {
    append_deltas(feats, cfg.n_cepstra, 0);
    append_deltas(feats, cfg.n_cepstra, cfg.n_cepstra);
  }
  track.frames.reserve(n_frames * track.dim);
  for (const auto& row : feats)
    for (double v : row) track.frames.push_back(static_cast<float>(v));
  return track;
}

}  // namespace bwe
