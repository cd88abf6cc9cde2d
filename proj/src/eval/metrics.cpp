#include "bwe/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bwe/dsp/fir.hpp"
#include "bwe/dsp/mulaw.hpp"
#include "bwe/dsp/spectral.hpp"
#include "bwe/error.hpp"

namespace bwe {

namespace {

void check_pair(const Waveform& a, const Waveform& b, const char* what) {
  if (a.sample_rate() != b.sample_rate())
    throw ParameterError(std::string(what) + ": sample rates differ");
  if (a.size() != b.size())
    throw ParameterError(std::string(what) + ": lengths differ (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
}

double ratio_db(double signal, double noise, double cap) {
  if (noise == 0.0) return cap;
  if (signal == 0.0) return -cap;
  return std::clamp(10.0 * std::log10(signal / noise), -cap, cap);
}

// Per-frame squared log-spectral differences summed over bins [lo, hi].
std::vector<double> frame_lsd(const Waveform& ref, const Waveform& deg, const LsdConfig& cfg,
                              std::size_t lo, std::size_t hi) {
  check_pair(ref, deg, "lsd");
  if (ref.size() < cfg.frame_len)
    throw ParameterError("lsd: signal shorter than one " + std::to_string(cfg.frame_len) +
                         "-sample frame");
  const auto a = stft(ref, cfg.frame_len, cfg.frame_shift);
  const auto b = stft(deg, cfg.frame_len, cfg.frame_shift);
  hi = std::min(hi, a.n_bins() - 1);
  std::vector<double> out(a.n_frames);
  for (std::size_t f = 0; f < a.n_frames; ++f) {
    double acc = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) {
      const double d = 20.0 * std::log10(std::abs(a.at(f, k)) + cfg.epsilon) -
                       20.0 * std::log10(std::abs(b.at(f, k)) + cfg.epsilon);
      acc += d * d;
    }
    out[f] = std::sqrt(acc / static_cast<double>(hi - lo + 1));
  }
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double snr_db(std::span<const double> ref, std::span<const double> deg, double cap_db) {
  if (ref.size() != deg.size()) throw ParameterError("snr: lengths differ");
  double s = 0.0, n = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    s += ref[i] * ref[i];
    const double e = ref[i] - deg[i];
    n += e * e;
  }
  return ratio_db(s, n, cap_db);
}

double snr_db(const Waveform& ref, const Waveform& deg, double cap_db) {
  check_pair(ref, deg, "snr");
  return snr_db(ref.samples(), deg.samples(), cap_db);
}

std::vector<double> lsd_per_frame(const Waveform& ref, const Waveform& deg, const LsdConfig& cfg) {
  return frame_lsd(ref, deg, cfg, 0, cfg.frame_len);
}

double lsd_db(const Waveform& ref, const Waveform& deg, const LsdConfig& cfg) {
  return mean(lsd_per_frame(ref, deg, cfg));
}

double band_lsd_db(const Waveform& ref, const Waveform& deg, double lo_hz, double hi_hz,
                   const LsdConfig& cfg) {
  if (!(lo_hz >= 0.0 && hi_hz > lo_hz)) throw ParameterError("band_lsd: need 0 <= lo < hi");
  const std::size_t n_fft = next_pow2(cfg.frame_len);
  const double bin_hz = static_cast<double>(ref.sample_rate()) / static_cast<double>(n_fft);
  const auto lo = static_cast<std::size_t>(std::ceil(lo_hz / bin_hz));
  const auto hi = static_cast<std::size_t>(std::floor(hi_hz / bin_hz));
  if (hi < lo) throw ParameterError("band_lsd: band contains no bins");
  return mean(frame_lsd(ref, deg, cfg, lo, hi));
}

SplitMetrics split_metrics(const Waveform& ref, const Waveform& deg,
                           const std::vector<bool>& voiced, const LsdConfig& cfg,
                           double cap_db) {
  const auto per_frame = lsd_per_frame(ref, deg, cfg);
  if (voiced.size() != per_frame.size())
    throw ParameterError("split_metrics: " + std::to_string(voiced.size()) +
                         " flags for " + std::to_string(per_frame.size()) + " frames");
  double sig[2] = {0, 0}, noise[2] = {0, 0}, lsd_sum[2] = {0, 0};
  std::size_t frames[2] = {0, 0};
  const std::size_t n = per_frame.size();
  for (std::size_t j = 0; j < n; ++j) {
    const int c = voiced[j] ? 0 : 1;
    ++frames[c];
    lsd_sum[c] += per_frame[j];
    const std::size_t end = j + 1 == n ? ref.size() : (j + 1) * cfg.frame_shift;
    for (std::size_t i = j * cfg.frame_shift; i < end; ++i) {
      sig[c] += ref[i] * ref[i];
      const double e = ref[i] - deg[i];
      noise[c] += e * e;
    }
  }
  SplitMetrics m;
  if (frames[0]) {
    m.snr_v = ratio_db(sig[0], noise[0], cap_db);
    m.lsd_v = lsd_sum[0] / static_cast<double>(frames[0]);
  }
  if (frames[1]) {
    m.snr_u = ratio_db(sig[1], noise[1], cap_db);
    m.lsd_u = lsd_sum[1] / static_cast<double>(frames[1]);
  }
  return m;
}

double accuracy(const QuantizedWaveform& pred, const QuantizedWaveform& target,
                std::span<const std::uint8_t> mask) {
  if (pred.size() != target.size() || mask.size() != pred.size())
    throw ParameterError("accuracy: lengths differ");
  std::int64_t hit = 0, total = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!mask[i]) continue;
    ++total;
    hit += pred[i] == target[i];
  }
  if (total == 0) throw ParameterError("accuracy: empty mask");
  return 100.0 * static_cast<double>(hit) / static_cast<double>(total);
}

double accuracy(const QuantizedWaveform& pred, const QuantizedWaveform& target) {
  const std::vector<std::uint8_t> mask(pred.size(), 1);
  return accuracy(pred, target, mask);
}

Waveform reconstruct_wideband(const Waveform& narrowband, const QuantizedWaveform& generated,
                              Strategy strategy, double hf_gain) {
  if (narrowband.sample_rate() != kNarrowbandRate)
    throw ParameterError("reconstruct_wideband: narrowband must be 8 kHz");
  if (generated.sample_rate() != kWidebandRate)
    throw ParameterError("reconstruct_wideband: generated waveform must be 16 kHz");
  const std::size_t full = 2 * narrowband.size();
  if (generated.size() != full && generated.size() + 1 != full)
    throw ParameterError("reconstruct_wideband: generated length " +
                         std::to_string(generated.size()) + " does not match narrowband length " +
                         std::to_string(narrowband.size()));
  if (strategy == Strategy::HighFrequency && !(hf_gain > 0.0))
    throw ParameterError("reconstruct_wideband: hf_gain must be positive");
  std::vector<double> hf = mulaw_decode(generated).vec();
  if (strategy == Strategy::HighFrequency)
    for (auto& v : hf) v /= hf_gain;
  hf = filter(hf, hf_highpass());
  std::vector<double> out = upsample2(narrowband).vec();
  out.resize(generated.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += hf[i];
  return Waveform(std::move(out), kWidebandRate);
}

}  // namespace bwe
