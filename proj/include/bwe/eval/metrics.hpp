#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bwe/dsp/waveform.hpp"
#include "bwe/models/config.hpp"

namespace bwe {

struct LsdConfig {
  std::size_t frame_len = 512;  // 32 ms at 16 kHz, Hann
  std::size_t frame_shift = 256;
  double epsilon = 1e-10;
};

inline constexpr double kSnrCapDb = 120.0;

// Global SNR 10 log10(sum ref^2 / sum (ref - deg)^2), clamped to
// [-cap, cap]; an exact match gives +cap.
double snr_db(const Waveform& reference, const Waveform& degraded, double cap_db = kSnrCapDb);
double snr_db(std::span<const double> reference, std::span<const double> degraded,
              double cap_db = kSnrCapDb);

// Per-frame RMS difference of 20 log10(|S| + eps) over all bins.
std::vector<double> lsd_per_frame(const Waveform& reference, const Waveform& degraded,
                                  const LsdConfig& cfg = {});
double lsd_db(const Waveform& reference, const Waveform& degraded, const LsdConfig& cfg = {});
// Same, restricted to bins with centre frequency in [lo_hz, hi_hz].
double band_lsd_db(const Waveform& reference, const Waveform& degraded, double lo_hz,
                   double hi_hz, const LsdConfig& cfg = {});

// Voiced/unvoiced variants. `voiced` has one flag per LSD frame. For SNR
// frame j owns samples [j * shift, (j + 1) * shift) and the last frame
// also owns the tail, so every sample is counted once. A class with no
// frames yields nullopt.
struct SplitMetrics {
  std::optional<double> snr_v, snr_u, lsd_v, lsd_u;
};
SplitMetrics split_metrics(const Waveform& reference, const Waveform& degraded,
                           const std::vector<bool>& voiced, const LsdConfig& cfg = {},
                           double cap_db = kSnrCapDb);

// Percentage of unmasked positions where the levels agree.
double accuracy(const QuantizedWaveform& predicted, const QuantizedWaveform& target,
                std::span<const std::uint8_t> mask);
double accuracy(const QuantizedWaveform& predicted, const QuantizedWaveform& target);

// Generated 16 kHz levels back to a wideband waveform: decode, undo the
// HF gain (HF strategy only), highpass at 4 kHz and add to the upsampled
// narrowband. `generated` may be one sample shorter than 2 x narrowband
// when the original wideband length was odd.
Waveform reconstruct_wideband(const Waveform& narrowband, const QuantizedWaveform& generated,
                              Strategy strategy, double hf_gain);

}  // namespace bwe
