#pragma once

#include "bwe/condition_track.hpp"
#include "bwe/dsp/waveform.hpp"

namespace bwe {

struct MfccConfig {
  int sample_rate_hz = kWidebandRate;
  int frame_len_samples = 400;    // 25 ms at 16 kHz
  int frame_shift_samples = 160;  // 10 ms at 16 kHz
  int n_mel_filters = 26;
  int n_cepstra = 13;
  bool include_deltas = true;
  double preemphasis = 0.97;
  double log_floor = 1e-10;

  // Same 25 ms / 10 ms analysis scaled to 8 kHz narrowband input.
  static MfccConfig narrowband();

  int dim() const { return include_deltas ? 3 * n_cepstra : n_cepstra; }
  double window_ms() const { return 1000.0 * frame_len_samples / sample_rate_hz; }
  void validate() const;
};

// Log-mel filterbank + DCT-II cepstra, optionally with delta and
// delta-delta (+-2 frame regression). The returned track's frame shift is
// expressed in 16 kHz model-rate samples regardless of the input rate.
ConditionTrack mfcc(const Waveform& w, const MfccConfig& cfg);

}  // namespace bwe
