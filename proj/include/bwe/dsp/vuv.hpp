#pragma once

#include <cstddef>
#include <vector>

#include "bwe/dsp/waveform.hpp"

namespace bwe {

struct VuvParams {
  double percentile = 0.20;
  double margin_db = 10.0;
  double zcr_max = 0.25;
  // Frames below this mean-square level (dB re full scale) never count as voiced.
  double silence_floor_db = -60.0;
};

// Per-frame voiced flags: log energy above an adaptive threshold and a low
// zero-crossing rate. Frames follow frame_count(len, frame_len, shift).
std::vector<bool> frame_vuv(const Waveform& w, std::size_t frame_len,
                            std::size_t frame_shift, const VuvParams& p = {});

}  // namespace bwe
