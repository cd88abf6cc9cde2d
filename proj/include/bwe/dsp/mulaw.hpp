#pragma once

#include <array>
#include <cstdint>

#include "bwe/dsp/waveform.hpp"

namespace bwe {

inline constexpr int kMulawLevels = 256;
// Level of a zero-amplitude sample; also used for padding.
inline constexpr std::uint8_t kZeroLevel = 128;

// Continuous mu-law (mu = 255) with uniform 256-level quantization of the
// companded value. Not the segmented G.711 table.
std::uint8_t mulaw_encode_sample(double s);
double mulaw_decode_level(std::uint8_t q);

QuantizedWaveform mulaw_encode(const Waveform& w);
Waveform mulaw_decode(const QuantizedWaveform& q);

// Decoded bin centers for all 256 levels.
const std::array<double, kMulawLevels>& mulaw_table();

}  // namespace bwe
