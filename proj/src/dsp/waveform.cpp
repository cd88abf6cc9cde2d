#include "bwe/dsp/waveform.hpp"

#include <algorithm>
#include <cmath>

#include "bwe/error.hpp"

namespace bwe {

Waveform::Waveform(std::vector<double> samples, int sample_rate_hz)
    : samples_(std::move(samples)), rate_(sample_rate_hz) {
  if (rate_ <= 0) throw ParameterError("sample rate must be positive");
  for (double& s : samples_) {
    if (std::isnan(s)) throw NumericError("NaN sample in waveform");
    s = std::clamp(s, -1.0, 1.0);
  }
}

Waveform Waveform::zeros(std::size_t n, int sample_rate_hz) {
  return Waveform(std::vector<double>(n, 0.0), sample_rate_hz);
}

QuantizedWaveform::QuantizedWaveform(std::vector<std::uint8_t> levels,
                                     int sample_rate_hz)
    : levels_(std::move(levels)), rate_(sample_rate_hz) {
  if (rate_ <= 0) throw ParameterError("sample rate must be positive");
}

}  // namespace bwe
