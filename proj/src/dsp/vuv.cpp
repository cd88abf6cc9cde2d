#include "bwe/dsp/vuv.hpp"

#include <algorithm>
#include <cmath>

#include "bwe/dsp/spectral.hpp"

namespace bwe {

std::vector<bool> frame_vuv(const Waveform& w, std::size_t frame_len,
                            std::size_t frame_shift, const VuvParams& p) {
  const std::size_t n = frame_count(w.size(), frame_len, frame_shift);
  std::vector<double> energy_db(n);
  std::vector<double> zcr(n);
  for (std::size_t f = 0; f < n; ++f) {
    const auto frame = w.samples().subspan(f * frame_shift, frame_len);
    double e = 0.0;
    std::size_t crossings = 0;
    for (std::size_t i = 0; i < frame.size(); ++i) {
      e += frame[i] * frame[i];
      if (i > 0 && (frame[i] >= 0.0) != (frame[i - 1] >= 0.0)) ++crossings;
    }
    energy_db[f] = 10.0 * std::log10(e / frame.size() + 1e-12);
    zcr[f] = frame.size() > 1 ? static_cast<double>(crossings) / (frame.size() - 1) : 0.0;
  }
  std::vector<bool> voiced(n, false);
  if (n == 0) return voiced;

  auto sorted = energy_db;
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(p.percentile * static_cast<double>(n)));
  const double low = sorted[rank == 0 ? 0 : rank - 1];
  // Percentile + margin, capped at max - margin so that stationary signals
  // with no quiet frames are not rejected wholesale.
  const double threshold = std::min(low + p.margin_db, sorted.back() - p.margin_db);
  for (std::size_t f = 0; f < n; ++f)
    voiced[f] = energy_db[f] > threshold && energy_db[f] > p.silence_floor_db &&
                zcr[f] < p.zcr_max;
  return voiced;
}

}  // namespace bwe
