#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bwe {

// Frame-level auxiliary features for the conditional tier. Frame j
// conditions model-rate (16 kHz) samples [j * frame_shift, (j+1) * frame_shift).
struct ConditionTrack {
  std::size_t dim = 0;
  std::uint32_t frame_shift_samples = 0;
  std::vector<float> frames;  // row-major [n_frames x dim]

  std::size_t n_frames() const { return dim == 0 ? 0 : frames.size() / dim; }
  std::span<const float> frame(std::size_t j) const {
    return {frames.data() + j * dim, dim};
  }
  bool empty() const { return frames.empty(); }

  // Copy with the last frame repeated until at least n frames exist.
  ConditionTrack extended_to(std::size_t n) const;

  friend bool operator==(const ConditionTrack&, const ConditionTrack&) = default;
};

}  // namespace bwe
