#include "bwe/condition_track.hpp"

namespace bwe {

ConditionTrack ConditionTrack::extended_to(std::size_t n) const {
  ConditionTrack out = *this;
  if (dim == 0 || n_frames() == 0 || n_frames() >= n) return out;
  const std::vector<float> last(frames.end() - static_cast<std::ptrdiff_t>(dim),
                                frames.end());
  while (out.n_frames() < n) out.frames.insert(out.frames.end(), last.begin(), last.end());
  return out;
}

}  // namespace bwe
