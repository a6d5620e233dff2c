// include/dysflux/alignment.h
//
// Run-length phoneme alignment with frame boundaries.

#ifndef DYSFLUX_ALIGNMENT_H_
#define DYSFLUX_ALIGNMENT_H_

#include <cstdint>
#include <vector>

#include "dysflux/common.h"

namespace dysflux {

struct Segment {
  PhoneId phone = 0;
  int32_t start = 0;  // first frame
  int32_t end = 0;    // one past the last frame

  int32_t frames() const { return end - start; }
  bool operator==(const Segment &) const = default;
};

/// Canonical form: segments tile [0, num_frames()) contiguously and adjacent
/// segments carry different phonemes. Use Canonicalize() or FromFrames() to
/// build one; CheckCanonical() verifies the invariant.
struct AlignmentSegments {
  std::vector<Segment> segments;
  double frame_duration = 0.02;

  int32_t num_frames() const { return segments.empty() ? 0 : segments.back().end; }
  std::size_t size() const { return segments.size(); }
  bool empty() const { return segments.empty(); }

  Interval TimeSpan(std::size_t i) const {
    return {segments[i].start * frame_duration, segments[i].end * frame_duration};
  }
  double Duration(std::size_t i) const { return segments[i].frames() * frame_duration; }

  std::vector<PhoneId> Labels() const;
  /// One phoneme per frame.
  std::vector<PhoneId> ToFrames() const;

  static AlignmentSegments FromFrames(const std::vector<PhoneId> &frames,
                                      double frame_duration,
                                      int32_t first_frame = 0);

  bool operator==(const AlignmentSegments &) const = default;
};

/// Merges adjacent equal-label segments and drops empty ones. Segment start
/// offsets are preserved (the first segment need not start at zero, which
/// is how slices of an utterance are represented).
AlignmentSegments Canonicalize(const AlignmentSegments &a);

/// Throws DataError unless the alignment is contiguous, starts at
/// `first_frame`, and has no adjacent duplicate labels.
void CheckCanonical(const AlignmentSegments &a, int32_t first_frame = 0);

}  // namespace dysflux

#endif  // DYSFLUX_ALIGNMENT_H_
