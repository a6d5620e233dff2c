// src/alignment.cc

#include "dysflux/alignment.h"

#include <string>

namespace dysflux {

std::vector<PhoneId> AlignmentSegments::Labels() const {
  std::vector<PhoneId> out;
  out.reserve(segments.size());
  for (const auto &s : segments) out.push_back(s.phone);
  return out;
}

std::vector<PhoneId> AlignmentSegments::ToFrames() const {
  std::vector<PhoneId> out;
  for (const auto &s : segments) out.insert(out.end(), s.frames(), s.phone);
  return out;
}

AlignmentSegments AlignmentSegments::FromFrames(const std::vector<PhoneId> &frames,
                                                double frame_duration,
                                                int32_t first_frame) {
  AlignmentSegments a;
  a.frame_duration = frame_duration;
  for (std::size_t t = 0; t != frames.size(); ++t) {
    const int32_t f = first_frame + static_cast<int32_t>(t);
    if (a.segments.empty() || a.segments.back().phone != frames[t]) {
      a.segments.push_back({frames[t], f, f + 1});
    } else {
      a.segments.back().end = f + 1;
    }
  }
  return a;
}

AlignmentSegments Canonicalize(const AlignmentSegments &a) {
  AlignmentSegments out;
  out.frame_duration = a.frame_duration;
  for (const auto &s : a.segments) {
    if (s.end <= s.start) continue;
    if (!out.segments.empty() && out.segments.back().phone == s.phone &&
        out.segments.back().end == s.start) {
      out.segments.back().end = s.end;
    } else {
      out.segments.push_back(s);
    }
  }
  return out;
}

void CheckCanonical(const AlignmentSegments &a, int32_t first_frame) {
  int32_t expected = first_frame;
  for (std::size_t i = 0; i != a.segments.size(); ++i) {
    const auto &s = a.segments[i];
    if (s.start != expected) {
      throw DataError("segment " + std::to_string(i) + " starts at frame " +
                      std::to_string(s.start) + ", expected " +
                      std::to_string(expected));
    }
    if (s.end <= s.start) {
      throw DataError("segment " + std::to_string(i) + " is empty");
    }
    if (i > 0 && a.segments[i - 1].phone == s.phone) {
      throw DataError("segments " + std::to_string(i - 1) + " and " +
                      std::to_string(i) + " share a label");
    }
    expected = s.end;
  }
}

}  // namespace dysflux
