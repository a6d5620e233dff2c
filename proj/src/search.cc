// src/search.cc

#include "dysflux/search.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dysflux {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double ClampedLog(double p) {
  return std::log(std::clamp(p, kBoundaryEpsilon, 1.0 - kBoundaryEpsilon));
}

// Score added when moving from `prev` at frame t-1 to `next` at frame t.
// `log_switch` and `log_stay` are the precomputed boundary logs for frame t.
inline double TransitionScore(const BigramLM &lm, const SearchConfig &cfg,
                              PhoneId prev, PhoneId next, double log_switch,
                              double log_stay) {
  if (prev == next) return cfg.boundary_weight * log_stay;
  return cfg.lm_weight * lm.LogProb(prev, next) + cfg.boundary_weight * log_switch;
}

void CheckShapes(const EmissionInput &e, const BigramLM &lm) {
  if (e.num_frames() == 0) throw DataError("emission has no frames");
  if (lm.size() != e.num_phonemes()) {
    throw DataError("emission has " + std::to_string(e.num_phonemes()) +
                    " phoneme columns but the LM has " + std::to_string(lm.size()));
  }
  if (e.boundary_probs.size() != e.num_frames()) {
    throw DataError("boundary probability count does not match frame count");
  }
}

AlignmentSegments MergeShortSegments(AlignmentSegments a, const EmissionInput &e,
                                     int32_t min_frames, int32_t offset) {
  while (a.segments.size() > 1) {
    std::size_t victim = a.segments.size();
    for (std::size_t i = 0; i != a.segments.size(); ++i) {
      if (a.segments[i].frames() < min_frames &&
          (victim == a.segments.size() ||
           a.segments[i].frames() < a.segments[victim].frames())) {
        victim = i;
      }
    }
    if (victim == a.segments.size()) break;

    const Segment &s = a.segments[victim];
    auto emission_mass = [&](PhoneId p) {
      double sum = 0.0;
      for (int32_t f = s.start; f != s.end; ++f) {
        sum += e.log_posteriors(f - offset, p);
      }
      return sum;
    };
    PhoneId target;
    if (victim == 0) {
      target = a.segments[1].phone;
    } else if (victim + 1 == a.segments.size()) {
      target = a.segments[victim - 1].phone;
    } else {
      const PhoneId left = a.segments[victim - 1].phone;
      const PhoneId right = a.segments[victim + 1].phone;
      target = emission_mass(right) > emission_mass(left) ? right : left;
    }
    a.segments[victim].phone = target;
    a = Canonicalize(a);
  }
  return a;
}

}  // namespace

void SearchConfig::Validate() const {
  if (!(lm_weight >= 0.0)) throw DataError("lm_weight must be nonnegative");
  if (!(boundary_weight >= 0.0)) throw DataError("boundary_weight must be nonnegative");
  if (min_segment_frames < 1) throw DataError("min_segment_frames must be >= 1");
  if (beam_width < 0) throw DataError("beam_width must be >= 1, or 0 for unlimited");
}

AlignmentSegments ViterbiDecode(const EmissionInput &e, const BigramLM &lm,
                                const SearchConfig &cfg, SearchStats *stats) {
  cfg.Validate();
  CheckShapes(e, lm);
  const std::size_t num_frames = e.num_frames();
  const std::size_t n = e.num_phonemes();

  std::vector<double> prev_score(n), score(n);
  Matrix<int32_t> backpointer(num_frames, n, -1);
  std::vector<PhoneId> active(n);
  std::iota(active.begin(), active.end(), 0);
  uint64_t transitions = 0;

  auto check_frame = [&](std::size_t t) {
    auto row = e.log_posteriors.row(t);
    if (std::all_of(row.begin(), row.end(), [](double x) { return x == kNegInf; })) {
      throw DataError("frame " + std::to_string(t) + " has no finite log-posterior");
    }
  };

  check_frame(0);
  {
    auto row = e.log_posteriors.row(0);
    std::copy(row.begin(), row.end(), prev_score.begin());
  }

  for (std::size_t t = 1; t != num_frames; ++t) {
    check_frame(t);
    const double log_switch = ClampedLog(e.boundary_probs[t]);
    const double log_stay = ClampedLog(1.0 - e.boundary_probs[t]);

    if (cfg.beam_width > 0 && static_cast<std::size_t>(cfg.beam_width) < n) {
      std::iota(active.begin(), active.end(), 0);
      std::stable_sort(active.begin(), active.end(), [&](PhoneId a, PhoneId b) {
        return prev_score[a] > prev_score[b];
      });
      active.resize(static_cast<std::size_t>(cfg.beam_width));
      std::sort(active.begin(), active.end());
    }

    auto emit = e.log_posteriors.row(t);
    for (std::size_t j = 0; j != n; ++j) {
      const PhoneId next = static_cast<PhoneId>(j);
      double best = kNegInf;
      int32_t arg = -1;
      for (PhoneId prev : active) {
        ++transitions;
        const double cand = prev_score[prev] +
                            TransitionScore(lm, cfg, prev, next, log_switch, log_stay);
        // Strictly better wins; on a tie staying put beats switching and
        // otherwise the earlier (lower) index already held is kept.
        if (cand > best || (cand == best && arg != -1 && prev == next)) {
          best = cand;
          arg = prev;
        }
      }
      score[j] = best + emit[j];
      backpointer(t, j) = arg;
    }
    std::swap(score, prev_score);
  }

  PhoneId last = 0;
  for (std::size_t j = 1; j != n; ++j) {
    if (prev_score[j] > prev_score[last]) last = static_cast<PhoneId>(j);
  }
  if (prev_score[last] == kNegInf) {
    throw DataError("no finite-score path through the emission");
  }

  std::vector<PhoneId> frames(num_frames);
  frames[num_frames - 1] = last;
  for (std::size_t t = num_frames - 1; t > 0; --t) {
    frames[t - 1] = backpointer(t, frames[t]);
  }

  if (stats != nullptr) stats->transitions = transitions;
  auto out = AlignmentSegments::FromFrames(frames, e.frame_duration);
  if (cfg.min_segment_frames > 1) {
    out = MergeShortSegments(std::move(out), e, cfg.min_segment_frames, 0);
  }
  return out;
}

AlignmentSegments DecodeSegment(const EmissionInput &e, int32_t start,
                                int32_t end, const BigramLM &lm,
                                const SearchConfig &cfg) {
  if (start < 0 || end <= start || static_cast<std::size_t>(end) > e.num_frames()) {
    throw DataError("invalid decode range [" + std::to_string(start) + ", " +
                    std::to_string(end) + ")");
  }
  AlignmentSegments local = ViterbiDecode(e.Slice(start, end), lm, cfg);
  for (auto &s : local.segments) {
    s.start += start;
    s.end += start;
  }
  return local;
}

double PathScore(const EmissionInput &e, const BigramLM &lm,
                 const SearchConfig &cfg, const std::vector<PhoneId> &frames) {
  CheckShapes(e, lm);
  if (frames.size() != e.num_frames()) {
    throw DataError("labeling length does not match the frame count");
  }
  double s = e.log_posteriors(0, frames[0]);
  for (std::size_t t = 1; t != frames.size(); ++t) {
    const double log_switch = ClampedLog(e.boundary_probs[t]);
    const double log_stay = ClampedLog(1.0 - e.boundary_probs[t]);
    s = s + TransitionScore(lm, cfg, frames[t - 1], frames[t], log_switch, log_stay);
    s = s + e.log_posteriors(t, frames[t]);
  }
  return s;
}

ComplexityProbe SearchComplexityProbe(int64_t frames, int64_t phonemes) {
  if (frames < 1 || phonemes < 1) throw DataError("probe needs t, N >= 1");
  EmissionInput e;
  e.log_posteriors = Matrix<double>(static_cast<std::size_t>(frames),
                                    static_cast<std::size_t>(phonemes),
                                    -std::log(static_cast<double>(phonemes)));
  e.boundary_probs.assign(static_cast<std::size_t>(frames), 0.5);
  SearchStats stats;
  ViterbiDecode(e, BigramLM::Uniform(static_cast<std::size_t>(phonemes)),
                SearchConfig{}, &stats);
  ComplexityProbe probe;
  probe.frames = frames;
  probe.phonemes = phonemes;
  probe.transitions = stats.transitions;
  probe.expected = static_cast<uint64_t>(frames - 1) *
                   static_cast<uint64_t>(phonemes) * static_cast<uint64_t>(phonemes);
  return probe;
}

}  // namespace dysflux
