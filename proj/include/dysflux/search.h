// include/dysflux/search.h
//
// Boundary-aware Viterbi search for the unconstrained (non-monotonic)
// phoneme alignment. The reference text is never consulted.
//
// A labeling y_0..y_{t-1} scores
//
//   sum_t logP(y_t | t)
//   + sum_{t>0, y_t != y_{t-1}} [ lm_weight * logP_lm(y_t | y_{t-1})
//                                  + boundary_weight * log b_t ]
//   + sum_{t>0, y_t == y_{t-1}}   boundary_weight * log(1 - b_t)
//
// with b_t clamped to [1e-6, 1 - 1e-6]. The search costs O(t N^2).

#ifndef DYSFLUX_SEARCH_H_
#define DYSFLUX_SEARCH_H_

#include <cstdint>
#include <vector>

#include "dysflux/alignment.h"
#include "dysflux/bigram.h"
#include "dysflux/emission.h"

namespace dysflux {

inline constexpr double kBoundaryEpsilon = 1e-6;

struct SearchConfig {
  double lm_weight = 0.3;
  double boundary_weight = 1.0;
  /// Segments shorter than this are merged into a neighbour after
  /// decoding. 1 disables the filter.
  int32_t min_segment_frames = 1;
  /// Number of predecessor states kept per frame; 0 means unlimited.
  int32_t beam_width = 0;

  /// Throws DataError for negative weights or non-positive sizes.
  void Validate() const;
};

struct SearchStats {
  /// Number of (previous, current) state pairs scored.
  uint64_t transitions = 0;
};

/// Maximum-score labeling of every frame, run-length encoded.
/// Ties: the final frame prefers the lowest phoneme index; a predecessor tie
/// prefers staying on the current phoneme, then the lowest index.
/// Throws DataError on a shape mismatch with the LM or a frame whose
/// entries are all -inf.
AlignmentSegments ViterbiDecode(const EmissionInput &e, const BigramLM &lm,
                                const SearchConfig &cfg,
                                SearchStats *stats = nullptr);

/// ViterbiDecode over frames [start, end); segment offsets stay absolute.
AlignmentSegments DecodeSegment(const EmissionInput &e, int32_t start,
                                int32_t end, const BigramLM &lm,
                                const SearchConfig &cfg);

/// Score of a frame labeling under the objective above, accumulated in
/// frame order.
double PathScore(const EmissionInput &e, const BigramLM &lm,
                 const SearchConfig &cfg, const std::vector<PhoneId> &frames);

struct ComplexityProbe {
  int64_t frames = 0;
  int64_t phonemes = 0;
  uint64_t transitions = 0;
  /// (t - 1) * N^2, the count for an unlimited beam.
  uint64_t expected = 0;
};

/// Runs a full-beam decode on a synthetic t x N input and reports the
/// number of scored transitions.
ComplexityProbe SearchComplexityProbe(int64_t frames, int64_t phonemes);

}  // namespace dysflux

#endif  // DYSFLUX_SEARCH_H_
