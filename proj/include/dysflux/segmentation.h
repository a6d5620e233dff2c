// include/dysflux/segmentation.h
//
// Smoothed re-segmentation and recursive realignment. The non-monotonic 2D
// alignment is folded onto its DTW path to obtain a monotonic alignment,
// from which word boundaries are read off the reference axis. Each higher
// order re-decodes every word span on its own and realigns it against that
// word's phonemes only.

#ifndef DYSFLUX_SEGMENTATION_H_
#define DYSFLUX_SEGMENTATION_H_

#include <string>
#include <vector>

#include "dysflux/align2d.h"
#include "dysflux/bigram.h"
#include "dysflux/emission.h"
#include "dysflux/search.h"

namespace dysflux {

struct WordSpan {
  int32_t word = 0;  // index into the reference
  std::string text;
  int32_t start_frame = 0;
  int32_t end_frame = 0;  // exclusive
  double start_s = 0.0;
  double end_s = 0.0;

  Interval interval() const { return {start_s, end_s}; }
  bool operator==(const WordSpan &) const = default;
};

struct WordSegmentation {
  std::vector<WordSpan> entries;  // time-ordered, non-overlapping
  /// Reference words that received no anchored column.
  std::vector<int32_t> missing_words;

  const WordSpan *Find(int32_t word) const;
  bool operator==(const WordSegmentation &) const = default;
};

/// Folds `a` onto `path`. Every column takes the DTW row covering it (the
/// covering row with the highest similarity, then the smaller row) unless
/// it is assigned to a row whose phoneme is less similar than `merge_threshold`
/// to the DTW row's phoneme; such columns keep their row, clamped between
/// the previous column's row and the next DTW-taken row. The result is
/// fully assigned and non-decreasing; `a` is not modified.
Alignment2D SmoothMerge(const Alignment2D &a, const DtwPath &path,
                        double merge_threshold = 0.6);

/// Word spans of a monotonic alignment. A column is anchored when it is
/// not SIL and, if `source` is given, is assigned there too. Each word spans
/// its first to last anchored column; SIL and unanchored columns inside
/// that range are absorbed, those outside are left as gaps.
WordSegmentation ExtractWordBoundaries(const Alignment2D &m,
                                       const Alignment2D *source = nullptr);

struct UrfaConfig {
  SearchConfig search;
  Align2dConfig align;
  double merge_threshold = 0.6;
  int32_t max_order = 3;

  void Validate() const;
};

struct OrderState {
  int32_t order = 0;
  AlignmentSegments segments;
  Alignment2D alignment;  // non-monotonic, over the full reference
  DtwPath path;
  Alignment2D merged;     // monotonic
  WordSegmentation words;
};

struct RecursionState {
  std::vector<OrderState> orders;  // orders[k].order == k

  const OrderState &Final() const { return orders.back(); }
};

/// Order 0 decodes and aligns the whole utterance. Order k+1 re-decodes
/// each order-k word span and aligns it against that word alone; spans that
/// produce no anchored column keep their order-k result. Gaps between spans
/// keep their order-k segments and stay unassigned.
RecursionState UrfaIterate(const EmissionInput &e, const ReferenceText &ref,
                           const PhonemeInventory &inv, const BigramLM &lm,
                           const UrfaConfig &cfg);

}  // namespace dysflux

#endif  // DYSFLUX_SEGMENTATION_H_
