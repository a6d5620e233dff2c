// include/dysflux/metrics.h
//
// Evaluation measures: phoneme and word error rates (plain and
// duration-weighted), frame-level F1, interval IoU, and the IoU-based
// matching score used for both word segmentation and event detection.

#ifndef DYSFLUX_METRICS_H_
#define DYSFLUX_METRICS_H_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dysflux/alignment.h"
#include "dysflux/common.h"

namespace dysflux {

struct EditOps {
  int64_t substitutions = 0;
  int64_t deletions = 0;
  int64_t insertions = 0;
  int64_t matches = 0;

  struct Durations {
    double substitutions = 0.0;
    double deletions = 0.0;
    double insertions = 0.0;
  };
  /// Present only for duration-weighted alignments.
  std::optional<Durations> durations;

  int64_t errors() const { return substitutions + deletions + insertions; }
};

/// Levenshtein alignment of two label sequences. The backtrace prefers
/// match, then substitution, deletion, insertion.
EditOps EditDistance(const std::vector<PhoneId> &ref, const std::vector<PhoneId> &hyp);
EditOps EditDistance(const std::vector<std::string> &ref,
                     const std::vector<std::string> &hyp);

/// (S + D + I) / |ref|; throws DataError for an empty reference.
double Per(const std::vector<PhoneId> &ref, const std::vector<PhoneId> &hyp);

/// Word error rate against a (possibly disfluent) human-labelled target.
double Iwer(const std::vector<std::string> &target, const std::vector<std::string> &hyp);

enum class SubstitutionCost {
  kMax,      // max(dur_ref, dur_hyp)
  kMeanSum,  // (dur_ref + dur_hyp) / 2
};

/// Duration-weighted edit alignment of two segment sequences: deletion
/// costs the reference duration, insertion the hypothesis duration.
EditOps DurationEditDistance(const AlignmentSegments &ref, const AlignmentSegments &hyp,
                             SubstitutionCost sub = SubstitutionCost::kMax,
                             double *total_cost = nullptr);

/// Minimal weighted edit cost divided by the total reference duration;
/// throws DataError when that duration is zero.
double Dper(const AlignmentSegments &ref, const AlignmentSegments &hyp,
            SubstitutionCost sub = SubstitutionCost::kMax);

struct FrameF1Score {
  double micro = 0.0;  // pooled decisions; equals accuracy for one label per frame
  double macro = 0.0;  // mean per-class F1 over classes present in the reference
};

/// Throws DataError on a length mismatch or empty input.
FrameF1Score FrameF1(const std::vector<PhoneId> &ref, const std::vector<PhoneId> &hyp);

/// |a ∩ b| / |a ∪ b|; 0 when disjoint or when the union is empty.
double Iou(const Interval &a, const Interval &b);

inline constexpr double kMatchIou = 0.5;

struct MatchItem {
  std::string key;  // only items with equal keys can match
  Interval interval;
};

struct MatchResult {
  int64_t true_positives = 0;
  int64_t false_positives = 0;
  int64_t false_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<std::pair<int32_t, int32_t>> pairs;  // (pred index, gt index)
};

/// One-to-one matching of predictions to ground truth. Same-key pairs with
/// IoU > 0.5 are taken greedily by descending IoU, then augmented to a
/// maximum matching. F1 is 1 when both sides are empty.
MatchResult MatchingScore(const std::vector<MatchItem> &pred,
                          const std::vector<MatchItem> &gt);

/// Precision/recall/F1 from counts, with the both-empty convention.
void FillRates(MatchResult &r);

}  // namespace dysflux

#endif  // DYSFLUX_METRICS_H_
