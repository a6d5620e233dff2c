// include/dysflux/detection.h
//
// Template matching over a non-monotonic 2D alignment and its DTW path,
// producing typed, time-stamped disfluency events at phoneme and word
// level. Word-level detection combines the word-axis projection of the 2D
// grid with a text refresher that compares an ASR hypothesis against it.

#ifndef DYSFLUX_DETECTION_H_
#define DYSFLUX_DETECTION_H_

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dysflux/align2d.h"

namespace dysflux {

enum class EventKind { kMissing, kRepetition, kInsertion, kReplacement, kIrregularPause };
enum class EventLevel { kPhoneme, kWord };

std::string_view ToString(EventKind k);
std::string_view ToString(EventLevel l);
/// Inverse of ToString; throws DataError for unknown names.
EventKind ParseEventKind(std::string_view s);
EventLevel ParseEventLevel(std::string_view s);

struct Cell {
  int32_t row = 0;
  int32_t col = 0;
  double similarity = 0.0;
  bool operator==(const Cell &) const = default;
};

struct DisfluencyEvent {
  EventLevel level = EventLevel::kPhoneme;
  EventKind kind = EventKind::kMissing;
  /// Reference row (phoneme level) or word index (word level).
  std::optional<int32_t> target;
  std::string target_label;
  Interval interval;
  std::vector<Cell> evidence;
  /// "template" or "text_refresh".
  std::string source = "template";

  /// Sum of sim over evidence cells for Repetition, of 1 - sim otherwise.
  double EvidenceMass() const;
};

struct AsrWord {
  std::string word;
  double start_s = 0.0;
  double end_s = 0.0;
};

struct AsrHypothesis {
  std::vector<AsrWord> words;  // time-ordered, non-overlapping
};

struct DetectConfig {
  double match_threshold = 0.6;
  double pause_min_s = 0.25;
  /// Width of the interval reported for a missing phoneme, centred on the
  /// point where it should have been.
  double missing_window_s = 0.1;

  void Validate() const;
};

/// Phoneme-level events, sorted by start time, kind, then target. At most
/// one of Missing/Replacement per row; Repetition suppresses Insertion for
/// the same row and over the same columns.
std::vector<DisfluencyEvent> DetectPhoneme(const Alignment2D &a, const DtwPath &path,
                                           const DetectConfig &cfg = {});

struct RefreshedWord {
  std::string word;
  double start_s = 0.0;
  double end_s = 0.0;
  /// "", "insertion" or "deletion".
  std::string tag;
};

struct TextRefreshResult {
  std::vector<DisfluencyEvent> events;
  std::vector<RefreshedWord> words;
  /// Hypothesis words with insertions as "[B AH]" and deletions as "(word)".
  std::string transcript;
  bool empty_hypothesis = false;
};

/// Word Insertion for every maximal run of unassigned non-SIL columns whose
/// nearest assigned columns belong to different words (or the utterance
/// edge). Word Missing for every hypothesis word, aligned to a reference
/// word, whose time span holds no column assigned to that word.
TextRefreshResult TextRefresh(const Alignment2D &a, const AsrHypothesis &hyp,
                              const DetectConfig &cfg = {});

struct WordDetection {
  std::vector<DisfluencyEvent> events;           // resolved
  std::vector<DisfluencyEvent> template_events;  // raw grid templates
  TextRefreshResult refresh;
};

/// Word-level Repetition and Replacement from the word-axis projection of
/// `a` (durations and SIL ignored), Insertion and Missing from TextRefresh.
/// Conflicting events about the same word, or overlapping targetless ones,
/// keep the one with the larger evidence mass (the grid template on ties).
WordDetection DetectWord(const Alignment2D &m, const Alignment2D &a,
                         const AsrHypothesis *hyp, const DetectConfig &cfg = {});

/// Word-level Levenshtein alignment: pairs (ref index, hyp index), with -1
/// for the side absent in a deletion or insertion. Case-insensitive.
std::vector<std::pair<int32_t, int32_t>> AlignWords(
    const std::vector<std::string> &ref, const std::vector<std::string> &hyp);

}  // namespace dysflux

#endif  // DYSFLUX_DETECTION_H_
