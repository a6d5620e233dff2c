// include/dysflux/simulator.h
//
// Disfluency injection into clean alignments and synthetic emissions with
// ground-truth labels. Injection works on alignments rather than audio:
// repetitions, prolongations, blocks and phoneme deletions are applied to
// segments, and a peaked, noisy emission is drawn from the result.

#ifndef DYSFLUX_SIMULATOR_H_
#define DYSFLUX_SIMULATOR_H_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dysflux/alignment.h"
#include "dysflux/detection.h"
#include "dysflux/emission.h"
#include "dysflux/reference.h"
#include "dysflux/rng.h"

namespace dysflux {

struct DurationRange {
  double min_s = 0.0;
  double max_s = 0.0;
};

struct InjectionSpec {
  double repetition_rate = 0.0;
  double prolongation_rate = 0.0;
  double block_rate = 0.0;
  double missing_rate = 0.0;

  DurationRange prolongation{0.1, 0.5};
  DurationRange block{0.15, 0.6};
  /// Silence between a repeated unit and its copy. When the unit starts and
  /// ends with the same phoneme the gap is at least one frame.
  DurationRange repetition_gap{0.0, 0.1};
  /// Number of copies and the number of segments in the repeated unit.
  int32_t repeat_count = 1;
  int32_t repeat_span = 1;
  /// Deleted phonemes must be less similar than this to both neighbours.
  double missing_max_similarity = 0.6;
  /// Width of the ground-truth interval of a deleted phoneme.
  double missing_window_s = 0.1;
  uint64_t seed = 0;

  void Validate() const;
};

/// A clean utterance: segments plus the reference row (or -1 for SIL) and
/// word (or -1 for silence between words) of each segment.
struct TaggedAlignment {
  AlignmentSegments segments;
  std::vector<int32_t> rows;
  std::vector<int32_t> words;
};

enum class InjectionKind { kRepetition, kProlongation, kBlock, kMissing };

struct GroundTruth {
  TaggedAlignment clean;
  TaggedAlignment disfluent;
  /// Detectable events (prolongations are listed separately).
  std::vector<DisfluencyEvent> events;
  std::vector<Interval> prolongations;
  /// Frame ranges of `disfluent` added by injection.
  std::vector<std::pair<int32_t, int32_t>> inserted;
  /// Deleted clean segments, keyed by the disfluent frame where they were.
  std::vector<std::pair<int32_t, Segment>> removed;

  /// Time span of every reference word in the disfluent alignment.
  std::vector<std::optional<Interval>> WordSpans(std::size_t num_words) const;
};

/// Applies at most one injection per eligible segment, trying repetition,
/// prolongation, block, then missing, each with its own draw. Throws
/// DataError for an empty or non-canonical alignment.
GroundTruth Inject(const TaggedAlignment &clean, const InjectionSpec &spec,
                   const PhonemeInventory &inv);

/// Applies exactly one injection of `kind` at clean segment `index`; throws
/// DataError when the segment is not eligible.
GroundTruth InjectAt(const TaggedAlignment &clean, std::size_t index, InjectionKind kind,
                     const InjectionSpec &spec, const PhonemeInventory &inv);

/// Undoes the injection; equals `gt.clean.segments` exactly.
AlignmentSegments Reconstruct(const GroundTruth &gt);

struct EmissionSynthesis {
  double sharpness = 8.0;  // logit of the true label
  double noise = 0.0;      // standard deviation of the logit noise, in units of sharpness
  double boundary_high = 0.9;
  double boundary_low = 0.1;
  uint64_t seed = 0;
};

/// Per frame: log-softmax of sharpness * onehot(label) + noise * sharpness *
/// N(0, 1). Boundary probability is boundary_high at segment starts and
/// boundary_low elsewhere, plus N(0, noise / 2), clamped to [0, 1].
EmissionInput SynthesizeEmission(const AlignmentSegments &segs, const PhonemeInventory &inv,
                                 const EmissionSynthesis &cfg);

struct UtteranceConfig {
  int32_t min_words = 3;
  int32_t max_words = 6;
  DurationRange phone{0.05, 0.15};
  DurationRange edge_silence{0.1, 0.3};
  double pause_rate = 0.3;
  DurationRange pause{0.05, 0.2};
  double frame_duration = 0.02;
};

struct SyntheticUtterance {
  ReferenceText ref;
  TaggedAlignment clean;
};

/// Random sentence from the lexicon with sampled phoneme durations, leading
/// and trailing silence, and short pauses between some words (always when
/// the phonemes on either side are the same).
SyntheticUtterance GenerateUtterance(const Lexicon &lex, const PhonemeInventory &inv,
                                     const UtteranceConfig &cfg, Rng &rng);

struct CorpusConfig {
  int32_t count = 100;
  InjectionSpec injection{.repetition_rate = 0.05,
                          .prolongation_rate = 0.05,
                          .block_rate = 0.03,
                          .missing_rate = 0.05};
  UtteranceConfig utterance;
  EmissionSynthesis emission;
  uint64_t seed = 0;
};

struct SimulatedUtterance {
  std::string id;
  ReferenceText ref;
  GroundTruth truth;
  EmissionInput emission;
  /// Error-free word-level ASR output: every reference word with its
  /// ground-truth span.
  AsrHypothesis hypothesis;
};

/// Utterance `index` of a corpus. Each utterance draws from its own
/// generator seeded with DeriveSeed(cfg.seed, index), so utterances can be
/// produced independently and in any order.
SimulatedUtterance SimulateUtterance(const CorpusConfig &cfg, int32_t index,
                                     const Lexicon &lex, const PhonemeInventory &inv);

}  // namespace dysflux

#endif  // DYSFLUX_SIMULATOR_H_
