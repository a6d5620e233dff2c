// include/dysflux/pipeline.h
//
// Configuration, per-utterance processing and corpus evaluation shared by
// the command-line tool and the acceptance checks.

#ifndef DYSFLUX_PIPELINE_H_
#define DYSFLUX_PIPELINE_H_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dysflux/detection.h"
#include "dysflux/io.h"
#include "dysflux/metrics.h"
#include "dysflux/segmentation.h"
#include "dysflux/simulator.h"

namespace dysflux {

struct PipelineConfig {
  /// Empty paths select the shipped inventory and lexicon, and a uniform LM.
  std::string inventory_path;
  std::string lexicon_path;
  std::string lm_path;         // bigram JSON
  std::string lm_corpus_path;  // one phoneme sequence per line, estimated with add-k
  double lm_add_k = 1.0;
  UrfaConfig urfa;
  DetectConfig detect;
  /// Order whose alignment feeds phoneme and word detection; -1 selects the
  /// highest order computed.
  int32_t detect_order = 0;
  int32_t workers = 1;
  uint64_t seed = 0;
  /// Used by `simulate`; its seed is overwritten with `seed`.
  CorpusConfig corpus;

  /// Relative paths are resolved against `base_dir`. Unknown keys are
  /// rejected.
  static PipelineConfig FromJson(const Json &j, const std::string &base_dir = "");
  static PipelineConfig FromFile(const std::string &path);
  Json ToJson() const;
  /// Thresholds in [0, 1], max_order >= 0, workers >= 1.
  void Validate() const;
};

struct Resources {
  PhonemeInventory inventory;
  Lexicon lexicon;
  BigramLM lm;

  static Resources Load(const PipelineConfig &cfg);
};

struct UtteranceResult {
  RecursionState state;
  int32_t detect_order = 0;
  std::vector<DisfluencyEvent> phoneme_events;
  /// Present only when a hypothesis was supplied.
  std::optional<WordDetection> word;
};

UtteranceResult ProcessUtterance(const EmissionInput &e, const ReferenceText &ref,
                                 const AsrHypothesis *hyp, const Resources &res,
                                 const PipelineConfig &cfg);

/// Ground truth of one utterance as needed for scoring.
struct TruthRecord {
  std::string id;
  AlignmentSegments alignment;  // what was actually produced
  std::vector<DisfluencyEvent> events;
  std::vector<std::optional<Interval>> word_spans;  // per reference word
  std::vector<std::string> transcript;              // imperfect transcript
};

struct PredictionRecord {
  std::string id;
  AlignmentSegments alignment;
  std::vector<DisfluencyEvent> phoneme_events;
  std::vector<DisfluencyEvent> word_events;
  std::vector<WordSegmentation> words_by_order;
  std::optional<std::vector<std::string>> transcript;
};

struct UtteranceScores {
  std::string id;
  double per = 0.0;
  double dper = 0.0;
  FrameF1Score frame_f1;
  std::optional<double> iwer;
  MatchResult events;
  std::vector<MatchResult> segmentation;  // per order
};

struct EvaluationReport {
  std::vector<UtteranceScores> utterances;
  std::vector<std::string> skipped;
  // Corpus-level: edit counts and durations pooled, frames concatenated,
  // event and segment matching over all utterances at once.
  double per = 0.0;
  double dper = 0.0;
  FrameF1Score frame_f1;
  std::optional<double> iwer;
  MatchResult phoneme_events;
  std::vector<std::pair<std::string, MatchResult>> phoneme_events_by_kind;
  MatchResult word_events;
  std::vector<MatchResult> segmentation;  // per order
};

TruthRecord TruthFromSimulation(const SimulatedUtterance &u);
PredictionRecord PredictionFromResult(const std::string &id, const UtteranceResult &r);

/// Scores predictions against ground truth, pairing by id. Truth records
/// without a prediction, and predictions without truth, are listed as
/// skipped.
EvaluationReport Evaluate(const std::vector<TruthRecord> &truth,
                          const std::vector<PredictionRecord> &pred);

Json ToJson(const EvaluationReport &r);
/// "order,true_positives,false_positives,false_negatives,precision,recall,f1".
std::string SegmentationCsv(const EvaluationReport &r);
/// "kind,true_positives,..." with one row per phoneme event kind plus "all".
std::string EventCsv(const EvaluationReport &r);

// Documents exchanged between subcommands.
Json TruthDocument(const SimulatedUtterance &u, const PhonemeInventory &inv);
TruthRecord TruthFromDocument(const Json &j, const PhonemeInventory &inv);
Json EventsDocument(const std::string &id, const UtteranceResult &r);
Json WordsDocument(const std::string &id, const RecursionState &s);
PredictionRecord PredictionFromDocuments(const Json &alignment, const Json &events,
                                         const PhonemeInventory &inv);

/// Calls fn(i) for i in [0, n) on `workers` threads. fn must not throw.
void ParallelFor(std::size_t n, int32_t workers, const std::function<void(std::size_t)> &fn);

}  // namespace dysflux

#endif  // DYSFLUX_PIPELINE_H_
