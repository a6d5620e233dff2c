// include/dysflux/io.h
//
// JSON serialization of alignments, events, hypotheses and manifests. Times
// are rounded to 0.1 ms on output.

#ifndef DYSFLUX_IO_H_
#define DYSFLUX_IO_H_

#include <string>
#include <vector>

#include "json.hpp"

#include "dysflux/detection.h"
#include "dysflux/segmentation.h"
#include "dysflux/simulator.h"

namespace dysflux {

using Json = nlohmann::ordered_json;

/// Rounds a time in seconds to 1e-4.
double RoundTime(double seconds);

Json ToJson(const AlignmentSegments &a, const PhonemeInventory &inv);
AlignmentSegments SegmentsFromJson(const Json &j, const PhonemeInventory &inv);

Json ToJson(const TaggedAlignment &a, const PhonemeInventory &inv);
TaggedAlignment TaggedFromJson(const Json &j, const PhonemeInventory &inv);

Json ToJson(const Alignment2D &a);
Json ToJson(const DtwPath &p);
Json ToJson(const WordSegmentation &w);
Json ToJson(const RecursionState &s);
/// Word segmentation of one order, read back from a RecursionState document.
WordSegmentation WordsFromStateJson(const Json &state, int32_t order);

Json ToJson(const DisfluencyEvent &e, const std::string &utterance_id);
DisfluencyEvent EventFromJson(const Json &j);
Json ToJson(const std::vector<DisfluencyEvent> &events, const std::string &utterance_id);

Json ToJson(const AsrHypothesis &h);
AsrHypothesis HypothesisFromJson(const Json &j);

Json ToJson(const TextRefreshResult &r);

struct ManifestEntry {
  std::string utterance_id;
  std::string emission_path;
  std::string clean_alignment_path;
  std::string events_path;
  std::string reference_text;
  /// Optional word-level ASR hypothesis; empty when absent.
  std::string hypothesis_path;
};

Json ToJson(const std::vector<ManifestEntry> &m);
std::vector<ManifestEntry> ManifestFromJson(const Json &j);

/// Reads and parses a JSON file; throws DataError naming the file.
Json ReadJsonFile(const std::string &path);
/// Writes `j` with two-space indentation and a trailing newline, through a
/// temporary file renamed into place.
void WriteJsonFile(const std::string &path, const Json &j);
void WriteTextFile(const std::string &path, const std::string &text);

}  // namespace dysflux

#endif  // DYSFLUX_IO_H_
