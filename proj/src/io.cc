// src/io.cc

#include "dysflux/io.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dysflux {

double RoundTime(double seconds) {
  const double r = std::round(seconds * 1e4) / 1e4;
  return r == 0.0 ? 0.0 : r;  // no "-0"
}

Json ToJson(const AlignmentSegments &a, const PhonemeInventory &inv) {
  Json segs = Json::array();
  for (const Segment &s : a.segments) {
    segs.push_back({{"phone", inv.Symbol(s.phone)},
                    {"start_frame", s.start},
                    {"end_frame", s.end},
                    {"start_s", RoundTime(s.start * a.frame_duration)},
                    {"end_s", RoundTime(s.end * a.frame_duration)}});
  }
  return {{"frame_duration", a.frame_duration}, {"segments", std::move(segs)}};
}

AlignmentSegments SegmentsFromJson(const Json &j, const PhonemeInventory &inv) {
  try {
    AlignmentSegments a;
    a.frame_duration = j.at("frame_duration").get<double>();
    for (const auto &s : j.at("segments")) {
      a.segments.push_back({inv.Id(s.at("phone").get<std::string>()),
                            s.at("start_frame").get<int32_t>(),
                            s.at("end_frame").get<int32_t>()});
    }
    CheckCanonical(a);
    return a;
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("alignment JSON: ") + e.what());
  }
}

Json ToJson(const TaggedAlignment &a, const PhonemeInventory &inv) {
  Json j = ToJson(a.segments, inv);
  for (std::size_t k = 0; k != a.segments.size(); ++k) {
    j["segments"][k]["row"] = a.rows[k];
    j["segments"][k]["word"] = a.words[k];
  }
  return j;
}

TaggedAlignment TaggedFromJson(const Json &j, const PhonemeInventory &inv) {
  TaggedAlignment a;
  a.segments = SegmentsFromJson(j, inv);
  try {
    for (const auto &s : j.at("segments")) {
      a.rows.push_back(s.at("row").get<int32_t>());
      a.words.push_back(s.at("word").get<int32_t>());
    }
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("tagged alignment JSON: ") + e.what());
  }
  return a;
}

Json ToJson(const Alignment2D &a) {
  Json rows = Json::array();
  for (std::size_t i = 0; i != a.rows(); ++i) {
    rows.push_back({{"phone", a.inventory->Symbol(a.ref.phones()[i])},
                    {"word", a.ref.WordOf(i)}});
  }
  Json cols = Json::array();
  for (std::size_t j = 0; j != a.cols(); ++j) {
    const Interval span = a.segs.TimeSpan(j);
    cols.push_back({{"phone", a.ColumnLabel(j)},
                    {"start_s", RoundTime(span.start_s)},
                    {"end_s", RoundTime(span.end_s)},
                    {"assignment", a.assignment[j] ? Json(*a.assignment[j]) : Json(nullptr)}});
  }
  Json sim = Json::array();
  for (std::size_t i = 0; i != a.rows(); ++i) {
    Json r = Json::array();
    for (std::size_t j = 0; j != a.cols(); ++j) r.push_back(a.similarity(i, j));
    sim.push_back(std::move(r));
  }
  return {{"rows", std::move(rows)}, {"columns", std::move(cols)}, {"similarity", std::move(sim)}};
}

Json ToJson(const DtwPath &p) {
  Json steps = Json::array();
  for (auto [r, c] : p.steps) steps.push_back({r, c});
  return {{"steps", std::move(steps)}, {"total_cost", p.total_cost}};
}

Json ToJson(const WordSegmentation &w) {
  Json entries = Json::array();
  for (const WordSpan &s : w.entries) {
    entries.push_back({{"word", s.text},
                       {"word_index", s.word},
                       {"start_s", RoundTime(s.start_s)},
                       {"end_s", RoundTime(s.end_s)},
                       {"start_frame", s.start_frame},
                       {"end_frame", s.end_frame}});
  }
  return {{"entries", std::move(entries)}, {"missing_words", w.missing_words}};
}

Json ToJson(const RecursionState &s) {
  Json orders = Json::array();
  for (const OrderState &o : s.orders) {
    Json merged = Json::array();
    for (const auto &r : o.merged.assignment) merged.push_back(r ? Json(*r) : Json(nullptr));
    orders.push_back({{"order", o.order},
                      {"segments", ToJson(o.segments, *o.alignment.inventory)},
                      {"alignment_2d", ToJson(o.alignment)},
                      {"dtw_path", ToJson(o.path)},
                      {"merged_assignment", std::move(merged)},
                      {"words", ToJson(o.words)}});
  }
  return {{"orders", std::move(orders)}};
}

WordSegmentation WordsFromStateJson(const Json &state, int32_t order) {
  try {
    const auto &orders = state.at("orders");
    if (order < 0 || static_cast<std::size_t>(order) >= orders.size()) {
      throw DataError("alignment has no order " + std::to_string(order));
    }
    const auto &w = orders.at(order).at("words");
    WordSegmentation out;
    for (const auto &e : w.at("entries")) {
      WordSpan s;
      s.word = e.at("word_index").get<int32_t>();
      s.text = e.at("word").get<std::string>();
      s.start_s = e.at("start_s").get<double>();
      s.end_s = e.at("end_s").get<double>();
      s.start_frame = e.at("start_frame").get<int32_t>();
      s.end_frame = e.at("end_frame").get<int32_t>();
      out.entries.push_back(std::move(s));
    }
    out.missing_words = w.at("missing_words").get<std::vector<int32_t>>();
    return out;
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("alignment JSON: ") + e.what());
  }
}

Json ToJson(const DisfluencyEvent &e, const std::string &utterance_id) {
  Json evidence = Json::array();
  for (const Cell &c : e.evidence) evidence.push_back({c.row, c.col, c.similarity});
  return {{"utterance_id", utterance_id},
          {"level", ToString(e.level)},
          {"kind", ToString(e.kind)},
          {"target", e.target ? Json(*e.target) : Json(nullptr)},
          {"target_label", e.target_label},
          {"start_s", RoundTime(e.interval.start_s)},
          {"end_s", RoundTime(e.interval.end_s)},
          {"source", e.source},
          {"evidence", std::move(evidence)}};
}

DisfluencyEvent EventFromJson(const Json &j) {
  try {
    DisfluencyEvent e;
    e.level = ParseEventLevel(j.at("level").get<std::string>());
    e.kind = ParseEventKind(j.at("kind").get<std::string>());
    if (!j.at("target").is_null()) e.target = j.at("target").get<int32_t>();
    e.target_label = j.value("target_label", "");
    e.interval = {j.at("start_s").get<double>(), j.at("end_s").get<double>()};
    e.source = j.value("source", "template");
    for (const auto &c : j.value("evidence", Json::array())) {
      e.evidence.push_back({c.at(0).get<int32_t>(), c.at(1).get<int32_t>(), c.at(2).get<double>()});
    }
    return e;
  } catch (const nlohmann::json::exception &ex) {
    throw DataError(std::string("event JSON: ") + ex.what());
  }
}

Json ToJson(const std::vector<DisfluencyEvent> &events, const std::string &utterance_id) {
  Json out = Json::array();
  for (const auto &e : events) out.push_back(ToJson(e, utterance_id));
  return out;
}

Json ToJson(const AsrHypothesis &h) {
  Json out = Json::array();
  for (const auto &w : h.words) {
    out.push_back({{"word", w.word}, {"start_s", RoundTime(w.start_s)}, {"end_s", RoundTime(w.end_s)}});
  }
  return out;
}

AsrHypothesis HypothesisFromJson(const Json &j) {
  try {
    AsrHypothesis h;
    double last_end = -1.0;
    for (const auto &w : j) {
      AsrWord word{w.at("word").get<std::string>(), w.at("start_s").get<double>(),
                   w.at("end_s").get<double>()};
      if (word.end_s < word.start_s || word.start_s < last_end) {
        throw DataError("hypothesis words must be time-ordered and non-overlapping");
      }
      last_end = word.end_s;
      h.words.push_back(std::move(word));
    }
    return h;
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("hypothesis JSON: ") + e.what());
  }
}

Json ToJson(const TextRefreshResult &r) {
  Json words = Json::array();
  for (const auto &w : r.words) {
    words.push_back({{"word", w.word},
                     {"start_s", RoundTime(w.start_s)},
                     {"end_s", RoundTime(w.end_s)},
                     {"tag", w.tag}});
  }
  return {{"transcript", r.transcript},
          {"empty_hypothesis", r.empty_hypothesis},
          {"words", std::move(words)}};
}

Json ToJson(const std::vector<ManifestEntry> &m) {
  Json out = Json::array();
  for (const auto &e : m) {
    Json entry = {{"utterance_id", e.utterance_id},
                  {"emission_path", e.emission_path},
                  {"clean_alignment_path", e.clean_alignment_path},
                  {"events_path", e.events_path},
                  {"reference_text", e.reference_text}};
    if (!e.hypothesis_path.empty()) entry["hypothesis_path"] = e.hypothesis_path;
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<ManifestEntry> ManifestFromJson(const Json &j) {
  try {
    if (!j.is_array()) throw DataError("manifest must be a JSON array");
    std::vector<ManifestEntry> out;
    for (const auto &e : j) {
      ManifestEntry m;
      m.utterance_id = e.at("utterance_id").get<std::string>();
      m.emission_path = e.at("emission_path").get<std::string>();
      m.reference_text = e.at("reference_text").get<std::string>();
      m.clean_alignment_path = e.value("clean_alignment_path", "");
      m.events_path = e.value("events_path", "");
      m.hypothesis_path = e.value("hypothesis_path", "");
      out.push_back(std::move(m));
    }
    return out;
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("manifest JSON: ") + e.what());
  }
}

Json ReadJsonFile(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path);
  try {
    return Json::parse(is);
  } catch (const nlohmann::json::exception &e) {
    throw DataError(path + ": " + e.what());
  }
}

void WriteTextFile(const std::string &path, const std::string &text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw DataError("cannot write " + path);
    os << text;
    if (!os) throw DataError("failed writing " + path);
  }
  std::filesystem::rename(tmp, path);
}

void WriteJsonFile(const std::string &path, const Json &j) {
  WriteTextFile(path, j.dump(2) + "\n");
}

}  // namespace dysflux
