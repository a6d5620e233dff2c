// src/pipeline.cc

#include "dysflux/pipeline.h"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace dysflux {

namespace {

void CheckKeys(const Json &obj, std::initializer_list<std::string_view> allowed,
               const std::string &where) {
  if (!obj.is_object()) throw DataError(where + " must be a JSON object");
  for (const auto &[key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw DataError("unknown config key " + where + "." + key);
    }
  }
}

template <typename T>
void Read(const Json &obj, const char *key, T &out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void ReadRange(const Json &obj, const char *key, DurationRange &out) {
  if (!obj.contains(key)) return;
  const auto v = obj.at(key).get<std::vector<double>>();
  if (v.size() != 2) throw DataError(std::string("config ") + key + " must be [min_s, max_s]");
  out = {v[0], v[1]};
}

Json RangeJson(const DurationRange &r) { return Json::array({r.min_s, r.max_s}); }

std::string Resolve(const std::string &path, const std::string &base_dir) {
  if (path.empty() || base_dir.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base_dir) / path).lexically_normal().string();
}

void CheckUnit(double v, const char *name) {
  if (!(v >= 0.0 && v <= 1.0)) throw DataError(std::string(name) + " must lie in [0, 1]");
}

std::string KindKey(const std::string &id, const DisfluencyEvent &e) {
  return id + '\x1f' + std::string(ToString(e.kind));
}

MatchResult Pooled(const std::vector<MatchItem> &pred, const std::vector<MatchItem> &gt) {
  MatchResult r = MatchingScore(pred, gt);
  r.pairs.clear();
  return r;
}

Json MatchJson(const MatchResult &r) {
  return {{"true_positives", r.true_positives},
          {"false_positives", r.false_positives},
          {"false_negatives", r.false_negatives},
          {"precision", r.precision},
          {"recall", r.recall},
          {"f1", r.f1}};
}

std::string MatchCsvRow(const std::string &label, const MatchResult &r) {
  std::ostringstream os;
  os.precision(6);
  os << label << ',' << r.true_positives << ',' << r.false_positives << ','
     << r.false_negatives << ',' << r.precision << ',' << r.recall << ',' << r.f1 << '\n';
  return os.str();
}

constexpr const char *kMatchCsvHeader =
    "true_positives,false_positives,false_negatives,precision,recall,f1\n";

std::vector<std::string> TranscriptTokens(const TextRefreshResult &r) {
  std::vector<std::string> out;
  if (r.empty_hypothesis) return out;
  for (const auto &w : r.words) {
    if (w.tag == "deletion") continue;
    out.push_back(w.tag == "insertion" ? "[" + w.word + "]" : w.word);
  }
  return out;
}

}  // namespace

PipelineConfig PipelineConfig::FromJson(const Json &j, const std::string &base_dir) {
  try {
    CheckKeys(j,
              {"inventory", "lexicon", "lm", "lm_corpus", "lm_add_k", "search", "thresholds",
               "max_order", "detect_order", "workers", "seed", "simulate"},
              "config");
    PipelineConfig c;
    Read(j, "inventory", c.inventory_path);
    Read(j, "lexicon", c.lexicon_path);
    Read(j, "lm", c.lm_path);
    Read(j, "lm_corpus", c.lm_corpus_path);
    c.inventory_path = Resolve(c.inventory_path, base_dir);
    c.lexicon_path = Resolve(c.lexicon_path, base_dir);
    c.lm_path = Resolve(c.lm_path, base_dir);
    c.lm_corpus_path = Resolve(c.lm_corpus_path, base_dir);
    Read(j, "lm_add_k", c.lm_add_k);
    if (j.contains("search")) {
      const Json &s = j.at("search");
      CheckKeys(s, {"lm_weight", "boundary_weight", "min_segment_frames", "beam_width"},
                "search");
      Read(s, "lm_weight", c.urfa.search.lm_weight);
      Read(s, "boundary_weight", c.urfa.search.boundary_weight);
      Read(s, "min_segment_frames", c.urfa.search.min_segment_frames);
      Read(s, "beam_width", c.urfa.search.beam_width);
    }
    if (j.contains("thresholds")) {
      const Json &t = j.at("thresholds");
      CheckKeys(t, {"assign", "merge", "match", "pause_min_s", "missing_window_s"},
                "thresholds");
      Read(t, "assign", c.urfa.align.assign_threshold);
      Read(t, "merge", c.urfa.merge_threshold);
      Read(t, "match", c.detect.match_threshold);
      Read(t, "pause_min_s", c.detect.pause_min_s);
      Read(t, "missing_window_s", c.detect.missing_window_s);
    }
    Read(j, "max_order", c.urfa.max_order);
    Read(j, "detect_order", c.detect_order);
    Read(j, "workers", c.workers);
    Read(j, "seed", c.seed);
    if (j.contains("simulate")) {
      const Json &s = j.at("simulate");
      CheckKeys(s,
                {"count", "repetition_rate", "prolongation_rate", "block_rate", "missing_rate",
                 "prolongation", "block", "repetition_gap", "repeat_count", "repeat_span",
                 "noise", "sharpness", "min_words", "max_words", "phone", "pause_rate"},
                "simulate");
      InjectionSpec &inj = c.corpus.injection;
      Read(s, "count", c.corpus.count);
      Read(s, "repetition_rate", inj.repetition_rate);
      Read(s, "prolongation_rate", inj.prolongation_rate);
      Read(s, "block_rate", inj.block_rate);
      Read(s, "missing_rate", inj.missing_rate);
      ReadRange(s, "prolongation", inj.prolongation);
      ReadRange(s, "block", inj.block);
      ReadRange(s, "repetition_gap", inj.repetition_gap);
      Read(s, "repeat_count", inj.repeat_count);
      Read(s, "repeat_span", inj.repeat_span);
      Read(s, "noise", c.corpus.emission.noise);
      Read(s, "sharpness", c.corpus.emission.sharpness);
      Read(s, "min_words", c.corpus.utterance.min_words);
      Read(s, "max_words", c.corpus.utterance.max_words);
      ReadRange(s, "phone", c.corpus.utterance.phone);
      Read(s, "pause_rate", c.corpus.utterance.pause_rate);
    }
    c.corpus.seed = c.seed;
    c.Validate();
    return c;
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("config: ") + e.what());
  }
}

PipelineConfig PipelineConfig::FromFile(const std::string &path) {
  return FromJson(ReadJsonFile(path), std::filesystem::path(path).parent_path().string());
}

Json PipelineConfig::ToJson() const {
  const InjectionSpec &inj = corpus.injection;
  return {{"inventory", inventory_path},
          {"lexicon", lexicon_path},
          {"lm", lm_path},
          {"lm_corpus", lm_corpus_path},
          {"lm_add_k", lm_add_k},
          {"search",
           {{"lm_weight", urfa.search.lm_weight},
            {"boundary_weight", urfa.search.boundary_weight},
            {"min_segment_frames", urfa.search.min_segment_frames},
            {"beam_width", urfa.search.beam_width}}},
          {"thresholds",
           {{"assign", urfa.align.assign_threshold},
            {"merge", urfa.merge_threshold},
            {"match", detect.match_threshold},
            {"pause_min_s", detect.pause_min_s},
            {"missing_window_s", detect.missing_window_s}}},
          {"max_order", urfa.max_order},
          {"detect_order", detect_order},
          {"workers", workers},
          {"seed", seed},
          {"simulate",
           {{"count", corpus.count},
            {"repetition_rate", inj.repetition_rate},
            {"prolongation_rate", inj.prolongation_rate},
            {"block_rate", inj.block_rate},
            {"missing_rate", inj.missing_rate},
            {"prolongation", RangeJson(inj.prolongation)},
            {"block", RangeJson(inj.block)},
            {"repetition_gap", RangeJson(inj.repetition_gap)},
            {"repeat_count", inj.repeat_count},
            {"repeat_span", inj.repeat_span},
            {"noise", corpus.emission.noise},
            {"sharpness", corpus.emission.sharpness},
            {"min_words", corpus.utterance.min_words},
            {"max_words", corpus.utterance.max_words},
            {"phone", RangeJson(corpus.utterance.phone)},
            {"pause_rate", corpus.utterance.pause_rate}}}};
}

void PipelineConfig::Validate() const {
  urfa.Validate();
  detect.Validate();
  CheckUnit(urfa.align.assign_threshold, "thresholds.assign");
  CheckUnit(urfa.merge_threshold, "thresholds.merge");
  CheckUnit(detect.match_threshold, "thresholds.match");
  if (!(lm_add_k > 0.0)) throw DataError("lm_add_k must be positive");
  if (detect_order < -1) throw DataError("detect_order must be >= -1");
  if (workers < 1) throw DataError("workers must be >= 1");
  if (corpus.count < 0) throw DataError("simulate.count must be >= 0");
  corpus.injection.Validate();
  if (!(corpus.emission.sharpness > 0.0)) throw DataError("simulate.sharpness must be positive");
  if (!(corpus.emission.noise >= 0.0)) throw DataError("simulate.noise must be nonnegative");
}

Resources Resources::Load(const PipelineConfig &cfg) {
  PhonemeInventory inv = cfg.inventory_path.empty()
                             ? PhonemeInventory::Default()
                             : PhonemeInventory::FromFile(cfg.inventory_path);
  Lexicon lex = cfg.lexicon_path.empty() ? Lexicon::FromText(Lexicon::DefaultText(), inv)
                                         : Lexicon::FromFile(cfg.lexicon_path, inv);
  BigramLM lm;
  if (!cfg.lm_path.empty()) {
    lm = ReadBigram(cfg.lm_path, inv);
  } else if (!cfg.lm_corpus_path.empty()) {
    lm = EstimateBigram(ReadPhonemeCorpus(cfg.lm_corpus_path, inv), inv.size(), cfg.lm_add_k);
  } else {
    lm = BigramLM::Uniform(inv.size());
  }
  return Resources{std::move(inv), std::move(lex), std::move(lm)};
}

UtteranceResult ProcessUtterance(const EmissionInput &e, const ReferenceText &ref,
                                 const AsrHypothesis *hyp, const Resources &res,
                                 const PipelineConfig &cfg) {
  UtteranceResult r;
  r.state = UrfaIterate(e, ref, res.inventory, res.lm, cfg.urfa);
  const int32_t top = static_cast<int32_t>(r.state.orders.size()) - 1;
  r.detect_order = cfg.detect_order < 0 ? top : std::min(cfg.detect_order, top);
  const OrderState &o = r.state.orders[r.detect_order];
  r.phoneme_events = DetectPhoneme(o.alignment, o.path, cfg.detect);
  if (hyp != nullptr) r.word = DetectWord(o.merged, o.alignment, hyp, cfg.detect);
  return r;
}

TruthRecord TruthFromSimulation(const SimulatedUtterance &u) {
  TruthRecord t;
  t.id = u.id;
  t.alignment = u.truth.disfluent.segments;
  t.events = u.truth.events;
  t.word_spans = u.truth.WordSpans(u.ref.num_words());
  for (const auto &w : u.ref.words()) t.transcript.push_back(w.text);
  return t;
}

PredictionRecord PredictionFromResult(const std::string &id, const UtteranceResult &r) {
  PredictionRecord p;
  p.id = id;
  p.alignment = r.state.orders.front().segments;
  p.phoneme_events = r.phoneme_events;
  for (const OrderState &o : r.state.orders) p.words_by_order.push_back(o.words);
  if (r.word) {
    p.word_events = r.word->events;
    p.transcript = TranscriptTokens(r.word->refresh);
  }
  return p;
}

EvaluationReport Evaluate(const std::vector<TruthRecord> &truth,
                          const std::vector<PredictionRecord> &pred) {
  EvaluationReport rep;
  std::map<std::string, const PredictionRecord *> by_id;
  for (const auto &p : pred) by_id[p.id] = &p;
  std::set<std::string> truth_ids;
  for (const auto &t : truth) truth_ids.insert(t.id);

  std::size_t orders = 0;
  for (const auto &p : pred) {
    if (truth_ids.count(p.id)) orders = std::max(orders, p.words_by_order.size());
  }

  int64_t edit_errors = 0, ref_phones = 0;
  double weighted_cost = 0.0, ref_duration = 0.0;
  int64_t word_errors = 0, target_words = 0;
  bool any_transcript = false;
  std::vector<PhoneId> all_ref_frames, all_hyp_frames;
  std::vector<MatchItem> ev_pred, ev_gt, wev_pred, wev_gt;
  std::vector<std::vector<MatchItem>> seg_pred(orders);
  std::vector<MatchItem> seg_gt;

  for (const TruthRecord &t : truth) {
    auto it = by_id.find(t.id);
    if (it == by_id.end()) {
      rep.skipped.push_back(t.id);
      continue;
    }
    const PredictionRecord &p = *it->second;
    const auto ref_labels = t.alignment.Labels();
    const auto hyp_labels = p.alignment.Labels();
    const auto ref_frames = t.alignment.ToFrames();
    const auto hyp_frames = p.alignment.ToFrames();
    if (ref_frames.size() != hyp_frames.size()) {
      rep.skipped.push_back(t.id);
      continue;
    }

    UtteranceScores s;
    s.id = t.id;
    const EditOps ops = EditDistance(ref_labels, hyp_labels);
    s.per = static_cast<double>(ops.errors()) / static_cast<double>(ref_labels.size());
    edit_errors += ops.errors();
    ref_phones += static_cast<int64_t>(ref_labels.size());
    double cost = 0.0;
    DurationEditDistance(t.alignment, p.alignment, SubstitutionCost::kMax, &cost);
    const double duration = t.alignment.num_frames() * t.alignment.frame_duration;
    s.dper = cost / duration;
    weighted_cost += cost;
    ref_duration += duration;
    s.frame_f1 = FrameF1(ref_frames, hyp_frames);
    all_ref_frames.insert(all_ref_frames.end(), ref_frames.begin(), ref_frames.end());
    all_hyp_frames.insert(all_hyp_frames.end(), hyp_frames.begin(), hyp_frames.end());
    if (p.transcript && !t.transcript.empty()) {
      const EditOps w = EditDistance(t.transcript, *p.transcript);
      s.iwer = static_cast<double>(w.errors()) / static_cast<double>(t.transcript.size());
      word_errors += w.errors();
      target_words += static_cast<int64_t>(t.transcript.size());
      any_transcript = true;
    }

    std::vector<MatchItem> up, ug;
    for (const auto &e : p.phoneme_events) up.push_back({KindKey(t.id, e), e.interval});
    for (const auto &e : t.events) {
      if (e.level == EventLevel::kPhoneme) ug.push_back({KindKey(t.id, e), e.interval});
    }
    s.events = Pooled(up, ug);
    ev_pred.insert(ev_pred.end(), up.begin(), up.end());
    ev_gt.insert(ev_gt.end(), ug.begin(), ug.end());
    for (const auto &e : p.word_events) wev_pred.push_back({KindKey(t.id, e), e.interval});
    for (const auto &e : t.events) {
      if (e.level == EventLevel::kWord) wev_gt.push_back({KindKey(t.id, e), e.interval});
    }

    std::vector<MatchItem> ugt;
    for (std::size_t w = 0; w != t.word_spans.size(); ++w) {
      if (t.word_spans[w]) ugt.push_back({t.id + '\x1f' + std::to_string(w), *t.word_spans[w]});
    }
    seg_gt.insert(seg_gt.end(), ugt.begin(), ugt.end());
    for (std::size_t k = 0; k != orders; ++k) {
      // A prediction with fewer orders reuses its last one.
      const auto &words = p.words_by_order.empty()
                              ? WordSegmentation{}
                              : p.words_by_order[std::min(k, p.words_by_order.size() - 1)];
      std::vector<MatchItem> items;
      for (const auto &w : words.entries) {
        items.push_back({t.id + '\x1f' + std::to_string(w.word), w.interval()});
      }
      s.segmentation.push_back(Pooled(items, ugt));
      seg_pred[k].insert(seg_pred[k].end(), items.begin(), items.end());
    }
    rep.utterances.push_back(std::move(s));
  }
  for (const auto &p : pred) {
    if (!truth_ids.count(p.id)) rep.skipped.push_back(p.id);
  }

  if (ref_phones > 0) rep.per = static_cast<double>(edit_errors) / static_cast<double>(ref_phones);
  if (ref_duration > 0.0) rep.dper = weighted_cost / ref_duration;
  if (!all_ref_frames.empty()) rep.frame_f1 = FrameF1(all_ref_frames, all_hyp_frames);
  if (any_transcript) {
    rep.iwer = static_cast<double>(word_errors) / static_cast<double>(target_words);
  }
  rep.phoneme_events = Pooled(ev_pred, ev_gt);
  for (EventKind k : {EventKind::kMissing, EventKind::kRepetition, EventKind::kInsertion,
                      EventKind::kReplacement, EventKind::kIrregularPause}) {
    const std::string suffix = '\x1f' + std::string(ToString(k));
    auto of_kind = [&](const std::vector<MatchItem> &items) {
      std::vector<MatchItem> out;
      for (const auto &m : items) {
        if (m.key.ends_with(suffix)) out.push_back(m);
      }
      return out;
    };
    rep.phoneme_events_by_kind.emplace_back(std::string(ToString(k)),
                                            Pooled(of_kind(ev_pred), of_kind(ev_gt)));
  }
  rep.word_events = Pooled(wev_pred, wev_gt);
  for (std::size_t k = 0; k != orders; ++k) rep.segmentation.push_back(Pooled(seg_pred[k], seg_gt));
  return rep;
}

Json ToJson(const EvaluationReport &r) {
  Json seg = Json::array();
  for (std::size_t k = 0; k != r.segmentation.size(); ++k) {
    Json m = MatchJson(r.segmentation[k]);
    m["order"] = k;
    seg.push_back(std::move(m));
  }
  Json by_kind = Json::object();
  for (const auto &[kind, m] : r.phoneme_events_by_kind) by_kind[kind] = MatchJson(m);

  Json utts = Json::array();
  for (const UtteranceScores &s : r.utterances) {
    Json useg = Json::array();
    for (const auto &m : s.segmentation) useg.push_back(m.f1);
    utts.push_back({{"utterance_id", s.id},
                    {"per", s.per},
                    {"dper", s.dper},
                    {"frame_micro_f1", s.frame_f1.micro},
                    {"frame_macro_f1", s.frame_f1.macro},
                    {"iwer", s.iwer ? Json(*s.iwer) : Json(nullptr)},
                    {"phoneme_events", MatchJson(s.events)},
                    {"segmentation_ms_f1", std::move(useg)}});
  }
  return {{"aggregate",
           {{"utterances", r.utterances.size()},
            {"per", r.per},
            {"dper", r.dper},
            {"frame_micro_f1", r.frame_f1.micro},
            {"frame_macro_f1", r.frame_f1.macro},
            {"iwer", r.iwer ? Json(*r.iwer) : Json(nullptr)},
            {"phoneme_events", MatchJson(r.phoneme_events)},
            {"phoneme_events_by_kind", std::move(by_kind)},
            {"word_events", MatchJson(r.word_events)},
            {"segmentation", std::move(seg)}}},
          {"skipped", r.skipped},
          {"utterances", std::move(utts)}};
}

std::string SegmentationCsv(const EvaluationReport &r) {
  std::string out = std::string("order,") + kMatchCsvHeader;
  for (std::size_t k = 0; k != r.segmentation.size(); ++k) {
    out += MatchCsvRow(std::to_string(k), r.segmentation[k]);
  }
  return out;
}

std::string EventCsv(const EvaluationReport &r) {
  std::string out = std::string("kind,") + kMatchCsvHeader;
  for (const auto &[kind, m] : r.phoneme_events_by_kind) out += MatchCsvRow(kind, m);
  out += MatchCsvRow("all", r.phoneme_events);
  return out;
}

Json TruthDocument(const SimulatedUtterance &u, const PhonemeInventory &inv) {
  Json prolongations = Json::array();
  for (const Interval &p : u.truth.prolongations) {
    prolongations.push_back({{"start_s", RoundTime(p.start_s)}, {"end_s", RoundTime(p.end_s)}});
  }
  Json spans = Json::array();
  const auto word_spans = u.truth.WordSpans(u.ref.num_words());
  for (std::size_t w = 0; w != word_spans.size(); ++w) {
    if (!word_spans[w]) continue;
    spans.push_back({{"word", u.ref.words()[w].text},
                     {"word_index", w},
                     {"start_s", RoundTime(word_spans[w]->start_s)},
                     {"end_s", RoundTime(word_spans[w]->end_s)}});
  }
  Json transcript = Json::array();
  for (const auto &w : u.ref.words()) transcript.push_back(w.text);
  return {{"utterance_id", u.id},
          {"reference_text", u.ref.Text()},
          {"events", ToJson(u.truth.events, u.id)},
          {"prolongations", std::move(prolongations)},
          {"word_spans", std::move(spans)},
          {"transcript", std::move(transcript)},
          {"disfluent_alignment", ToJson(u.truth.disfluent, inv)}};
}

TruthRecord TruthFromDocument(const Json &j, const PhonemeInventory &inv) {
  try {
    TruthRecord t;
    t.id = j.at("utterance_id").get<std::string>();
    t.alignment = SegmentsFromJson(j.at("disfluent_alignment"), inv);
    for (const auto &e : j.at("events")) t.events.push_back(EventFromJson(e));
    for (const auto &s : j.at("word_spans")) {
      const auto w = s.at("word_index").get<std::size_t>();
      if (w >= t.word_spans.size()) t.word_spans.resize(w + 1);
      t.word_spans[w] = Interval{s.at("start_s").get<double>(), s.at("end_s").get<double>()};
    }
    t.transcript = j.at("transcript").get<std::vector<std::string>>();
    return t;
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("ground-truth JSON: ") + e.what());
  }
}

Json EventsDocument(const std::string &id, const UtteranceResult &r) {
  Json doc = {{"utterance_id", id},
              {"detect_order", r.detect_order},
              {"phoneme_events", ToJson(r.phoneme_events, id)},
              {"word_events", Json::array()},
              {"word_template_events", Json::array()},
              {"refreshed", nullptr}};
  if (r.word) {
    doc["word_events"] = ToJson(r.word->events, id);
    doc["word_template_events"] = ToJson(r.word->template_events, id);
    doc["refreshed"] = ToJson(r.word->refresh);
    Json tokens = Json::array();
    for (const auto &t : TranscriptTokens(r.word->refresh)) tokens.push_back(t);
    doc["refreshed"]["tokens"] = std::move(tokens);
  }
  return doc;
}

Json WordsDocument(const std::string &id, const RecursionState &s) {
  Json orders = Json::array();
  for (const OrderState &o : s.orders) {
    Json words = Json::array();
    for (const WordSpan &w : o.words.entries) {
      words.push_back({{"word", w.text},
                       {"word_index", w.word},
                       {"start_s", RoundTime(w.start_s)},
                       {"end_s", RoundTime(w.end_s)}});
    }
    orders.push_back({{"order", o.order},
                      {"words", std::move(words)},
                      {"missing_words", o.words.missing_words}});
  }
  return {{"utterance_id", id}, {"orders", std::move(orders)}};
}

PredictionRecord PredictionFromDocuments(const Json &alignment, const Json &events,
                                         const PhonemeInventory &inv) {
  try {
    PredictionRecord p;
    p.id = events.at("utterance_id").get<std::string>();
    const auto &orders = alignment.at("orders");
    if (orders.empty()) throw DataError("alignment document has no orders");
    p.alignment = SegmentsFromJson(orders.at(0).at("segments"), inv);
    for (std::size_t k = 0; k != orders.size(); ++k) {
      p.words_by_order.push_back(WordsFromStateJson(alignment, static_cast<int32_t>(k)));
    }
    for (const auto &e : events.at("phoneme_events")) p.phoneme_events.push_back(EventFromJson(e));
    for (const auto &e : events.at("word_events")) p.word_events.push_back(EventFromJson(e));
    const Json &refreshed = events.at("refreshed");
    if (!refreshed.is_null()) {
      p.transcript = refreshed.at("tokens").get<std::vector<std::string>>();
    }
    return p;
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("prediction JSON: ") + e.what());
  }
}

void ParallelFor(std::size_t n, int32_t workers, const std::function<void(std::size_t)> &fn) {
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i != n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w != threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

}  // namespace dysflux
