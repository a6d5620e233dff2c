// tests/test_pipeline.cc
#include <atomic>
#include <filesystem>

#include "doctest.h"
#include "dysflux/pipeline.h"
#include "oracles.h"
#include "test_util.h"

using namespace dysflux;
using dysflux::testing::Segs;

namespace {

DisfluencyEvent Event(EventKind kind, double start, double end, std::optional<int32_t> target = {}) {
  DisfluencyEvent e;
  e.kind = kind;
  e.target = target;
  e.interval = {start, end};
  return e;
}

PredictionRecord Perfect(const TruthRecord &t) {
  PredictionRecord p;
  p.id = t.id;
  p.alignment = t.alignment;
  p.phoneme_events = t.events;
  WordSegmentation words;
  for (std::size_t w = 0; w != t.word_spans.size(); ++w) {
    if (!t.word_spans[w]) continue;
    WordSpan s;
    s.word = static_cast<int32_t>(w);
    s.start_s = t.word_spans[w]->start_s;
    s.end_s = t.word_spans[w]->end_s;
    words.entries.push_back(s);
  }
  p.words_by_order = {words, words};
  p.transcript = t.transcript;
  return p;
}

std::vector<TruthRecord> ToyTruth(const PhonemeInventory &inv) {
  TruthRecord a;
  a.id = "a";
  a.alignment = Segs(inv, {{"SIL", 5}, {"K", 5}, {"AE", 5}, {"SIL", 2}, {"AE", 5}, {"T", 5}});
  a.events = {Event(EventKind::kRepetition, 0.2, 0.54, 1)};
  a.word_spans = {Interval{0.1, 0.64}};
  a.transcript = {"cat"};

  TruthRecord b;
  b.id = "b";
  b.alignment = Segs(inv, {{"SIL", 4}, {"D", 6}, {"AA", 6}, {"SIL", 15}, {"G", 6}, {"SIL", 3}});
  b.events = {Event(EventKind::kIrregularPause, 0.32, 0.62)};
  b.word_spans = {Interval{0.08, 0.32}, Interval{0.62, 0.74}};
  b.transcript = {"dog", "go"};

  TruthRecord c;
  c.id = "c";
  c.alignment = Segs(inv, {{"SIL", 3}, {"S", 4}, {"T", 4}, {"SIL", 3}});
  c.events = {};
  c.word_spans = {Interval{0.06, 0.22}};
  c.transcript = {"st"};
  return {a, b, c};
}

}  // namespace

TEST_CASE("segments, events and hypotheses survive a JSON round trip") {
  const auto &inv = PhonemeInventory::Default();
  const auto segs = Segs(inv, {{"SIL", 3}, {"K", 4}, {"AE", 2}});
  CHECK(SegmentsFromJson(ToJson(segs, inv), inv) == segs);

  DisfluencyEvent e = Event(EventKind::kMissing, 0.123456, 0.2, 4);
  e.target_label = "T";
  e.evidence = {{4, 2, 0.25}};
  const Json j = ToJson(e, "u1");
  CHECK(j.at("utterance_id") == "u1");
  CHECK(j.at("kind") == "Missing");
  CHECK(j.at("start_s").get<double>() == 0.1235);
  const DisfluencyEvent back = EventFromJson(j);
  CHECK(back.kind == e.kind);
  CHECK(back.target == e.target);
  CHECK(back.evidence == e.evidence);

  AsrHypothesis h;
  h.words = {{"the", 0.0, 0.2}, {"cat", 0.25, 0.5}};
  const AsrHypothesis hb = HypothesisFromJson(ToJson(h));
  REQUIRE(hb.words.size() == 2);
  CHECK(hb.words[1].word == "cat");
  CHECK_THROWS_AS(HypothesisFromJson(Json::parse(R"([{"word":"a","start_s":0.5,"end_s":0.4}])")),
                  DataError);
  CHECK_THROWS_AS(SegmentsFromJson(Json::parse(R"({"segments":[]})"), inv), DataError);
}

TEST_CASE("manifests keep the optional hypothesis path") {
  std::vector<ManifestEntry> m(2);
  m[0] = {"u0", "u0.bin", "u0.clean.json", "u0.truth.json", "the cat", ""};
  m[1] = {"u1", "u1.bin", "", "", "a dog", "u1.hyp.json"};
  const Json j = ToJson(m);
  CHECK_FALSE(j[0].contains("hypothesis_path"));
  const auto back = ManifestFromJson(j);
  REQUIRE(back.size() == 2);
  CHECK(back[1].hypothesis_path == "u1.hyp.json");
  CHECK(back[0].reference_text == "the cat");
  CHECK(ManifestFromJson(Json::array()).empty());
  CHECK_THROWS_AS(ManifestFromJson(Json::object()), DataError);
  CHECK_THROWS_AS(ManifestFromJson(Json::parse(R"([{"utterance_id":"x"}])")), DataError);
}

TEST_CASE("config parsing validates keys and ranges") {
  const auto c = PipelineConfig::FromJson(Json::parse(R"({
    "search": {"lm_weight": 0.5, "beam_width": 4},
    "thresholds": {"assign": 0.7, "merge": 0.5, "match": 0.65, "pause_min_s": 0.3},
    "max_order": 2, "workers": 3, "seed": 99,
    "simulate": {"count": 7, "block": [0.3, 0.6], "noise": 0.2}
  })"));
  CHECK(c.urfa.search.lm_weight == 0.5);
  CHECK(c.urfa.search.beam_width == 4);
  CHECK(c.urfa.align.assign_threshold == 0.7);
  CHECK(c.urfa.merge_threshold == 0.5);
  CHECK(c.detect.match_threshold == 0.65);
  CHECK(c.detect.pause_min_s == 0.3);
  CHECK(c.urfa.max_order == 2);
  CHECK(c.workers == 3);
  CHECK(c.corpus.seed == 99);
  CHECK(c.corpus.count == 7);
  CHECK(c.corpus.injection.block.min_s == 0.3);
  CHECK(c.corpus.emission.noise == 0.2);

  const auto again = PipelineConfig::FromJson(c.ToJson());
  CHECK(again.ToJson() == c.ToJson());

  CHECK_THROWS_AS(PipelineConfig::FromJson(Json::parse(R"({"bogus": 1})")), DataError);
  CHECK_THROWS_AS(PipelineConfig::FromJson(Json::parse(R"({"thresholds": {"assign": 1.5}})")),
                  DataError);
  CHECK_THROWS_AS(PipelineConfig::FromJson(Json::parse(R"({"max_order": -1})")), DataError);
  CHECK_THROWS_AS(PipelineConfig::FromJson(Json::parse(R"({"workers": 0})")), DataError);
  CHECK_THROWS_AS(PipelineConfig::FromJson(Json::parse(R"({"max_order": "x"})")), DataError);
}

TEST_CASE("relative config paths resolve against the config directory") {
  const auto c = PipelineConfig::FromJson(Json::parse(R"({"lm": "lm.json", "lexicon": "/abs/lex.txt"})"),
                                          "/data/run");
  CHECK(c.lm_path == "/data/run/lm.json");
  CHECK(c.lexicon_path == "/abs/lex.txt");
}

TEST_CASE("perfect predictions score zero error and F1 one") {
  const auto &inv = PhonemeInventory::Default();
  const auto truth = ToyTruth(inv);
  std::vector<PredictionRecord> pred;
  for (const auto &t : truth) pred.push_back(Perfect(t));
  const EvaluationReport r = Evaluate(truth, pred);
  CHECK(r.utterances.size() == 3);
  CHECK(r.skipped.empty());
  CHECK(r.per == 0.0);
  CHECK(r.dper == 0.0);
  CHECK(r.frame_f1.micro == 1.0);
  CHECK(r.frame_f1.macro == 1.0);
  REQUIRE(r.iwer.has_value());
  CHECK(*r.iwer == 0.0);
  CHECK(r.phoneme_events.f1 == 1.0);
  REQUIRE(r.segmentation.size() == 2);
  CHECK(r.segmentation[0].f1 == 1.0);
  CHECK(r.segmentation[1].f1 == 1.0);
}

TEST_CASE("empty predictions give zero matching score") {
  const auto &inv = PhonemeInventory::Default();
  const auto truth = ToyTruth(inv);
  std::vector<PredictionRecord> pred;
  for (const auto &t : truth) {
    PredictionRecord p = Perfect(t);
    p.phoneme_events.clear();
    for (auto &w : p.words_by_order) w.entries.clear();
    pred.push_back(p);
  }
  const EvaluationReport r = Evaluate(truth, pred);
  CHECK(r.phoneme_events.f1 == 0.0);
  CHECK(r.phoneme_events.false_negatives == 2);
  CHECK(r.segmentation[0].f1 == 0.0);
  CHECK(r.segmentation[0].false_negatives == 4);
}

TEST_CASE("unmatched ids are skipped") {
  const auto &inv = PhonemeInventory::Default();
  const auto truth = ToyTruth(inv);
  PredictionRecord stray = Perfect(truth[0]);
  stray.id = "zzz";
  const EvaluationReport r = Evaluate(truth, {Perfect(truth[1]), stray});
  CHECK(r.utterances.size() == 1);
  CHECK(r.skipped == std::vector<std::string>{"a", "c", "zzz"});
}

TEST_CASE("corpus scores equal a recomputation from the metric oracles") {
  const auto &inv = PhonemeInventory::Default();
  const auto truth = ToyTruth(inv);
  std::vector<PredictionRecord> pred;
  // a: repetition missed, second AE merged into the first.
  PredictionRecord a = Perfect(truth[0]);
  a.alignment = Segs(inv, {{"SIL", 5}, {"K", 5}, {"AE", 12}, {"T", 5}});
  a.phoneme_events.clear();
  a.transcript = std::vector<std::string>{"cat", "[K]"};
  // b: pause found but shifted, plus a spurious insertion; G decoded as K.
  PredictionRecord b = Perfect(truth[1]);
  b.alignment = Segs(inv, {{"SIL", 4}, {"D", 6}, {"AA", 6}, {"SIL", 15}, {"K", 6}, {"SIL", 3}});
  b.phoneme_events = {Event(EventKind::kIrregularPause, 0.36, 0.62),
                      Event(EventKind::kInsertion, 0.7, 0.74, 1)};
  b.words_by_order[1].entries[0].end_s = 0.19;  // IoU below 0.5
  // c: perfect.
  pred = {a, b, Perfect(truth[2])};
  const EvaluationReport r = Evaluate(truth, pred);

  int64_t errors = 0, phones = 0;
  double cost = 0.0, duration = 0.0;
  std::vector<PhoneId> rf, hf;
  for (std::size_t k = 0; k != 3; ++k) {
    const auto rl = truth[k].alignment.Labels(), hl = pred[k].alignment.Labels();
    errors += static_cast<int64_t>(dysflux::testing::UnitEditOracle(rl, hl));
    phones += static_cast<int64_t>(rl.size());
    cost += dysflux::testing::DurationEditOracle(truth[k].alignment, pred[k].alignment);
    duration += truth[k].alignment.num_frames() * truth[k].alignment.frame_duration;
    const auto r1 = truth[k].alignment.ToFrames(), h1 = pred[k].alignment.ToFrames();
    rf.insert(rf.end(), r1.begin(), r1.end());
    hf.insert(hf.end(), h1.begin(), h1.end());
  }
  CHECK(r.per == doctest::Approx(static_cast<double>(errors) / phones).epsilon(1e-12));
  CHECK(r.dper == doctest::Approx(cost / duration).epsilon(1e-12));
  CHECK(r.utterances[0].per == doctest::Approx(2.0 / 6.0));
  int64_t correct = 0;
  for (std::size_t f = 0; f != rf.size(); ++f) correct += rf[f] == hf[f];
  CHECK(r.frame_f1.micro == doctest::Approx(static_cast<double>(correct) / rf.size()));
  REQUIRE(r.iwer.has_value());
  CHECK(*r.iwer == doctest::Approx(1.0 / 4.0));

  // Events: pred {Pause b (IoU 26/30), Insertion b}, gt {Repetition a, Pause b}.
  CHECK(r.phoneme_events.true_positives == 1);
  CHECK(r.phoneme_events.false_positives == 1);
  CHECK(r.phoneme_events.false_negatives == 1);
  CHECK(r.phoneme_events.f1 == doctest::Approx(0.5));
  // Order 1 loses the first word of b.
  CHECK(r.segmentation[0].f1 == 1.0);
  CHECK(r.segmentation[1].true_positives == 3);
  CHECK(r.segmentation[1].f1 == doctest::Approx(0.75));

  const std::string csv = SegmentationCsv(r);
  CHECK(csv.rfind("order,true_positives,", 0) == 0);
  CHECK(csv.find("\n1,3,1,1,0.75,0.75,0.75\n") != std::string::npos);
  const Json j = ToJson(r);
  CHECK(j.at("aggregate").at("utterances") == 3);
  CHECK(j.at("utterances").size() == 3);
}

TEST_CASE("ParallelFor visits every index once") {
  for (int32_t workers : {1, 2, 7}) {
    std::vector<std::atomic<int>> hits(101);
    ParallelFor(hits.size(), workers, [&](std::size_t i) { ++hits[i]; });
    for (const auto &h : hits) CHECK(h == 1);
  }
  ParallelFor(0, 4, [](std::size_t) { FAIL("called on empty range"); });
}

TEST_CASE("processing a noiseless simulated utterance finds its events") {
  PipelineConfig cfg;
  const Resources res = Resources::Load(cfg);
  CorpusConfig corpus;
  corpus.seed = 5;
  corpus.injection.repetition_rate = 0.3;
  int with_events = 0;
  for (int32_t i = 0; i != 10; ++i) {
    const SimulatedUtterance u = SimulateUtterance(corpus, i, res.lexicon, res.inventory);
    const UtteranceResult r = ProcessUtterance(u.emission, u.ref, &u.hypothesis, res, cfg);
    CHECK(r.state.orders.size() == 4);
    CHECK(r.detect_order == 0);
    REQUIRE(r.word.has_value());
    if (!u.truth.events.empty()) {
      ++with_events;
      CHECK_FALSE(r.phoneme_events.empty());
    }
    const Json doc = EventsDocument(u.id, r);
    CHECK(doc.at("refreshed").at("tokens").size() >= u.ref.num_words());
    const PredictionRecord p = PredictionFromDocuments(ToJson(r.state), doc, res.inventory);
    CHECK(p.words_by_order.size() == 4);
    CHECK(p.alignment == r.state.orders[0].segments);

    const TruthRecord t = TruthFromDocument(TruthDocument(u, res.inventory), res.inventory);
    CHECK(t.alignment == u.truth.disfluent.segments);
    CHECK(t.events.size() == u.truth.events.size());
  }
  CHECK(with_events > 0);
}
