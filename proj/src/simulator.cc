// src/simulator.cc

#include "dysflux/simulator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

namespace dysflux {

namespace {

void CheckRange(const DurationRange &r, const char *name) {
  if (!(r.min_s >= 0.0 && r.min_s <= r.max_s)) {
    throw DataError(std::string(name) + " range must satisfy 0 <= min <= max");
  }
}

int32_t ToFrames(double seconds, double frame_duration) {
  return static_cast<int32_t>(std::lround(seconds / frame_duration));
}

struct Item {
  PhoneId phone;
  int32_t frames;
  int32_t row;
  int32_t word;
  bool inserted = false;
  int32_t extra = 0;  // prolongation frames appended to an original segment
};

struct PendingEvent {
  std::optional<EventKind> kind;  // empty for a prolongation
  std::size_t first, last;        // item indices; for Missing, first is the junction
  int32_t row;
  PhoneId phone;
};

using Decide = std::function<std::optional<InjectionKind>(
    std::size_t index, const bool eligible[4])>;

GroundTruth Process(const TaggedAlignment &clean, const InjectionSpec &spec,
                    const PhonemeInventory &inv, Rng &rng, const Decide &decide) {
  spec.Validate();
  const auto &segs = clean.segments;
  if (segs.empty()) throw DataError("cannot inject into an empty alignment");
  CheckCanonical(segs);
  if (clean.rows.size() != segs.size() || clean.words.size() != segs.size()) {
    throw DataError("row and word tags must match the segment count");
  }
  const double fd = segs.frame_duration;
  const std::size_t n = segs.size();

  std::vector<int32_t> word_size;
  for (int32_t w : clean.words) {
    if (w < 0) continue;
    if (static_cast<std::size_t>(w) >= word_size.size()) word_size.resize(w + 1, 0);
    ++word_size[w];
  }
  auto is_sil = [&](std::size_t i) { return inv.IsSilence(segs.segments[i].phone); };

  GroundTruth gt;
  gt.clean = clean;
  std::vector<Item> out;
  std::vector<PendingEvent> pending;
  std::vector<std::pair<std::size_t, Segment>> removed;  // (item junction, segment)
  bool just_deleted = false;

  for (std::size_t i = 0; i < n;) {
    const Segment &s = segs.segments[i];
    const Item original{s.phone, s.frames(), clean.rows[i], clean.words[i]};
    bool eligible[4] = {false, false, false, false};
    if (!is_sil(i)) {
      const std::size_t span = static_cast<std::size_t>(spec.repeat_span);
      eligible[0] = i + span <= n;
      for (std::size_t k = i; k < i + span && k < n; ++k) eligible[0] = eligible[0] && !is_sil(k);
      eligible[1] = true;
      const bool after_speech = !out.empty() && !inv.IsSilence(out.back().phone);
      eligible[2] = after_speech;
      if (after_speech && !just_deleted && i + 1 < n && !is_sil(i + 1) &&
          clean.words[i] >= 0 && word_size[clean.words[i]] >= 2) {
        const PhoneId left = out.back().phone, right = segs.segments[i + 1].phone;
        eligible[3] = left != right &&
                      inv.Similarity(s.phone, left) < spec.missing_max_similarity &&
                      inv.Similarity(s.phone, right) < spec.missing_max_similarity;
      }
    }
    const std::optional<InjectionKind> kind = decide(i, eligible);
    just_deleted = false;

    if (!kind) {
      out.push_back(original);
      ++i;
      continue;
    }
    switch (*kind) {
      case InjectionKind::kRepetition: {
        const std::size_t span = static_cast<std::size_t>(spec.repeat_span);
        const std::size_t first = out.size();
        for (std::size_t k = i; k != i + span; ++k) {
          out.push_back({segs.segments[k].phone, segs.segments[k].frames(), clean.rows[k],
                         clean.words[k]});
        }
        const bool need_gap = segs.segments[i].phone == segs.segments[i + span - 1].phone;
        for (int32_t c = 0; c != spec.repeat_count; ++c) {
          int32_t gap = ToFrames(rng.Uniform(spec.repetition_gap.min_s, spec.repetition_gap.max_s), fd);
          if (need_gap) gap = std::max(gap, 1);
          if (gap > 0) out.push_back({inv.silence(), gap, -1, clean.words[i], true});
          for (std::size_t k = i; k != i + span; ++k) {
            out.push_back({segs.segments[k].phone, segs.segments[k].frames(), clean.rows[k],
                           clean.words[k], true});
          }
        }
        pending.push_back({EventKind::kRepetition, first, out.size() - 1, clean.rows[i], s.phone});
        i += span;
        break;
      }
      case InjectionKind::kProlongation: {
        Item it = original;
        it.extra = std::max(1, ToFrames(rng.Uniform(spec.prolongation.min_s, spec.prolongation.max_s), fd));
        it.frames += it.extra;
        out.push_back(it);
        pending.push_back({std::nullopt, out.size() - 1, out.size() - 1, -1, s.phone});
        ++i;
        break;
      }
      case InjectionKind::kBlock: {
        const int32_t frames = std::max(1, ToFrames(rng.Uniform(spec.block.min_s, spec.block.max_s), fd));
        const int32_t word = out.back().word == clean.words[i] ? clean.words[i] : -1;
        out.push_back({inv.silence(), frames, -1, word, true});
        pending.push_back({EventKind::kIrregularPause, out.size() - 1, out.size() - 1, -1, s.phone});
        out.push_back(original);
        ++i;
        break;
      }
      case InjectionKind::kMissing: {
        removed.emplace_back(out.size(), s);
        pending.push_back({EventKind::kMissing, out.size(), out.size(), clean.rows[i], s.phone});
        just_deleted = true;
        ++i;
        break;
      }
    }
  }

  // Frame offsets of every item (one extra entry for the end).
  std::vector<int32_t> start(out.size() + 1, 0);
  for (std::size_t k = 0; k != out.size(); ++k) start[k + 1] = start[k] + out[k].frames;
  const double total_s = start.back() * fd;

  TaggedAlignment &d = gt.disfluent;
  d.segments.frame_duration = fd;
  for (std::size_t k = 0; k != out.size(); ++k) {
    d.segments.segments.push_back({out[k].phone, start[k], start[k + 1]});
    d.rows.push_back(out[k].row);
    d.words.push_back(out[k].word);
    if (out[k].inserted) gt.inserted.emplace_back(start[k], start[k + 1]);
    if (out[k].extra > 0) gt.inserted.emplace_back(start[k + 1] - out[k].extra, start[k + 1]);
  }
  CheckCanonical(d.segments);
  for (const auto &[junction, seg] : removed) gt.removed.emplace_back(start[junction], seg);

  for (const PendingEvent &p : pending) {
    if (!p.kind) {
      gt.prolongations.push_back({start[p.first] * fd, start[p.first + 1] * fd});
      continue;
    }
    DisfluencyEvent e;
    e.level = EventLevel::kPhoneme;
    e.kind = *p.kind;
    if (p.row >= 0) {
      e.target = p.row;
      e.target_label = inv.Symbol(p.phone);
    }
    if (p.kind == EventKind::kMissing) {
      const double at = start[p.first] * fd, half = spec.missing_window_s / 2;
      e.interval = {std::max(0.0, at - half), std::min(total_s, at + half)};
    } else {
      e.interval = {start[p.first] * fd, start[p.last + 1] * fd};
    }
    e.source = "simulator";
    gt.events.push_back(std::move(e));
  }
  return gt;
}

}  // namespace

void InjectionSpec::Validate() const {
  for (double r : {repetition_rate, prolongation_rate, block_rate, missing_rate}) {
    if (!(r >= 0.0 && r <= 1.0)) throw DataError("injection rates must lie in [0, 1]");
  }
  CheckRange(prolongation, "prolongation");
  CheckRange(block, "block");
  CheckRange(repetition_gap, "repetition gap");
  if (repeat_count < 1 || repeat_span < 1) {
    throw DataError("repeat_count and repeat_span must be >= 1");
  }
  if (!(missing_window_s > 0.0)) throw DataError("missing_window_s must be positive");
}

std::vector<std::optional<Interval>> GroundTruth::WordSpans(std::size_t num_words) const {
  std::vector<std::optional<Interval>> spans(num_words);
  const double fd = disfluent.segments.frame_duration;
  for (std::size_t k = 0; k != disfluent.segments.size(); ++k) {
    const int32_t w = disfluent.words[k];
    if (w < 0 || static_cast<std::size_t>(w) >= num_words) continue;
    const Segment &s = disfluent.segments.segments[k];
    if (!spans[w]) {
      spans[w] = Interval{s.start * fd, s.end * fd};
    } else {
      spans[w]->end_s = s.end * fd;
    }
  }
  return spans;
}

GroundTruth Inject(const TaggedAlignment &clean, const InjectionSpec &spec,
                   const PhonemeInventory &inv) {
  Rng rng(spec.seed);
  const double rates[4] = {spec.repetition_rate, spec.prolongation_rate, spec.block_rate,
                           spec.missing_rate};
  return Process(clean, spec, inv, rng,
                 [&](std::size_t, const bool eligible[4]) -> std::optional<InjectionKind> {
                   for (int k = 0; k != 4; ++k) {
                     if (eligible[k] && rates[k] > 0.0 && rng.Bernoulli(rates[k])) {
                       return static_cast<InjectionKind>(k);
                     }
                   }
                   return std::nullopt;
                 });
}

GroundTruth InjectAt(const TaggedAlignment &clean, std::size_t index, InjectionKind kind,
                     const InjectionSpec &spec, const PhonemeInventory &inv) {
  Rng rng(spec.seed);
  bool applied = false;
  GroundTruth gt = Process(
      clean, spec, inv, rng,
      [&](std::size_t i, const bool eligible[4]) -> std::optional<InjectionKind> {
        if (i != index) return std::nullopt;
        if (!eligible[static_cast<int>(kind)]) {
          throw DataError("segment " + std::to_string(index) + " is not eligible");
        }
        applied = true;
        return kind;
      });
  if (!applied) throw DataError("segment " + std::to_string(index) + " out of range");
  return gt;
}

AlignmentSegments Reconstruct(const GroundTruth &gt) {
  const auto &d = gt.disfluent.segments;
  std::vector<bool> drop(d.num_frames(), false);
  for (auto [a, b] : gt.inserted)
    for (int32_t f = a; f != b; ++f) drop[f] = true;

  const std::vector<PhoneId> frames = d.ToFrames();
  std::vector<PhoneId> kept;
  std::size_t next_removed = 0;
  auto restore = [&](int32_t at) {
    while (next_removed != gt.removed.size() && gt.removed[next_removed].first == at) {
      const Segment &s = gt.removed[next_removed++].second;
      kept.insert(kept.end(), s.frames(), s.phone);
    }
  };
  for (int32_t f = 0; f != d.num_frames(); ++f) {
    restore(f);
    if (!drop[f]) kept.push_back(frames[f]);
  }
  restore(d.num_frames());
  return AlignmentSegments::FromFrames(kept, d.frame_duration);
}

EmissionInput SynthesizeEmission(const AlignmentSegments &segs, const PhonemeInventory &inv,
                                 const EmissionSynthesis &cfg) {
  if (!(cfg.sharpness > 0.0)) throw DataError("sharpness must be positive");
  if (!(cfg.noise >= 0.0)) throw DataError("noise must be nonnegative");
  Rng rng(cfg.seed);
  const std::size_t n = inv.size();
  const std::vector<PhoneId> frames = segs.ToFrames();
  EmissionInput e;
  e.frame_duration = segs.frame_duration;
  e.log_posteriors = Matrix<double>(frames.size(), n);
  e.boundary_probs.resize(frames.size());
  const double scale = cfg.noise * cfg.sharpness;

  std::vector<double> z(n);
  for (std::size_t t = 0; t != frames.size(); ++t) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k != n; ++k) {
      z[k] = (static_cast<PhoneId>(k) == frames[t] ? cfg.sharpness : 0.0);
      if (scale > 0.0) z[k] += scale * rng.Normal();
      top = std::max(top, z[k]);
    }
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - top);
    const double log_norm = top + std::log(sum);
    for (std::size_t k = 0; k != n; ++k) e.log_posteriors(t, k) = z[k] - log_norm;

    const bool starts = t > 0 && frames[t] != frames[t - 1];
    double b = starts ? cfg.boundary_high : cfg.boundary_low;
    if (cfg.noise > 0.0) b += cfg.noise / 2 * rng.Normal();
    e.boundary_probs[t] = std::clamp(b, 0.0, 1.0);
  }
  return e;
}

SyntheticUtterance GenerateUtterance(const Lexicon &lex, const PhonemeInventory &inv,
                                     const UtteranceConfig &cfg, Rng &rng) {
  if (cfg.min_words < 1 || cfg.max_words < cfg.min_words) {
    throw DataError("word count range must satisfy 1 <= min <= max");
  }
  const auto &entries = lex.entries();
  if (entries.empty()) throw DataError("lexicon is empty");
  std::vector<const std::pair<const std::string, std::vector<PhoneId>> *> pool;
  for (const auto &e : entries) pool.push_back(&e);

  const int64_t count = rng.UniformInt(cfg.min_words, cfg.max_words);
  std::vector<ReferenceWord> words;
  for (int64_t w = 0; w != count; ++w) {
    const auto *e = pool[rng.UniformInt(0, static_cast<int64_t>(pool.size()) - 1)];
    words.push_back({e->first, e->second});
  }

  SyntheticUtterance u;
  u.ref = ReferenceText(words, inv);
  const double fd = cfg.frame_duration;
  auto frames = [&](const DurationRange &r) {
    return std::max(1, ToFrames(rng.Uniform(r.min_s, r.max_s), fd));
  };
  std::vector<PhoneId> labels;
  std::vector<int32_t> lengths, rows, word_tags;
  auto push = [&](PhoneId p, int32_t len, int32_t row, int32_t word) {
    labels.push_back(p);
    lengths.push_back(len);
    rows.push_back(row);
    word_tags.push_back(word);
  };

  push(inv.silence(), frames(cfg.edge_silence), -1, -1);
  for (std::size_t w = 0; w != u.ref.num_words(); ++w) {
    if (w > 0) {
      const bool clash = u.ref.phones()[u.ref.FirstRow(w)] == labels.back();
      if (clash || rng.Bernoulli(cfg.pause_rate)) push(inv.silence(), frames(cfg.pause), -1, -1);
    }
    for (std::size_t r = u.ref.FirstRow(w); r != u.ref.EndRow(w); ++r) {
      push(u.ref.phones()[r], frames(cfg.phone), static_cast<int32_t>(r), static_cast<int32_t>(w));
    }
  }
  push(inv.silence(), frames(cfg.edge_silence), -1, -1);

  u.clean.segments.frame_duration = fd;
  int32_t f = 0;
  for (std::size_t k = 0; k != labels.size(); ++k) {
    u.clean.segments.segments.push_back({labels[k], f, f + lengths[k]});
    f += lengths[k];
  }
  u.clean.rows = std::move(rows);
  u.clean.words = std::move(word_tags);
  CheckCanonical(u.clean.segments);
  return u;
}

SimulatedUtterance SimulateUtterance(const CorpusConfig &cfg, int32_t index,
                                     const Lexicon &lex, const PhonemeInventory &inv) {
  Rng rng(DeriveSeed(cfg.seed, static_cast<uint64_t>(index)));
  SimulatedUtterance u;
  char id[32];
  std::snprintf(id, sizeof id, "utt%05d", index);
  u.id = id;
  SyntheticUtterance base = GenerateUtterance(lex, inv, cfg.utterance, rng);
  u.ref = std::move(base.ref);

  InjectionSpec spec = cfg.injection;
  spec.seed = rng.Next();
  u.truth = Inject(base.clean, spec, inv);

  EmissionSynthesis synth = cfg.emission;
  synth.seed = rng.Next();
  u.emission = SynthesizeEmission(u.truth.disfluent.segments, inv, synth);

  const auto spans = u.truth.WordSpans(u.ref.num_words());
  for (std::size_t w = 0; w != u.ref.num_words(); ++w) {
    if (!spans[w]) continue;
    u.hypothesis.words.push_back({u.ref.words()[w].text, spans[w]->start_s, spans[w]->end_s});
  }
  return u;
}

}  // namespace dysflux
