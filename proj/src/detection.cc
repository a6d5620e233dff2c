// src/detection.cc

#include "dysflux/detection.h"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "dysflux/reference.h"

namespace dysflux {

std::string_view ToString(EventKind k) {
  switch (k) {
    case EventKind::kMissing: return "Missing";
    case EventKind::kRepetition: return "Repetition";
    case EventKind::kInsertion: return "Insertion";
    case EventKind::kReplacement: return "Replacement";
    case EventKind::kIrregularPause: return "IrregularPause";
  }
  return "?";
}

std::string_view ToString(EventLevel l) {
  return l == EventLevel::kPhoneme ? "phoneme" : "word";
}

EventKind ParseEventKind(std::string_view s) {
  for (EventKind k : {EventKind::kMissing, EventKind::kRepetition, EventKind::kInsertion,
                      EventKind::kReplacement, EventKind::kIrregularPause}) {
    if (ToString(k) == s) return k;
  }
  throw DataError("unknown event kind '" + std::string(s) + "'");
}

EventLevel ParseEventLevel(std::string_view s) {
  if (s == "phoneme") return EventLevel::kPhoneme;
  if (s == "word") return EventLevel::kWord;
  throw DataError("unknown event level '" + std::string(s) + "'");
}

double DisfluencyEvent::EvidenceMass() const {
  double mass = 0.0;
  for (const Cell &c : evidence) {
    mass += kind == EventKind::kRepetition ? c.similarity : 1.0 - c.similarity;
  }
  return mass;
}

void DetectConfig::Validate() const {
  if (!(match_threshold >= 0.0 && match_threshold <= 1.0)) {
    throw DataError("match threshold must lie in [0, 1]");
  }
  if (!(pause_min_s >= 0.0)) throw DataError("pause_min_s must be nonnegative");
  if (!(missing_window_s > 0.0)) throw DataError("missing_window_s must be positive");
}

namespace {

bool EventOrder(const DisfluencyEvent &x, const DisfluencyEvent &y) {
  return std::tuple(x.interval.start_s, x.kind, x.target.value_or(-1), x.interval.end_s) <
         std::tuple(y.interval.start_s, y.kind, y.target.value_or(-1), y.interval.end_s);
}

Interval ColumnSpan(const Alignment2D &a, int32_t first, int32_t last) {
  return {a.segs.TimeSpan(first).start_s, a.segs.TimeSpan(last).end_s};
}

Cell MakeCell(const Alignment2D &a, int32_t row, int32_t col) {
  return {row, col, a.similarity(row, col)};
}

std::string RowLabel(const Alignment2D &a, int32_t row) {
  return a.inventory->Symbol(a.ref.phones()[row]);
}

// Precomputed per-column and per-row views of the DTW path.
struct PathView {
  std::vector<std::vector<int32_t>> rows_of_col;
  std::vector<std::vector<int32_t>> cols_of_row;
  std::vector<int32_t> best_row;   // path row with the highest similarity
  std::vector<bool> col_matched;   // best path row reaches the threshold

  PathView(const Alignment2D &a, const DtwPath &path, double tau)
      : rows_of_col(path.RowsByColumn(a.cols())),
        cols_of_row(path.ColumnsByRow(a.rows())),
        best_row(a.cols()),
        col_matched(a.cols()) {
    for (std::size_t j = 0; j != a.cols(); ++j) {
      int32_t best = rows_of_col[j].front();
      for (int32_t r : rows_of_col[j]) {
        if (a.similarity(r, j) > a.similarity(best, j)) best = r;
      }
      best_row[j] = best;
      col_matched[j] = !a.silence[j] && a.similarity(best, j) >= tau;
    }
  }

  // Column range covered by the path for rows [lo, hi].
  std::pair<int32_t, int32_t> ColumnRange(int32_t lo, int32_t hi) const {
    int32_t first = std::numeric_limits<int32_t>::max(), last = -1;
    for (int32_t r = lo; r <= hi; ++r) {
      for (int32_t c : cols_of_row[r]) {
        first = std::min(first, c);
        last = std::max(last, c);
      }
    }
    return {first, last};
  }
};

}  // namespace

std::vector<DisfluencyEvent> DetectPhoneme(const Alignment2D &a, const DtwPath &path,
                                           const DetectConfig &cfg) {
  cfg.Validate();
  const int32_t rows = static_cast<int32_t>(a.rows());
  const int32_t cols = static_cast<int32_t>(a.cols());
  const double tau = cfg.match_threshold;
  const PathView view(a, path, tau);
  const double total_s = a.segs.num_frames() * a.segs.frame_duration;

  int32_t first_speech = -1, last_speech = -1;
  for (int32_t j = 0; j != cols; ++j) {
    if (a.silence[j]) continue;
    if (first_speech < 0) first_speech = j;
    last_speech = j;
  }

  std::vector<DisfluencyEvent> events;
  auto event = [&](EventKind kind, std::optional<int32_t> row, Interval span) {
    DisfluencyEvent e;
    e.level = EventLevel::kPhoneme;
    e.kind = kind;
    e.target = row;
    if (row) e.target_label = RowLabel(a, *row);
    e.interval = span;
    return e;
  };

  // Missing and Replacement.
  std::vector<bool> row_absent(rows, false);
  for (int32_t i = 0; i != rows; ++i) {
    const auto [lo, hi] = view.ColumnRange(std::max(0, i - 1), std::min(rows - 1, i + 1));
    bool hit = false;
    for (int32_t c : view.cols_of_row[i]) {
      if (!a.silence[c] && a.similarity(i, c) >= tau) hit = true;
    }
    for (int32_t j = lo; j <= hi && !hit; ++j) {
      if (a.assignment[j] == i) hit = true;
    }
    if (hit) continue;
    row_absent[i] = true;

    std::vector<int32_t> own;
    for (int32_t c : view.cols_of_row[i]) {
      if (!a.silence[c] && !a.assignment[c] && view.best_row[c] == i) own.push_back(c);
    }
    if (!own.empty()) {
      // Longest contiguous block; the first on ties.
      std::size_t best_start = 0, best_len = 0;
      for (std::size_t s = 0; s != own.size();) {
        std::size_t e = s + 1;
        while (e != own.size() && own[e] == own[e - 1] + 1) ++e;
        if (e - s > best_len) {
          best_start = s;
          best_len = e - s;
        }
        s = e;
      }
      auto ev = event(EventKind::kReplacement, i,
                      ColumnSpan(a, own[best_start], own[best_start + best_len - 1]));
      for (std::size_t k = best_start; k != best_start + best_len; ++k) {
        ev.evidence.push_back(MakeCell(a, i, own[k]));
      }
      events.push_back(std::move(ev));
      continue;
    }

    // Where the phoneme should have been: after the last nearby column
    // assigned to an earlier row, else before the first assigned to a later
    // row, else after the last matched column of an earlier row.
    std::optional<double> gap;
    for (int32_t j = lo; j <= hi; ++j) {
      if (a.assignment[j] && *a.assignment[j] < i) gap = a.segs.TimeSpan(j).end_s;
    }
    for (int32_t j = lo; j <= hi && !gap; ++j) {
      if (a.assignment[j] && *a.assignment[j] > i) gap = a.segs.TimeSpan(j).start_s;
    }
    if (!gap) {
      gap = first_speech >= 0 ? a.segs.TimeSpan(first_speech).start_s : 0.0;
      for (int32_t j = 0; j != cols; ++j) {
        if (view.col_matched[j] && view.best_row[j] < i) gap = a.segs.TimeSpan(j).end_s;
      }
    }
    const double half = cfg.missing_window_s / 2;
    auto ev = event(EventKind::kMissing, i,
                    {std::max(0.0, *gap - half), std::min(total_s, *gap + half)});
    for (int32_t c : view.cols_of_row[i]) ev.evidence.push_back(MakeCell(a, i, c));
    events.push_back(std::move(ev));
  }

  // Repetition: one candidate per row, then overlapping candidates merge.
  struct Candidate {
    int32_t row, first, last;
    std::vector<int32_t> cols;
  };
  std::vector<Candidate> reps;
  for (int32_t i = 0; i != rows; ++i) {
    if (row_absent[i]) continue;
    const auto [lo, hi] = view.ColumnRange(std::max(0, i - 1), std::min(rows - 1, i + 1));
    std::vector<int32_t> assigned;
    for (int32_t j = lo; j <= hi; ++j) {
      if (!a.silence[j] && a.assignment[j] == i) assigned.push_back(j);
    }
    if (assigned.size() < 2) continue;
    // Keep the columns whose labels are mutually similar to the column that
    // best matches the row.
    const int32_t anchor = *std::max_element(
        assigned.begin(), assigned.end(),
        [&](int32_t x, int32_t y) { return a.similarity(i, x) < a.similarity(i, y); });
    std::vector<int32_t> similar;
    for (int32_t j : assigned) {
      bool ok = a.ColumnSimilarity(j, anchor) >= tau;
      for (int32_t k : similar) ok = ok && a.ColumnSimilarity(j, k) >= tau;
      if (ok) similar.push_back(j);
    }
    if (similar.size() < 2 || similar.back() - similar.front() < 2) continue;
    reps.push_back({i, similar.front(), similar.back(), similar});
  }
  std::sort(reps.begin(), reps.end(),
            [](const Candidate &x, const Candidate &y) { return x.first < y.first; });
  std::vector<std::pair<int32_t, int32_t>> rep_ranges;
  for (std::size_t k = 0; k != reps.size();) {
    Candidate merged = reps[k];
    std::vector<Cell> cells;
    for (int32_t j : reps[k].cols) cells.push_back(MakeCell(a, reps[k].row, j));
    std::size_t n = k + 1;
    while (n != reps.size() && reps[n].first <= merged.last) {
      merged.last = std::max(merged.last, reps[n].last);
      merged.row = std::min(merged.row, reps[n].row);
      for (int32_t j : reps[n].cols) cells.push_back(MakeCell(a, reps[n].row, j));
      ++n;
    }
    auto ev = event(EventKind::kRepetition, merged.row,
                    ColumnSpan(a, merged.first, merged.last));
    ev.evidence = std::move(cells);
    events.push_back(std::move(ev));
    rep_ranges.emplace_back(merged.first, merged.last);
    k = n;
  }

  // Insertion: a neighbour of a matched path cell that also matches the row
  // but lies off the row's path and is not matched by its own path row.
  std::set<int32_t> rep_rows;
  for (const auto &c : reps) rep_rows.insert(c.row);
  auto inside_repetition = [&](int32_t j) {
    return std::any_of(rep_ranges.begin(), rep_ranges.end(),
                       [&](auto r) { return j >= r.first && j <= r.second; });
  };
  std::set<std::pair<int32_t, int32_t>> inserted;  // (col, row)
  for (int32_t i = 0; i != rows; ++i) {
    if (row_absent[i] || rep_rows.count(i)) continue;
    const auto &own = view.cols_of_row[i];
    for (int32_t c : own) {
      if (a.silence[c] || a.similarity(i, c) < tau) continue;
      for (int32_t n : {c - 1, c + 1}) {
        if (n < 0 || n >= cols || a.silence[n]) continue;
        if (std::find(own.begin(), own.end(), n) != own.end()) continue;
        if (a.similarity(i, n) < tau || view.col_matched[n]) continue;
        if (inside_repetition(n)) continue;
        if (!inserted.emplace(n, i).second) continue;
        auto ev = event(EventKind::kInsertion, i, ColumnSpan(a, n, n));
        ev.evidence = {MakeCell(a, i, c), MakeCell(a, i, n)};
        events.push_back(std::move(ev));
      }
    }
  }

  // Irregular pauses strictly inside the speech span.
  for (int32_t j = first_speech + 1; first_speech >= 0 && j < last_speech; ++j) {
    if (!a.silence[j] || a.segs.Duration(j) < cfg.pause_min_s) continue;
    auto ev = event(EventKind::kIrregularPause, std::nullopt, ColumnSpan(a, j, j));
    ev.evidence = {MakeCell(a, view.best_row[j], j)};
    events.push_back(std::move(ev));
  }

  std::sort(events.begin(), events.end(), EventOrder);
  return events;
}

std::vector<std::pair<int32_t, int32_t>> AlignWords(const std::vector<std::string> &ref,
                                                    const std::vector<std::string> &hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  Matrix<int32_t> d(n + 1, m + 1, 0);
  for (std::size_t i = 0; i <= n; ++i) d(i, 0) = static_cast<int32_t>(i);
  for (std::size_t j = 0; j <= m; ++j) d(0, j) = static_cast<int32_t>(j);
  auto same = [&](std::size_t i, std::size_t j) { return ToLower(ref[i]) == ToLower(hyp[j]); };
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      d(i, j) = std::min({d(i - 1, j - 1) + (same(i - 1, j - 1) ? 0 : 1), d(i - 1, j) + 1,
                          d(i, j - 1) + 1});
    }
  }
  std::vector<std::pair<int32_t, int32_t>> out;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && d(i, j) == d(i - 1, j - 1) + (same(i - 1, j - 1) ? 0 : 1)) {
      out.emplace_back(static_cast<int32_t>(--i), static_cast<int32_t>(--j));
    } else if (i > 0 && d(i, j) == d(i - 1, j) + 1) {
      out.emplace_back(static_cast<int32_t>(--i), -1);
    } else {
      out.emplace_back(-1, static_cast<int32_t>(--j));
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

namespace {

int32_t AssignedWord(const Alignment2D &a, int32_t j) {
  return a.assignment[j] ? a.ref.WordOf(*a.assignment[j]) : -1;
}

}  // namespace

TextRefreshResult TextRefresh(const Alignment2D &a, const AsrHypothesis &hyp,
                              const DetectConfig &cfg) {
  cfg.Validate();
  TextRefreshResult out;
  out.empty_hypothesis = hyp.words.empty();
  const int32_t cols = static_cast<int32_t>(a.cols());

  // Word insertions.
  std::vector<DisfluencyEvent> insertions;
  for (int32_t j = 0; j < cols;) {
    if (a.silence[j] || a.assignment[j]) {
      ++j;
      continue;
    }
    int32_t end = j;
    while (end + 1 < cols && !a.silence[end + 1] && !a.assignment[end + 1]) ++end;
    int32_t left = -1, right = -1;
    for (int32_t k = j - 1; k >= 0 && left < 0; --k) left = AssignedWord(a, k);
    for (int32_t k = end + 1; k < cols && right < 0; ++k) right = AssignedWord(a, k);
    if (left < 0 || right < 0 || left != right) {
      DisfluencyEvent ev;
      ev.level = EventLevel::kWord;
      ev.kind = EventKind::kInsertion;
      ev.source = "text_refresh";
      ev.interval = ColumnSpan(a, j, end);
      for (int32_t k = j; k <= end; ++k) {
        if (!ev.target_label.empty()) ev.target_label += ' ';
        ev.target_label += a.ColumnLabel(k);
        int32_t best = 0;
        for (int32_t r = 1; r != static_cast<int32_t>(a.rows()); ++r) {
          if (a.similarity(r, k) > a.similarity(best, k)) best = r;
        }
        ev.evidence.push_back(MakeCell(a, best, k));
      }
      insertions.push_back(std::move(ev));
    }
    j = end + 1;
  }

  // Word deletions.
  std::vector<std::string> ref_words, hyp_words;
  for (const auto &w : a.ref.words()) ref_words.push_back(w.text);
  for (const auto &w : hyp.words) hyp_words.push_back(w.word);
  std::vector<bool> deleted(hyp.words.size(), false);
  std::vector<DisfluencyEvent> missing;
  for (auto [r, h] : AlignWords(ref_words, hyp_words)) {
    if (r < 0 || h < 0) continue;
    const AsrWord &hw = hyp.words[h];
    bool found = false;
    DisfluencyEvent ev;
    for (int32_t j = 0; j != cols; ++j) {
      const Interval span = a.segs.TimeSpan(j);
      if (span.end_s <= hw.start_s || span.start_s >= hw.end_s || a.silence[j]) continue;
      if (AssignedWord(a, j) == r) {
        found = true;
        break;
      }
      int32_t best = static_cast<int32_t>(a.ref.FirstRow(r));
      for (auto row = best; row != static_cast<int32_t>(a.ref.EndRow(r)); ++row) {
        if (a.similarity(row, j) > a.similarity(best, j)) best = row;
      }
      ev.evidence.push_back(MakeCell(a, best, j));
    }
    if (found) continue;
    if (ev.evidence.empty()) {
      // Nothing decoded under the word at all: one unit of absence per phoneme.
      for (auto row = a.ref.FirstRow(r); row != a.ref.EndRow(r); ++row) {
        ev.evidence.push_back({static_cast<int32_t>(row), -1, 0.0});
      }
    }
    ev.level = EventLevel::kWord;
    ev.kind = EventKind::kMissing;
    ev.source = "text_refresh";
    ev.target = r;
    ev.target_label = a.ref.words()[r].text;
    ev.interval = {hw.start_s, hw.end_s};
    missing.push_back(std::move(ev));
    deleted[h] = true;
  }

  // Refreshed transcript: hypothesis words and insertion runs in time order.
  std::size_t next_insert = 0;
  auto flush_insertions = [&](double before) {
    while (next_insert != insertions.size() &&
           insertions[next_insert].interval.start_s < before) {
      const auto &ins = insertions[next_insert++];
      RefreshedWord w;
      w.start_s = ins.interval.start_s;
      w.end_s = ins.interval.end_s;
      w.tag = "insertion";
      w.word = ins.target_label;
      out.words.push_back(std::move(w));
    }
  };
  for (std::size_t h = 0; h != hyp.words.size(); ++h) {
    flush_insertions(hyp.words[h].start_s);
    out.words.push_back({hyp.words[h].word, hyp.words[h].start_s, hyp.words[h].end_s,
                         deleted[h] ? "deletion" : ""});
  }
  flush_insertions(std::numeric_limits<double>::infinity());

  for (const auto &w : out.words) {
    if (!out.transcript.empty()) out.transcript += ' ';
    if (w.tag == "insertion") {
      out.transcript += "[" + w.word + "]";
    } else if (w.tag == "deletion") {
      out.transcript += "(" + w.word + ")";
    } else {
      out.transcript += w.word;
    }
  }
  if (out.empty_hypothesis) out.transcript.clear();

  out.events = std::move(insertions);
  out.events.insert(out.events.end(), missing.begin(), missing.end());
  std::sort(out.events.begin(), out.events.end(), EventOrder);
  return out;
}

WordDetection DetectWord(const Alignment2D &m, const Alignment2D &a,
                         const AsrHypothesis *hyp, const DetectConfig &cfg) {
  cfg.Validate();
  WordDetection out;
  const int32_t cols = static_cast<int32_t>(a.cols());

  // Word-axis projection: runs of assigned speech columns. A run ends when
  // the word changes or the row restarts within the same word.
  struct Run {
    int32_t word, first, last, max_row;
    std::vector<int32_t> cols;
  };
  std::vector<Run> runs;
  int32_t prev_row = -1;
  for (int32_t j = 0; j != cols; ++j) {
    if (a.silence[j] || !a.assignment[j]) continue;
    const int32_t row = *a.assignment[j];
    const int32_t w = a.ref.WordOf(row);
    if (runs.empty() || runs.back().word != w || row <= prev_row) {
      runs.push_back({w, j, j, row, {}});
    }
    Run &r = runs.back();
    r.last = j;
    r.max_row = std::max(r.max_row, row);
    r.cols.push_back(j);
    prev_row = row;
  }
  for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
    const Run &x = runs[k], &y = runs[k + 1];
    if (x.word != y.word) continue;
    if (x.max_row != static_cast<int32_t>(a.ref.EndRow(x.word)) - 1) continue;
    DisfluencyEvent ev;
    ev.level = EventLevel::kWord;
    ev.kind = EventKind::kRepetition;
    ev.target = x.word;
    ev.target_label = a.ref.words()[x.word].text;
    ev.interval = ColumnSpan(a, x.first, y.last);
    for (const Run *r : {&x, &y}) {
      for (int32_t j : r->cols) ev.evidence.push_back(MakeCell(a, *a.assignment[j], j));
    }
    out.template_events.push_back(std::move(ev));
  }

  // Replacement: the word's monotone span has speech but none of it is
  // assigned to the word.
  for (std::size_t w = 0; w != a.ref.num_words(); ++w) {
    int32_t first = -1, last = -1;
    bool assigned = false;
    DisfluencyEvent ev;
    for (int32_t j = 0; j != cols; ++j) {
      if (!m.assignment[j] || a.ref.WordOf(*m.assignment[j]) != static_cast<int32_t>(w))
        continue;
      if (a.silence[j]) continue;
      if (AssignedWord(a, j) == static_cast<int32_t>(w)) assigned = true;
      if (first < 0) first = j;
      last = j;
      ev.evidence.push_back(MakeCell(a, *m.assignment[j], j));
    }
    if (first < 0 || assigned) continue;
    ev.level = EventLevel::kWord;
    ev.kind = EventKind::kReplacement;
    ev.target = static_cast<int32_t>(w);
    ev.target_label = a.ref.words()[w].text;
    ev.interval = ColumnSpan(a, first, last);
    out.template_events.push_back(std::move(ev));
  }
  std::sort(out.template_events.begin(), out.template_events.end(), EventOrder);

  if (hyp != nullptr) {
    out.refresh = TextRefresh(a, *hyp, cfg);
  } else {
    out.refresh = TextRefresh(a, AsrHypothesis{}, cfg);
  }

  // Resolve conflicts between the two streams.
  auto conflict = [](const DisfluencyEvent &x, const DisfluencyEvent &y) {
    if (x.target && y.target) return *x.target == *y.target;
    return x.interval.start_s < y.interval.end_s && y.interval.start_s < x.interval.end_s;
  };
  std::vector<bool> drop_t(out.template_events.size()), drop_r(out.refresh.events.size());
  for (std::size_t i = 0; i != out.template_events.size(); ++i) {
    for (std::size_t k = 0; k != out.refresh.events.size(); ++k) {
      const auto &t = out.template_events[i];
      const auto &r = out.refresh.events[k];
      if (!conflict(t, r)) continue;
      if (r.EvidenceMass() > t.EvidenceMass()) {
        drop_t[i] = true;
      } else {
        drop_r[k] = true;
      }
    }
  }
  for (std::size_t i = 0; i != out.template_events.size(); ++i)
    if (!drop_t[i]) out.events.push_back(out.template_events[i]);
  for (std::size_t k = 0; k != out.refresh.events.size(); ++k)
    if (!drop_r[k]) out.events.push_back(out.refresh.events[k]);
  std::sort(out.events.begin(), out.events.end(), EventOrder);
  return out;
}

}  // namespace dysflux
