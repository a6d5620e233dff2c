// src/segmentation.cc

#include "dysflux/segmentation.h"

#include <algorithm>
#include <optional>

namespace dysflux {

const WordSpan *WordSegmentation::Find(int32_t word) const {
  for (const auto &e : entries)
    if (e.word == word) return &e;
  return nullptr;
}

namespace {

// Covering DTW row of each column with the highest similarity, then the
// smaller row.
std::vector<int32_t> DtwRowPerColumn(const Alignment2D &a, const DtwPath &path) {
  const auto by_col = path.RowsByColumn(a.cols());
  std::vector<int32_t> out(a.cols());
  for (std::size_t j = 0; j != a.cols(); ++j) {
    if (by_col[j].empty()) throw DataError("DTW path does not cover every column");
    int32_t best = by_col[j].front();
    for (int32_t r : by_col[j]) {
      const double s = a.similarity(r, j), b = a.similarity(best, j);
      if (s > b || (s == b && r < best)) best = r;
    }
    out[j] = best;
  }
  return out;
}

}  // namespace

Alignment2D SmoothMerge(const Alignment2D &a, const DtwPath &path,
                        double merge_threshold) {
  const std::size_t cols = a.cols();
  const std::vector<int32_t> dtw_row = DtwRowPerColumn(a, path);

  std::vector<bool> takes_dtw(cols);
  for (std::size_t j = 0; j != cols; ++j) {
    takes_dtw[j] = !a.assignment[j] ||
                   a.row_similarity(*a.assignment[j], dtw_row[j]) >= merge_threshold;
  }

  // Upper clamp bound: the DTW row of the next column that takes it.
  std::vector<int32_t> upper(cols);
  int32_t next_anchor = static_cast<int32_t>(a.rows()) - 1;
  for (std::size_t j = cols; j-- > 0;) {
    if (takes_dtw[j]) next_anchor = dtw_row[j];
    upper[j] = next_anchor;
  }

  Alignment2D m = a;
  int32_t previous = 0;
  for (std::size_t j = 0; j != cols; ++j) {
    const int32_t row = takes_dtw[j]
                            ? dtw_row[j]
                            : std::clamp(*a.assignment[j], previous, upper[j]);
    m.assignment[j] = row;
    previous = row;
  }
  return m;
}

WordSegmentation ExtractWordBoundaries(const Alignment2D &m,
                                       const Alignment2D *source) {
  const std::size_t num_words = m.ref.num_words();
  std::vector<int32_t> first(num_words, -1), last(num_words, -1);
  for (std::size_t j = 0; j != m.cols(); ++j) {
    if (!m.assignment[j]) continue;
    if (source != nullptr && !source->assignment[j]) continue;
    if (m.silence[j]) continue;
    const int32_t w = m.ref.WordOf(*m.assignment[j]);
    if (first[w] < 0) first[w] = static_cast<int32_t>(j);
    last[w] = static_cast<int32_t>(j);
  }

  WordSegmentation out;
  for (std::size_t w = 0; w != num_words; ++w) {
    if (first[w] < 0) {
      out.missing_words.push_back(static_cast<int32_t>(w));
      continue;
    }
    WordSpan span;
    span.word = static_cast<int32_t>(w);
    span.text = m.ref.words()[w].text;
    span.start_frame = m.segs.segments[first[w]].start;
    span.end_frame = m.segs.segments[last[w]].end;
    span.start_s = span.start_frame * m.segs.frame_duration;
    span.end_s = span.end_frame * m.segs.frame_duration;
    out.entries.push_back(std::move(span));
  }
  return out;
}

void UrfaConfig::Validate() const {
  search.Validate();
  if (!(align.assign_threshold >= 0.0 && align.assign_threshold <= 1.0) ||
      !(merge_threshold >= 0.0 && merge_threshold <= 1.0)) {
    throw DataError("thresholds must lie in [0, 1]");
  }
  if (max_order < 0) throw DataError("max_order must be >= 0");
}

namespace {

struct Piece {
  Segment seg;
  std::optional<int32_t> row;
};

OrderState Finish(int32_t order, AlignmentSegments segs, Alignment2D alignment,
                  const UrfaConfig &cfg) {
  OrderState s;
  s.order = order;
  s.segments = std::move(segs);
  s.alignment = std::move(alignment);
  s.path = DtwAlign(s.alignment);
  s.merged = SmoothMerge(s.alignment, s.path, cfg.merge_threshold);
  return s;
}

// Segments of `segs` clipped to [start, end), with their assignment in `a`
// when it falls inside `word` (or any word when word < 0).
void AppendClipped(const AlignmentSegments &segs, const Alignment2D &a,
                   int32_t start, int32_t end, int32_t word,
                   std::vector<Piece> &out) {
  for (std::size_t j = 0; j != segs.size(); ++j) {
    const Segment &s = segs.segments[j];
    const int32_t lo = std::max(s.start, start), hi = std::min(s.end, end);
    if (lo >= hi) continue;
    std::optional<int32_t> row;
    if (word >= 0 && a.assignment[j] && a.ref.WordOf(*a.assignment[j]) == word) {
      row = a.assignment[j];
    }
    out.push_back({{s.phone, lo, hi}, row});
  }
}

}  // namespace

RecursionState UrfaIterate(const EmissionInput &e, const ReferenceText &ref,
                           const PhonemeInventory &inv, const BigramLM &lm,
                           const UrfaConfig &cfg) {
  cfg.Validate();
  RecursionState state;

  AlignmentSegments segs = ViterbiDecode(e, lm, cfg.search);
  Alignment2D a = Build2D(ref, segs, inv, cfg.align);
  OrderState zero = Finish(0, std::move(segs), std::move(a), cfg);
  zero.words = ExtractWordBoundaries(zero.merged, &zero.alignment);
  state.orders.push_back(std::move(zero));

  const int32_t total = static_cast<int32_t>(e.num_frames());
  for (int32_t order = 1; order <= cfg.max_order; ++order) {
    const OrderState &prev = state.orders.back();
    std::vector<Piece> pieces;
    WordSegmentation words;
    words.missing_words = prev.words.missing_words;
    int32_t cursor = 0;

    for (const WordSpan &span : prev.words.entries) {
      AppendClipped(prev.segments, prev.alignment, cursor, span.start_frame, -1, pieces);
      cursor = span.end_frame;

      bool redone = false;
      if (span.end_frame > span.start_frame) {
        const ReferenceText word_ref = ref.Word(span.word);
        const AlignmentSegments local =
            DecodeSegment(e, span.start_frame, span.end_frame, lm, cfg.search);
        const Alignment2D local_a = Build2D(word_ref, local, inv, cfg.align);
        const Alignment2D local_m =
            SmoothMerge(local_a, DtwAlign(local_a), cfg.merge_threshold);
        const WordSegmentation local_w = ExtractWordBoundaries(local_m, &local_a);
        if (!local_w.entries.empty()) {
          const int32_t base = static_cast<int32_t>(ref.FirstRow(span.word));
          for (std::size_t j = 0; j != local.size(); ++j) {
            std::optional<int32_t> row;
            if (local_a.assignment[j]) row = base + *local_a.assignment[j];
            pieces.push_back({local.segments[j], row});
          }
          WordSpan next = local_w.entries.front();
          next.word = span.word;
          next.text = span.text;
          words.entries.push_back(std::move(next));
          redone = true;
        }
      }
      if (!redone) {
        AppendClipped(prev.segments, prev.alignment, span.start_frame,
                      span.end_frame, span.word, pieces);
        words.entries.push_back(span);
      }
    }
    AppendClipped(prev.segments, prev.alignment, cursor, total, -1, pieces);

    // Adjacent pieces with the same label become one column; it keeps the
    // first available assignment.
    std::vector<Piece> merged;
    for (Piece &p : pieces) {
      if (!merged.empty() && merged.back().seg.phone == p.seg.phone) {
        merged.back().seg.end = p.seg.end;
        if (!merged.back().row) merged.back().row = p.row;
      } else {
        merged.push_back(p);
      }
    }

    AlignmentSegments next_segs;
    next_segs.frame_duration = e.frame_duration;
    for (const Piece &p : merged) next_segs.segments.push_back(p.seg);
    CheckCanonical(next_segs);
    Alignment2D next_a = Build2D(ref, next_segs, inv, cfg.align);
    for (std::size_t j = 0; j != merged.size(); ++j) {
      if (!next_a.silence[j]) next_a.assignment[j] = merged[j].row;
    }
    OrderState s = Finish(order, std::move(next_segs), std::move(next_a), cfg);
    s.words = std::move(words);
    state.orders.push_back(std::move(s));
  }
  return state;
}

}  // namespace dysflux
