// src/align2d.cc

#include "dysflux/align2d.h"

#include <algorithm>
#include <cstdlib>
#include <limits>

namespace dysflux {

std::vector<std::vector<int32_t>> DtwPath::RowsByColumn(std::size_t cols) const {
  std::vector<std::vector<int32_t>> out(cols);
  for (auto [r, c] : steps) out[c].push_back(r);
  return out;
}

std::vector<std::vector<int32_t>> DtwPath::ColumnsByRow(std::size_t rows) const {
  std::vector<std::vector<int32_t>> out(rows);
  for (auto [r, c] : steps) out[r].push_back(c);
  return out;
}

DtwPath DtwAlign(const Matrix<double> &similarity) {
  const std::size_t rows = similarity.rows();
  const std::size_t cols = similarity.cols();
  if (rows == 0 || cols == 0) throw DataError("DTW needs a non-empty grid");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  enum Move : uint8_t { kStart, kDiagonal, kRight, kDown };
  Matrix<double> acc(rows, cols, kInf);
  Matrix<uint8_t> move(rows, cols, kStart);

  for (std::size_t i = 0; i != rows; ++i) {
    for (std::size_t j = 0; j != cols; ++j) {
      const double cost = 1.0 - similarity(i, j);
      if (i == 0 && j == 0) {
        acc(i, j) = cost;
        continue;
      }
      double best = kInf;
      uint8_t how = kStart;
      if (i > 0 && j > 0 && acc(i - 1, j - 1) < best) {
        best = acc(i - 1, j - 1);
        how = kDiagonal;
      }
      if (j > 0 && acc(i, j - 1) < best) {
        best = acc(i, j - 1);
        how = kRight;
      }
      if (i > 0 && acc(i - 1, j) < best) {
        best = acc(i - 1, j);
        how = kDown;
      }
      acc(i, j) = best + cost;
      move(i, j) = how;
    }
  }

  DtwPath path;
  path.total_cost = acc(rows - 1, cols - 1);
  std::size_t i = rows - 1, j = cols - 1;
  while (true) {
    path.steps.emplace_back(static_cast<int32_t>(i), static_cast<int32_t>(j));
    const uint8_t how = move(i, j);
    if (how == kStart) break;
    if (how == kDiagonal) {
      --i;
      --j;
    } else if (how == kRight) {
      --j;
    } else {
      --i;
    }
  }
  std::reverse(path.steps.begin(), path.steps.end());
  return path;
}

double PathCost(const Matrix<double> &similarity, const DtwPath &path) {
  double cost = 0.0;
  for (auto [r, c] : path.steps) cost = cost + (1.0 - similarity(r, c));
  return cost;
}

Alignment2D Build2D(const ReferenceText &ref, const AlignmentSegments &segs,
                    const PhonemeInventory &inv, const Align2dConfig &cfg) {
  if (ref.empty()) throw DataError("2D alignment needs a non-empty reference");
  if (segs.empty()) throw DataError("2D alignment needs at least one segment");

  Alignment2D a;
  a.ref = ref;
  a.segs = segs;
  a.inventory = &inv;
  const std::size_t rows = ref.num_phones();
  const std::size_t cols = segs.size();
  a.similarity = Matrix<double>(rows, cols);
  for (std::size_t i = 0; i != rows; ++i) {
    for (std::size_t j = 0; j != cols; ++j) {
      a.similarity(i, j) = inv.Similarity(ref.phones()[i], segs.segments[j].phone);
    }
  }

  a.row_similarity = Matrix<double>(rows, rows);
  for (std::size_t i = 0; i != rows; ++i) {
    for (std::size_t k = 0; k != rows; ++k) {
      a.row_similarity(i, k) = inv.Similarity(ref.phones()[i], ref.phones()[k]);
    }
  }

  const auto dtw_rows = DtwAlign(a.similarity).RowsByColumn(cols);
  a.assignment.assign(cols, std::nullopt);
  a.silence.assign(cols, false);
  for (std::size_t j = 0; j != cols; ++j) {
    if (inv.IsSilence(segs.segments[j].phone)) {
      a.silence[j] = true;
      continue;
    }
    double best = -1.0;
    for (std::size_t i = 0; i != rows; ++i) best = std::max(best, a.similarity(i, j));
    if (best < cfg.assign_threshold) continue;

    auto distance = [&](std::size_t i) {
      int32_t d = std::numeric_limits<int32_t>::max();
      for (int32_t r : dtw_rows[j]) d = std::min(d, std::abs(r - static_cast<int32_t>(i)));
      return d;
    };
    std::optional<int32_t> pick;
    int32_t pick_distance = 0;
    for (std::size_t i = 0; i != rows; ++i) {
      if (a.similarity(i, j) != best) continue;
      const int32_t d = distance(i);
      if (!pick || d < pick_distance) {
        pick = static_cast<int32_t>(i);
        pick_distance = d;
      }
    }
    a.assignment[j] = pick;
  }
  return a;
}

Interval SegmentTimeSpan(const Alignment2D &a, std::size_t col) {
  if (col >= a.segs.size()) {
    throw DataError("column " + std::to_string(col) + " out of range (" +
                    std::to_string(a.segs.size()) + " columns)");
  }
  return a.segs.TimeSpan(col);
}

}  // namespace dysflux
