// include/dysflux/align2d.h
//
// 2D alignment between reference phonemes (rows) and decoded segments
// (columns). The similarity grid is continuous; each column additionally
// carries a thresholded, possibly non-monotonic row assignment. DtwAlign
// gives the monotonic counterpart over the same grid.

#ifndef DYSFLUX_ALIGN2D_H_
#define DYSFLUX_ALIGN2D_H_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dysflux/alignment.h"
#include "dysflux/common.h"
#include "dysflux/inventory.h"
#include "dysflux/reference.h"

namespace dysflux {

struct Align2dConfig {
  /// Minimum similarity for a column to be assigned to a row.
  double assign_threshold = 0.6;
};

struct Alignment2D {
  Matrix<double> similarity;                 // rows x cols, in [0, 1]
  Matrix<double> row_similarity;             // rows x rows, reference vs itself
  std::vector<std::optional<int32_t>> assignment;  // per column
  std::vector<bool> silence;                       // per column
  ReferenceText ref;
  AlignmentSegments segs;
  /// Inventory the grid was built with; must outlive the alignment.
  const PhonemeInventory *inventory = nullptr;

  const std::string &ColumnLabel(std::size_t col) const {
    return inventory->Symbol(segs.segments[col].phone);
  }
  double ColumnSimilarity(std::size_t x, std::size_t y) const {
    return inventory->Similarity(segs.segments[x].phone, segs.segments[y].phone);
  }

  std::size_t rows() const { return similarity.rows(); }
  std::size_t cols() const { return similarity.cols(); }
};

struct DtwPath {
  std::vector<std::pair<int32_t, int32_t>> steps;  // (row, col)
  double total_cost = 0.0;

  /// Rows visited at each column, in path order.
  std::vector<std::vector<int32_t>> RowsByColumn(std::size_t cols) const;
  /// Columns visited by each row, in path order.
  std::vector<std::vector<int32_t>> ColumnsByRow(std::size_t rows) const;
};

/// Similarity grid plus per-column assignment: the argmax row when its
/// similarity reaches the threshold, nothing otherwise, and nothing for SIL
/// columns. When several rows tie for the maximum (a phoneme that occurs
/// more than once in the reference) the row closest to the column's DTW
/// rows wins, then the smaller row. Throws DataError on empty input.
Alignment2D Build2D(const ReferenceText &ref, const AlignmentSegments &segs,
                    const PhonemeInventory &inv, const Align2dConfig &cfg = {});

/// Classical DTW with cell cost 1 - similarity and unit moves
/// {down, right, diagonal}. Ties prefer diagonal, then right, then down.
DtwPath DtwAlign(const Matrix<double> &similarity);
inline DtwPath DtwAlign(const Alignment2D &a) { return DtwAlign(a.similarity); }

/// (start_s, end_s) of decoded segment `col`; throws DataError when out of
/// range.
Interval SegmentTimeSpan(const Alignment2D &a, std::size_t col);

/// Sum of cell costs along `path`, in path order.
double PathCost(const Matrix<double> &similarity, const DtwPath &path);

}  // namespace dysflux

#endif  // DYSFLUX_ALIGN2D_H_
