// include/dysflux/common.h
//
// Shared value types: errors, time intervals and a small row-major matrix.

#ifndef DYSFLUX_COMMON_H_
#define DYSFLUX_COMMON_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dysflux {

/// Index into a PhonemeInventory.
using PhoneId = int32_t;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (bad files, shape mismatches,
/// unknown labels). The CLI maps this to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Half-open time interval in seconds.
struct Interval {
  double start_s = 0.0;
  double end_s = 0.0;

  double Length() const { return end_s > start_s ? end_s - start_s : 0.0; }
  bool operator==(const Interval &) const = default;
};

/// Dense row-major matrix. Rows are exposed as spans.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T &operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  const std::vector<T> &data() const { return data_; }

  bool operator==(const Matrix &) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace dysflux

#endif  // DYSFLUX_COMMON_H_
