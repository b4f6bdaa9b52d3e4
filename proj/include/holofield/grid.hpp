#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "holofield/error.hpp"

namespace holofield {

/// Dense row-major 2-D array. Row index is the y axis, column index the x axis.
template <class T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t row, std::size_t col) { return data_[row * cols_ + col]; }
  const T& operator()(std::size_t row, std::size_t col) const {
    return data_[row * cols_ + col];
  }

  T& at(std::size_t row, std::size_t col) {
    check(row, col);
    return (*this)(row, col);
  }
  const T& at(std::size_t row, std::size_t col) const {
    check(row, col);
    return (*this)(row, col);
  }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  void fill(const T& v) { std::fill(data_.begin(), data_.end(), v); }

  /// Copy of the block [row0, row0+rows) x [col0, col0+cols).
  Grid crop(std::size_t row0, std::size_t col0, std::size_t rows, std::size_t cols) const {
    if (row0 + rows > rows_ || col0 + cols > cols_) {
      throw Error(ErrorKind::validation, "crop region exceeds grid bounds");
    }
    Grid out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const T* src = data_.data() + (row0 + r) * cols_ + col0;
      std::copy(src, src + cols, out.data() + r * cols);
    }
    return out;
  }

  /// Writes `src` into this grid with its top-left at (row0, col0).
  void paste(const Grid& src, std::size_t row0, std::size_t col0) {
    if (row0 + src.rows() > rows_ || col0 + src.cols() > cols_) {
      throw Error(ErrorKind::validation, "paste region exceeds grid bounds");
    }
    for (std::size_t r = 0; r < src.rows(); ++r) {
      std::copy(src.row(r).begin(), src.row(r).end(), data_.data() + (row0 + r) * cols_ + col0);
    }
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  void check(std::size_t row, std::size_t col) const {
    if (row >= rows_ || col >= cols_) {
      throw Error(ErrorKind::validation, "grid index out of range");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace holofield
