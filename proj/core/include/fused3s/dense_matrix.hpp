#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fused3s/half.hpp"

namespace fused3s {

// Row-major dense matrix whose stored values are all exactly representable in
// precision(). Values are held as double so every tag shares one container.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  // Zero-filled.
  DenseMatrix(std::size_t rows, std::size_t cols, Precision precision);

  // Rounds every value into `precision`. Throws ShapeError when
  // values.size() != rows * cols.
  static DenseMatrix from_values(std::size_t rows, std::size_t cols, std::vector<double> values,
                                 Precision precision);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Precision precision() const { return precision_; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  // Rounds into precision() on store.
  void set(std::size_t r, std::size_t c, double value);

  std::span<const double> data() const { return data_; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }

  // Narrow copies for the half-precision engine; throw ValidationError if the
  // matrix is not tagged half.
  std::vector<Half> to_half_vector() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Precision precision_ = Precision::double_;
  std::vector<double> data_;
};

}  // namespace fused3s
