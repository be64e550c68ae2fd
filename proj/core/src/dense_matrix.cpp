#include "fused3s/dense_matrix.hpp"

#include <string>

#include "fused3s/error.hpp"

namespace fused3s {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, Precision precision)
    : rows_(rows), cols_(cols), precision_(precision), data_(rows * cols, 0.0) {}

DenseMatrix DenseMatrix::from_values(std::size_t rows, std::size_t cols,
                                     std::vector<double> values, Precision precision) {
  if (values.size() != rows * cols) {
    throw ShapeError("DenseMatrix: expected " + std::to_string(rows * cols) + " values, got " +
                     std::to_string(values.size()));
  }
  DenseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.precision_ = precision;
  for (double& v : values) v = round_to(precision, v);
  m.data_ = std::move(values);
  return m;
}

void DenseMatrix::set(std::size_t r, std::size_t c, double value) {
  data_[r * cols_ + c] = round_to(precision_, value);
}

std::vector<Half> DenseMatrix::to_half_vector() const {
  if (precision_ != Precision::half) {
    throw ValidationError("DenseMatrix: expected half precision, got " +
                          std::string(to_string(precision_)));
  }
  std::vector<Half> out;
  out.reserve(data_.size());
  for (double v : data_) out.push_back(Half::from_double(v));
  return out;
}

}  // namespace fused3s
