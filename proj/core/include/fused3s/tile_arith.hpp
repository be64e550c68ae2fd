#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "fused3s/dense_matrix.hpp"
#include "fused3s/half.hpp"

namespace fused3s {

// MMA operand shape: A is m x k, B is k x n, C is m x n.
struct TileShape {
  int m = 16;
  int n = 8;
  int k = 16;

  friend constexpr bool operator==(TileShape, TileShape) = default;
};

inline constexpr TileShape kDefaultTile{16, 8, 16};

// FP16-input shapes exposed by mma and wmma.
std::span<const TileShape> supported_tile_shapes();
bool is_supported(TileShape shape);

// Row-major matrix view. Elements past rows/cols are never touched.
template <class T>
struct MatrixRef {
  std::span<T> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

using HalfRef = MatrixRef<const Half>;
using FloatRef = MatrixRef<float>;

// How the workers of one thread block share a TBGemm call.
//   split_column: output tiles are dealt round-robin to workers.
//   split_row:    the reduction (k-tile) range is cut into contiguous chunks,
//                 one per worker, and chunk partial sums are chained in
//                 worker order.
// Both visit every output element's k-tiles in ascending order, so the
// result is bitwise the same for any choice.
enum class WarpPartition { split_column, split_row };

std::string_view to_string(WarpPartition p);

struct WorkSplit {
  WarpPartition partition = WarpPartition::split_column;
  int workers = 1;
};

// c += a * b on one tile. Half operands widen exactly to float, every product
// is exact in float, and each element accumulates in ascending k order
// starting from its incoming c value. Throws ShapeError on size mismatch.
void mma_tile(TileShape shape, std::span<const Half> a, std::span<const Half> b,
              std::span<float> c);

// acc = a * b + acc for a (m x K), b (K x P), acc (m x P). K, P and m are
// zero-padded up to tile multiples internally.
void tbgemm(TileShape shape, HalfRef a, HalfRef b, FloatRef acc, WorkSplit split = {});

// Convenience overload returning a fresh m x P result from accumulator d.
std::vector<float> tbgemm(TileShape shape, HalfRef a, HalfRef b, std::span<const float> d,
                          WorkSplit split = {});

DenseMatrix cast_matrix(const DenseMatrix& x, Precision target);

}  // namespace fused3s
