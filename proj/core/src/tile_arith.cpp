#include "fused3s/tile_arith.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "fused3s/error.hpp"

namespace fused3s {

namespace {

constexpr std::array<TileShape, 6> kSupportedShapes{{
    {16, 8, 16},   // mma, default
    {16, 8, 8},    // mma
    {8, 8, 4},     // mma
    {16, 16, 16},  // wmma
    {8, 32, 16},   // wmma
    {32, 8, 16},   // wmma
}};

std::string describe(TileShape s) {
  return "m" + std::to_string(s.m) + "n" + std::to_string(s.n) + "k" + std::to_string(s.k);
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

void check_shape(TileShape shape) {
  if (!is_supported(shape)) throw ShapeError("unsupported tile shape " + describe(shape));
}

// Scratch for one (row-tile, col-tile) pair: the accumulator fragment plus
// packed operand tiles, zero-padded at the ragged edges.
struct TileScratch {
  std::vector<Half> a;
  std::vector<Half> b;
  std::vector<float> c;

  explicit TileScratch(TileShape s)
      : a(static_cast<std::size_t>(s.m * s.k)),
        b(static_cast<std::size_t>(s.k * s.n)),
        c(static_cast<std::size_t>(s.m * s.n)) {}
};

class TileGemm {
 public:
  TileGemm(TileShape shape, HalfRef a, HalfRef b, FloatRef acc)
      : shape_(shape), a_(a), b_(b), acc_(acc), scratch_(shape) {}

  std::size_t row_tiles() const { return ceil_div(a_.rows, shape_.m); }
  std::size_t col_tiles() const { return ceil_div(b_.cols, shape_.n); }
  std::size_t k_tiles() const { return ceil_div(a_.cols, shape_.k); }

  void load_c(std::size_t ti, std::size_t tj) {
    for (int p = 0; p < shape_.m; ++p) {
      for (int q = 0; q < shape_.n; ++q) {
        const std::size_t r = ti * shape_.m + p;
        const std::size_t c = tj * shape_.n + q;
        scratch_.c[p * shape_.n + q] = (r < acc_.rows && c < acc_.cols) ? acc_(r, c) : 0.0f;
      }
    }
  }

  void store_c(std::size_t ti, std::size_t tj) {
    for (int p = 0; p < shape_.m; ++p) {
      for (int q = 0; q < shape_.n; ++q) {
        const std::size_t r = ti * shape_.m + p;
        const std::size_t c = tj * shape_.n + q;
        if (r < acc_.rows && c < acc_.cols) acc_(r, c) = scratch_.c[p * shape_.n + q];
      }
    }
  }

  void step(std::size_t ti, std::size_t tj, std::size_t tk) {
    for (int p = 0; p < shape_.m; ++p) {
      for (int q = 0; q < shape_.k; ++q) {
        const std::size_t r = ti * shape_.m + p;
        const std::size_t c = tk * shape_.k + q;
        scratch_.a[p * shape_.k + q] = (r < a_.rows && c < a_.cols) ? a_(r, c) : Half{};
      }
    }
    for (int p = 0; p < shape_.k; ++p) {
      for (int q = 0; q < shape_.n; ++q) {
        const std::size_t r = tk * shape_.k + p;
        const std::size_t c = tj * shape_.n + q;
        scratch_.b[p * shape_.n + q] = (r < b_.rows && c < b_.cols) ? b_(r, c) : Half{};
      }
    }
    mma_tile(shape_, scratch_.a, scratch_.b, scratch_.c);
  }

 private:
  TileShape shape_;
  HalfRef a_;
  HalfRef b_;
  FloatRef acc_;
  TileScratch scratch_;
};

}  // namespace

std::span<const TileShape> supported_tile_shapes() { return kSupportedShapes; }

bool is_supported(TileShape shape) {
  return std::find(kSupportedShapes.begin(), kSupportedShapes.end(), shape) !=
         kSupportedShapes.end();
}

std::string_view to_string(WarpPartition p) {
  return p == WarpPartition::split_column ? "split_column" : "split_row";
}

void mma_tile(TileShape shape, std::span<const Half> a, std::span<const Half> b,
              std::span<float> c) {
  check_shape(shape);
  const auto m = static_cast<std::size_t>(shape.m);
  const auto n = static_cast<std::size_t>(shape.n);
  const auto k = static_cast<std::size_t>(shape.k);
  if (a.size() != m * k || b.size() != k * n || c.size() != m * n) {
    throw ShapeError("mma_tile: operand sizes " + std::to_string(a.size()) + "/" +
                     std::to_string(b.size()) + "/" + std::to_string(c.size()) +
                     " do not match " + describe(shape));
  }
  std::array<float, 32 * 32> af{};
  std::array<float, 32 * 32> bf{};
  for (std::size_t i = 0; i < m * k; ++i) af[i] = a[i].to_float();
  for (std::size_t i = 0; i < k * n; ++i) bf[i] = b[i].to_float();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      float acc = c[i * n + j];
      for (std::size_t kk = 0; kk < k; ++kk) {
        const float product = af[i * k + kk] * bf[kk * n + j];
        acc += product;
      }
      c[i * n + j] = acc;
    }
  }
}

void tbgemm(TileShape shape, HalfRef a, HalfRef b, FloatRef acc, WorkSplit split) {
  check_shape(shape);
  if (a.cols == 0 || b.cols == 0 || a.rows == 0) {
    throw ShapeError("tbgemm: empty operand");
  }
  if (a.cols != b.rows || acc.rows != a.rows || acc.cols != b.cols) {
    throw ShapeError("tbgemm: A is " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                     ", B is " + std::to_string(b.rows) + "x" + std::to_string(b.cols) +
                     ", accumulator is " + std::to_string(acc.rows) + "x" +
                     std::to_string(acc.cols));
  }
  if (a.data.size() < a.rows * a.cols || b.data.size() < b.rows * b.cols ||
      acc.data.size() < acc.rows * acc.cols) {
    throw ShapeError("tbgemm: view smaller than its declared extent");
  }
  if (split.workers < 1) throw ValidationError("tbgemm: workers must be >= 1");

  TileGemm gemm(shape, a, b, acc);
  const std::size_t row_tiles = gemm.row_tiles();
  const std::size_t col_tiles = gemm.col_tiles();
  const std::size_t k_tiles = gemm.k_tiles();
  const auto workers = static_cast<std::size_t>(split.workers);

  if (split.partition == WarpPartition::split_column) {
    for (std::size_t w = 0; w < workers; ++w) {
      for (std::size_t tj = w; tj < col_tiles; tj += workers) {
        for (std::size_t ti = 0; ti < row_tiles; ++ti) {
          gemm.load_c(ti, tj);
          for (std::size_t tk = 0; tk < k_tiles; ++tk) gemm.step(ti, tj, tk);
          gemm.store_c(ti, tj);
        }
      }
    }
    return;
  }

  // split_row: worker w owns k-tiles [w * chunk, (w + 1) * chunk). Each
  // worker's partial result is handed to the next worker as its accumulator.
  const std::size_t chunk = ceil_div(k_tiles, workers);
  for (std::size_t tj = 0; tj < col_tiles; ++tj) {
    for (std::size_t ti = 0; ti < row_tiles; ++ti) {
      gemm.load_c(ti, tj);
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(k_tiles, w * chunk);
        const std::size_t end = std::min(k_tiles, begin + chunk);
        for (std::size_t tk = begin; tk < end; ++tk) gemm.step(ti, tj, tk);
      }
      gemm.store_c(ti, tj);
    }
  }
}

std::vector<float> tbgemm(TileShape shape, HalfRef a, HalfRef b, std::span<const float> d,
                          WorkSplit split) {
  if (d.size() != a.rows * b.cols) {
    throw ShapeError("tbgemm: accumulator has " + std::to_string(d.size()) + " elements, expected " +
                     std::to_string(a.rows * b.cols));
  }
  std::vector<float> out(d.begin(), d.end());
  tbgemm(shape, a, b, FloatRef{out, a.rows, b.cols}, split);
  return out;
}

DenseMatrix cast_matrix(const DenseMatrix& x, Precision target) {
  return DenseMatrix::from_values(x.rows(), x.cols(), {x.data().begin(), x.data().end()}, target);
}

}  // namespace fused3s
