#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "fused3s/coo.hpp"
#include "fused3s/dense_matrix.hpp"

namespace fused3s {

// Reference implementations. Everything here is plain loops over the full
// matrices with no tiling, so they share no code path with the fused engine.
// Arithmetic is carried out in double and rounded to the requested precision
// after every operation.

enum class SoftmaxVariant { naive, max_stabilized, online };

std::string_view to_string(SoftmaxVariant v);

struct SoftmaxOptions {
  SoftmaxVariant variant = SoftmaxVariant::max_stabilized;
  Precision precision = Precision::double_;
  std::size_t chunk = 16;  // online variant only
};

// Softmax over the supported slots of x; unsupported slots are exactly 0.
// mask.size() must equal x.size(). NaN and infinity propagate.
std::vector<double> softmax_row(std::span<const double> x, const std::vector<bool>& mask,
                                const SoftmaxOptions& opts);

// The exponentials softmax_row divides by their sum (before normalization),
// in the working precision. Exposes the overflow of the naive variant.
std::vector<double> softmax_numerators(std::span<const double> x, const std::vector<bool>& mask,
                                       const SoftmaxOptions& opts);

// Materializes S = QK^T over all N x N pairs, masks off-support entries to
// -inf, applies a max-stabilized row softmax and multiplies by V.
DenseMatrix dense_attention_oracle(const CooMatrix& a, const DenseMatrix& q, const DenseMatrix& k,
                                   const DenseMatrix& v, Precision precision);

// Three separate passes: SDDMM into a dense masked S, row softmax into E,
// then E V. S and E are N x N buffers counted by the scratch tracker.
DenseMatrix unfused_3s_oracle(const CooMatrix& a, const DenseMatrix& q, const DenseMatrix& k,
                              const DenseMatrix& v, const SoftmaxOptions& opts);

}  // namespace fused3s
