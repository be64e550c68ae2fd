#include "fused3s/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fused3s/alloc_tracker.hpp"
#include "fused3s/error.hpp"

namespace fused3s {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Arithmetic in a chosen precision: exact double result, then one rounding.
struct Arith {
  Precision p;

  double r(double x) const { return round_to(p, x); }
  double add(double a, double b) const { return r(a + b); }
  double sub(double a, double b) const { return r(a - b); }
  double mul(double a, double b) const { return r(a * b); }
  double div(double a, double b) const { return r(a / b); }
  double exp(double a) const { return r(std::exp(a)); }
};

std::vector<std::vector<std::uint32_t>> row_support(const CooMatrix& a) {
  const CooMatrix canon = a.canonical();
  std::vector<std::vector<std::uint32_t>> rows(canon.n_rows);
  for (const auto& [i, j] : canon.entries) rows[i].push_back(j);
  return rows;
}

void check_shapes(const CooMatrix& a, const DenseMatrix& q, const DenseMatrix& k,
                  const DenseMatrix& v) {
  if (a.n_rows != a.n_cols) throw ShapeError("oracle: sparse matrix must be square");
  const std::size_t n = a.n_rows;
  if (q.rows() != n || k.rows() != n || v.rows() != n || k.cols() != q.cols() ||
      v.cols() != q.cols()) {
    throw ShapeError("oracle: Q, K, V must be " + std::to_string(n) + " x d with a common d");
  }
}

double dot(const Arith& ar, std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t f = 0; f < x.size(); ++f) acc = ar.add(acc, ar.mul(x[f], y[f]));
  return acc;
}

// Writes E (supported slots only) for one row of scores.
template <class Out>
void softmax_into(std::span<const double> scores, const std::vector<bool>& mask,
                  const SoftmaxOptions& opts, Out&& out) {
  const auto e = softmax_row(scores, mask, opts);
  for (std::size_t j = 0; j < e.size(); ++j) out(j, e[j]);
}

}  // namespace

std::string_view to_string(SoftmaxVariant v) {
  switch (v) {
    case SoftmaxVariant::naive:
      return "naive";
    case SoftmaxVariant::max_stabilized:
      return "max_stabilized";
    case SoftmaxVariant::online:
      return "online";
  }
  return "unknown";
}

std::vector<double> softmax_numerators(std::span<const double> x, const std::vector<bool>& mask,
                                       const SoftmaxOptions& opts) {
  if (mask.size() != x.size()) throw ShapeError("softmax: mask length differs from input");
  const Arith ar{opts.precision};
  std::vector<double> num(x.size(), 0.0);

  double shift = 0.0;
  if (opts.variant != SoftmaxVariant::naive) {
    shift = kNegInf;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (mask[i]) shift = std::max(shift, ar.r(x[i]));
    }
    if (shift == kNegInf) return num;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!mask[i]) continue;
    num[i] = opts.variant == SoftmaxVariant::naive ? ar.exp(ar.r(x[i]))
                                                   : ar.exp(ar.sub(ar.r(x[i]), shift));
  }
  return num;
}

std::vector<double> softmax_row(std::span<const double> x, const std::vector<bool>& mask,
                                const SoftmaxOptions& opts) {
  if (mask.size() != x.size()) throw ShapeError("softmax: mask length differs from input");
  const Arith ar{opts.precision};
  std::vector<double> out(x.size(), 0.0);

  if (opts.variant != SoftmaxVariant::online) {
    const auto num = softmax_numerators(x, mask, opts);
    double sum = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!mask[i]) continue;
      sum = ar.add(sum, num[i]);
      any = true;
    }
    if (!any) return out;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (mask[i]) out[i] = ar.div(num[i], sum);
    }
    return out;
  }

  if (opts.chunk == 0) throw ValidationError("softmax: online chunk size must be positive");
  double m = kNegInf;
  double l = 0.0;
  for (std::size_t begin = 0; begin < x.size(); begin += opts.chunk) {
    const std::size_t end = std::min(x.size(), begin + opts.chunk);
    double chunk_max = kNegInf;
    for (std::size_t i = begin; i < end; ++i) {
      if (mask[i]) chunk_max = std::max(chunk_max, ar.r(x[i]));
    }
    const double m_new = std::max(m, chunk_max);
    if (m_new == kNegInf) continue;
    double chunk_sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      if (mask[i]) chunk_sum = ar.add(chunk_sum, ar.exp(ar.sub(ar.r(x[i]), m_new)));
    }
    const double scale = m == kNegInf ? 0.0 : ar.exp(ar.sub(m, m_new));
    l = ar.add(ar.mul(scale, l), chunk_sum);
    m = m_new;
  }
  if (m == kNegInf) return out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (mask[i]) out[i] = ar.div(ar.exp(ar.sub(ar.r(x[i]), m)), l);
  }
  return out;
}

DenseMatrix dense_attention_oracle(const CooMatrix& a, const DenseMatrix& q, const DenseMatrix& k,
                                   const DenseMatrix& v, Precision precision) {
  check_shapes(a, q, k, v);
  const Arith ar{precision};
  const std::size_t n = a.n_rows;
  const std::size_t d = q.cols();
  const auto support = row_support(a);
  const SoftmaxOptions opts{SoftmaxVariant::max_stabilized, precision, 0};

  DenseMatrix out(n, d, precision);
  std::vector<double> scores(n);
  std::vector<double> weights(n);
  std::vector<bool> mask(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(mask.begin(), mask.end(), false);
    for (std::uint32_t j : support[i]) mask[j] = true;
    for (std::size_t j = 0; j < n; ++j) {
      const double s = dot(ar, q.row(i), k.row(j));
      scores[j] = mask[j] ? s : kNegInf;
    }
    std::fill(weights.begin(), weights.end(), 0.0);
    softmax_into(scores, mask, opts, [&](std::size_t j, double e) { weights[j] = e; });
    for (std::size_t f = 0; f < d; ++f) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc = ar.add(acc, ar.mul(weights[j], v(j, f)));
      out.set(i, f, acc);
    }
  }
  return out;
}

DenseMatrix unfused_3s_oracle(const CooMatrix& a, const DenseMatrix& q, const DenseMatrix& k,
                              const DenseMatrix& v, const SoftmaxOptions& opts) {
  check_shapes(a, q, k, v);
  const Arith ar{opts.precision};
  const std::size_t n = a.n_rows;
  const std::size_t d = q.cols();
  const auto support = row_support(a);

  // SDDMM
  tracked_vector<double> s(n * n, kNegInf);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint32_t j : support[i]) s[i * n + j] = dot(ar, q.row(i), k.row(j));
  }

  // Softmax
  tracked_vector<double> e(n * n, 0.0);
  std::vector<bool> mask(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(mask.begin(), mask.end(), false);
    for (std::uint32_t j : support[i]) mask[j] = true;
    softmax_into(std::span<const double>(s).subspan(i * n, n), mask, opts,
                 [&](std::size_t j, double x) { e[i * n + j] = x; });
  }

  // SpMM
  DenseMatrix out(n, d, opts.precision);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < d; ++f) {
      double acc = 0.0;
      for (std::uint32_t j : support[i]) acc = ar.add(acc, ar.mul(e[i * n + j], v(j, f)));
      out.set(i, f, acc);
    }
  }
  return out;
}

}  // namespace fused3s
