#include "fused3s/half.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace fused3s {

namespace {

float decode(std::uint16_t bits) {
  const std::uint32_t sign = static_cast<std::uint32_t>(bits & 0x8000) << 16;
  const std::uint32_t exponent = (bits >> 10) & 0x1F;
  const std::uint32_t mantissa = bits & 0x03FF;
  if (exponent == 0x1F) {
    return std::bit_cast<float>(sign | 0x7F800000u | (mantissa << 13));
  }
  if (exponent == 0) {
    // Subnormal: mantissa * 2^-24, exact in float.
    const float magnitude = std::ldexp(static_cast<float>(mantissa), -24);
    return sign ? -magnitude : magnitude;
  }
  return std::bit_cast<float>(sign | ((exponent + 112) << 23) | (mantissa << 13));
}

const std::array<float, 65536>& decode_table() {
  static const std::array<float, 65536> table = [] {
    std::array<float, 65536> t{};
    for (std::uint32_t i = 0; i < t.size(); ++i) t[i] = decode(static_cast<std::uint16_t>(i));
    return t;
  }();
  return table;
}

}  // namespace

Half Half::from_double(double x) {
  if (std::isnan(x)) return from_bits(kCanonicalNaN);
  const std::uint16_t sign = std::signbit(x) ? 0x8000 : 0;
  const double magnitude = std::fabs(x);
  // Anything at or above the midpoint between 65504 and 2^16 rounds to inf.
  if (magnitude >= 65520.0) return from_bits(sign | kPositiveInfinity);
  if (magnitude < 0x1p-14) {
    // Subnormal range: a multiple of 2^-24. Scaling by a power of two is exact,
    // so nearbyint performs the only rounding (ties to even). A result of 1024
    // is the smallest normal and encodes correctly as-is.
    const auto q = static_cast<std::uint16_t>(std::nearbyint(magnitude * 0x1p24));
    return from_bits(sign | q);
  }
  int exponent = 0;
  const double fraction = std::frexp(magnitude, &exponent);  // [0.5, 1)
  exponent -= 1;
  auto q = static_cast<std::uint32_t>(std::nearbyint((fraction * 2.0 - 1.0) * 1024.0));
  if (q == 1024) {
    q = 0;
    ++exponent;
  }
  // exponent <= 15 is guaranteed by the overflow check above.
  return from_bits(static_cast<std::uint16_t>(sign | ((exponent + 15) << 10) | q));
}

float Half::to_float() const { return decode_table()[bits_]; }

std::string_view to_string(Precision p) {
  switch (p) {
    case Precision::half:
      return "half";
    case Precision::single:
      return "single";
    case Precision::double_:
      return "double";
  }
  return "unknown";
}

double round_to(Precision p, double x) {
  switch (p) {
    case Precision::half:
      return Half::from_double(x).to_double();
    case Precision::single:
      return static_cast<double>(static_cast<float>(x));
    case Precision::double_:
      return x;
  }
  return x;
}

}  // namespace fused3s
