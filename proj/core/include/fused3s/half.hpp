#pragma once

#include <bit>
#include <cstdint>
#include <string_view>

namespace fused3s {

// IEEE-754 binary16 storage type. Arithmetic is never done on Half directly;
// values are widened to float (exactly) and narrowed back with
// round-to-nearest-even.
class Half {
 public:
  static constexpr std::uint16_t kCanonicalNaN = 0x7E00;
  static constexpr std::uint16_t kPositiveInfinity = 0x7C00;
  static constexpr double kMaxFinite = 65504.0;

  constexpr Half() = default;

  static constexpr Half from_bits(std::uint16_t bits) {
    Half h;
    h.bits_ = bits;
    return h;
  }

  // Round-to-nearest-even. Magnitudes at or beyond 65520 become infinity,
  // NaNs collapse to kCanonicalNaN.
  static Half from_double(double x);
  static Half from_float(float x) { return from_double(static_cast<double>(x)); }

  constexpr std::uint16_t bits() const { return bits_; }

  // Exact widening.
  float to_float() const;
  double to_double() const { return static_cast<double>(to_float()); }

  bool is_nan() const { return (bits_ & 0x7C00) == 0x7C00 && (bits_ & 0x03FF) != 0; }
  bool is_inf() const { return (bits_ & 0x7FFF) == 0x7C00; }

  // Re-encodes through float; the identity on every pattern except that NaN
  // payloads are canonicalized.
  Half canonical() const { return from_float(to_float()); }

  friend constexpr bool operator==(Half a, Half b) { return a.bits_ == b.bits_; }

 private:
  std::uint16_t bits_ = 0;
};

enum class Precision { half, single, double_ };

std::string_view to_string(Precision p);

// Rounds x to the nearest value representable in p (round-to-nearest-even,
// overflow to infinity).
double round_to(Precision p, double x);

}  // namespace fused3s
