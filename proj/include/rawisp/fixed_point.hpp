#pragma once

#include <cmath>
#include <cstdint>

#include "rawisp/error.hpp"

namespace rawisp {

// Signed 16-bit two's-complement fixed point with `fractional_bits` bits
// after the binary point. Range is [-2^(15-f), 2^(15-f) - 2^-f].
struct FixedPointFormat {
  int fractional_bits = 8;

  static constexpr int kTotalBits = 16;

  constexpr double resolution() const { return 1.0 / static_cast<double>(1 << fractional_bits); }
  constexpr double min_value() const { return -static_cast<double>(1 << (15 - fractional_bits)); }
  constexpr double max_value() const {
    return static_cast<double>(1 << (15 - fractional_bits)) - resolution();
  }
  void validate() const {
    if (fractional_bits < 0 || fractional_bits > 15) throw Error("fractional_bits must be in [0, 15]");
  }

  friend bool operator==(const FixedPointFormat&, const FixedPointFormat&) = default;
};

enum class Saturation : std::uint8_t { saturate, error };

// Round-to-nearest-even of x * 2^f. Out-of-range values clamp to the end codes
// or throw, depending on `mode`.
inline std::int16_t to_fixed(double x, FixedPointFormat fmt, Saturation mode = Saturation::saturate) {
  fmt.validate();
  if (std::isnan(x)) throw Error("to_fixed: NaN");
  const double scaled = std::nearbyint(std::ldexp(x, fmt.fractional_bits));  // FE_TONEAREST
  if (scaled > 32767.0 || scaled < -32768.0) {
    if (mode == Saturation::error) throw Error("to_fixed: overflow");
    return scaled > 0 ? INT16_MAX : INT16_MIN;
  }
  return static_cast<std::int16_t>(scaled);
}

inline double from_fixed(std::int16_t code, FixedPointFormat fmt) {
  return std::ldexp(static_cast<double>(code), -fmt.fractional_bits);
}

// Integer division rounding half to even; divisor > 0.
inline std::int64_t div_round_even(std::int64_t num, std::int64_t den) {
  std::int64_t q = num / den;
  std::int64_t r = num % den;
  if (r < 0) {
    r += den;
    --q;
  }
  const std::int64_t twice = 2 * r;
  if (twice > den || (twice == den && (q & 1) != 0)) ++q;
  return q;
}

}  // namespace rawisp
