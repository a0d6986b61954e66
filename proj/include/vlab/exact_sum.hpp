#pragma once

#include <array>
#include <cstdint>

namespace vlab {

// Exact accumulator for sums of finite doubles.
//
// The value is held as a fixed-point number wide enough for the whole double
// range: digit i carries weight 2^(32*i - 1074). Digits are signed 64-bit
// words holding 32-bit payloads, so carries can be deferred for ~2^30
// operations. Because the representation is exact, the rounded value() does
// not depend on the order in which terms were added, and prefix differences
// reproduce direct sums bit for bit.
class ExactSum {
 public:
  static constexpr int kDigitBits = 32;
  static constexpr int kBias = 1074;
  static constexpr int kDigits = 70;

  ExactSum() { digits_.fill(0); }

  void add(double x);
  void sub(double x);

  ExactSum& operator+=(const ExactSum& other);
  ExactSum& operator-=(const ExactSum& other);
  friend ExactSum operator+(ExactSum a, const ExactSum& b) { return a += b; }
  friend ExactSum operator-(ExactSum a, const ExactSum& b) { return a -= b; }

  // Correctly rounded (round-half-even) value. Saturates to +/-inf.
  double value() const;
  int sign() const;
  bool is_zero() const { return sign() == 0; }

  // Exact equality of the represented numbers.
  bool operator==(const ExactSum& other) const;

  // Carry-propagates so every digit but the top one lies in [0, 2^32).
  void normalize();

 private:
  void accumulate(double x, bool negate);
  void maybe_normalize(std::uint64_t incoming);

  std::array<std::int64_t, kDigits> digits_;
  int lo_ = kDigits;  // lowest digit that may be nonzero
  int hi_ = -1;       // highest digit that may be nonzero
  std::uint64_t load_ = 1;  // bound on |digit| / 2^32
};

}  // namespace vlab
