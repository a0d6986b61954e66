#include "vlab/exact_sum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace vlab {

namespace {

using u128 = unsigned __int128;

constexpr std::uint64_t kLoadLimit = std::uint64_t{1} << 30;
constexpr std::int64_t kDigitMask = 0xFFFFFFFFll;

int msb_index(u128 w) {
  const auto hi = static_cast<std::uint64_t>(w >> 64);
  if (hi != 0) return 127 - std::countl_zero(hi);
  return 63 - std::countl_zero(static_cast<std::uint64_t>(w));
}

}  // namespace

void ExactSum::maybe_normalize(std::uint64_t incoming) {
  if (load_ + incoming > kLoadLimit) normalize();
}

void ExactSum::accumulate(double x, bool negate) {
  if (x == 0.0) return;
  if (x < 0) {
    x = -x;
    negate = !negate;
  }
  const auto bits = std::bit_cast<std::uint64_t>(x);
  const auto biased = static_cast<int>((bits >> 52) & 0x7FF);
  std::uint64_t mant = bits & ((std::uint64_t{1} << 52) - 1);
  int pos = 0;  // bit position of the mantissa LSB in the fixed-point frame
  if (biased == 0) {
    pos = 0;
  } else {
    mant |= std::uint64_t{1} << 52;
    pos = biased - 1;
  }
  maybe_normalize(1);
  const int digit = pos / kDigitBits;
  const u128 shifted = static_cast<u128>(mant) << (pos % kDigitBits);
  for (int j = 0; j < 3; ++j) {
    const auto chunk = static_cast<std::int64_t>(
        static_cast<std::uint64_t>(shifted >> (kDigitBits * j)) & kDigitMask);
    if (chunk == 0) continue;
    const int at = digit + j;
    digits_[at] += negate ? -chunk : chunk;
    lo_ = std::min(lo_, at);
    hi_ = std::max(hi_, at);
  }
  ++load_;
}

void ExactSum::add(double x) { accumulate(x, false); }
void ExactSum::sub(double x) { accumulate(x, true); }

ExactSum& ExactSum::operator+=(const ExactSum& other) {
  if (other.hi_ < 0) return *this;
  if (other.load_ > kLoadLimit / 2) {
    ExactSum copy = other;
    copy.normalize();
    return *this += copy;
  }
  maybe_normalize(other.load_);
  for (int i = other.lo_; i <= other.hi_; ++i) digits_[i] += other.digits_[i];
  lo_ = std::min(lo_, other.lo_);
  hi_ = std::max(hi_, other.hi_);
  load_ += other.load_;
  return *this;
}

ExactSum& ExactSum::operator-=(const ExactSum& other) {
  if (other.hi_ < 0) return *this;
  if (other.load_ > kLoadLimit / 2) {
    ExactSum copy = other;
    copy.normalize();
    return *this -= copy;
  }
  maybe_normalize(other.load_);
  for (int i = other.lo_; i <= other.hi_; ++i) digits_[i] -= other.digits_[i];
  lo_ = std::min(lo_, other.lo_);
  hi_ = std::max(hi_, other.hi_);
  load_ += other.load_;
  return *this;
}

void ExactSum::normalize() {
  load_ = 1;
  if (hi_ < 0) return;
  std::int64_t carry = 0;
  for (int i = lo_; i < kDigits; ++i) {
    const std::int64_t v = digits_[i] + carry;
    if (i == kDigits - 1) {
      digits_[i] = v;
      break;
    }
    const std::int64_t low = v & kDigitMask;
    carry = (v - low) >> kDigitBits;
    digits_[i] = low;
    if (carry == 0 && i >= hi_) break;
  }
  int lo = kDigits;
  int hi = -1;
  for (int i = lo_; i < kDigits; ++i) {
    if (digits_[i] != 0) {
      lo = std::min(lo, i);
      hi = i;
    }
  }
  lo_ = lo;
  hi_ = hi;
}

int ExactSum::sign() const {
  ExactSum c = *this;
  c.normalize();
  if (c.hi_ < 0) return 0;
  return c.digits_[c.hi_] < 0 ? -1 : 1;
}

bool ExactSum::operator==(const ExactSum& other) const {
  ExactSum a = *this;
  ExactSum b = other;
  a.normalize();
  b.normalize();
  if (a.lo_ != b.lo_ || a.hi_ != b.hi_) return false;
  for (int i = a.lo_; i <= a.hi_; ++i)
    if (a.digits_[i] != b.digits_[i]) return false;
  return true;
}

double ExactSum::value() const {
  ExactSum c = *this;
  c.normalize();
  if (c.hi_ < 0) return 0.0;
  double sign = 1.0;
  if (c.digits_[c.hi_] < 0) {
    sign = -1.0;
    for (int i = c.lo_; i <= c.hi_; ++i) c.digits_[i] = -c.digits_[i];
    c.normalize();
  }
  const int k = c.hi_;
  auto digit = [&](int i) -> u128 {
    return i >= 0 ? static_cast<u128>(static_cast<std::uint64_t>(c.digits_[i])) : 0;
  };
  // The top digit of a normalized positive number is < 2^32 unless the value
  // is far beyond the double range.
  if (k == kDigits - 1 && c.digits_[k] > kDigitMask)
    return sign * std::numeric_limits<double>::infinity();
  const u128 window = (digit(k) << 64) | (digit(k - 1) << 32) | digit(k - 2);
  bool sticky = false;
  for (int i = c.lo_; i < k - 2; ++i) sticky = sticky || c.digits_[i] != 0;
  const int base = kDigitBits * (k - 2) - kBias;  // weight of window bit 0
  const int top = msb_index(window);
  const int exponent = top + base;
  if (exponent >= 1024) return sign * std::numeric_limits<double>::infinity();
  if (exponent < -1022) {
    // Below the normal range every representable bit is kept: exact.
    const auto n = static_cast<std::uint64_t>((digit(1) << 32) | digit(0));
    return sign * std::ldexp(static_cast<double>(n), -kBias);
  }
  const int discard = top - 52;
  if (discard <= 0) return sign * std::ldexp(static_cast<double>(static_cast<std::uint64_t>(window)), base);
  u128 mant = window >> discard;
  const u128 rem = window & ((u128{1} << discard) - 1);
  const u128 half = u128{1} << (discard - 1);
  if (rem > half || (rem == half && (sticky || (mant & 1) != 0))) ++mant;
  return sign * std::ldexp(static_cast<double>(static_cast<std::uint64_t>(mant)), base + discard);
}

}  // namespace vlab
