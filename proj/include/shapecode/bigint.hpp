#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace shapecode {

using BigInt = boost::multiprecision::cpp_int;
using BigFloat = boost::multiprecision::cpp_bin_float_50;

namespace detail {

// Multiplicative inverse of an odd d modulo 2^64 (Newton iteration).
inline std::uint64_t inv64_odd(std::uint64_t d) {
  std::uint64_t x = d;
  for (int i = 0; i < 5; ++i) x *= 2 - d * x;
  return x;
}

}  // namespace detail

// Exact unsigned integer with fixed capacity. The rank/unrank walk kernels
// run on these instead of cpp_int: every quantity there is a string count
// bounded by m^L, and the table records whether that bound fits (see
// ClassTable::walk_fits). Division is exact division only.
class WalkInt {
 public:
  static constexpr int kCap = 8;  // 512 bits

  WalkInt() = default;
  explicit WalkInt(std::uint64_t v) {
    if (v) {
      limb_[0] = v;
      n_ = 1;
    }
  }

  bool is_zero() const { return n_ == 0; }

  void clear() { n_ = 0; }

  static int compare(const WalkInt& a, const WalkInt& b) {
    if (a.n_ != b.n_) return a.n_ < b.n_ ? -1 : 1;
    for (int i = a.n_ - 1; i >= 0; --i) {
      if (a.limb_[i] != b.limb_[i]) return a.limb_[i] < b.limb_[i] ? -1 : 1;
    }
    return 0;
  }

  bool operator==(const WalkInt& o) const { return compare(*this, o) == 0; }
  bool operator<(const WalkInt& o) const { return compare(*this, o) < 0; }
  bool operator<=(const WalkInt& o) const { return compare(*this, o) <= 0; }

  void operator+=(const WalkInt& o) {
    int n = n_ > o.n_ ? n_ : o.n_;
    unsigned char carry = 0;
    for (int i = 0; i < n; ++i) {
      std::uint64_t a = i < n_ ? limb_[i] : 0;
      std::uint64_t b = i < o.n_ ? o.limb_[i] : 0;
      std::uint64_t s = a + b;
      std::uint64_t c1 = s < a;
      s += carry;
      carry = static_cast<unsigned char>(c1 | (s < static_cast<std::uint64_t>(carry)));
      limb_[i] = s;
    }
    if (carry) {
      if (n >= kCap) throw std::overflow_error("WalkInt overflow in add");
      limb_[n++] = 1;
    }
    n_ = n;
  }

  // Requires *this >= o.
  void operator-=(const WalkInt& o) {
    unsigned char borrow = 0;
    for (int i = 0; i < n_; ++i) {
      std::uint64_t a = limb_[i];
      std::uint64_t b = i < o.n_ ? o.limb_[i] : 0;
      std::uint64_t d = a - b;
      std::uint64_t br1 = a < b;
      std::uint64_t d2 = d - borrow;
      borrow = static_cast<unsigned char>(br1 | (d < static_cast<std::uint64_t>(borrow)));
      limb_[i] = d2;
    }
    while (n_ > 0 && limb_[n_ - 1] == 0) --n_;
  }

  void mul_small(std::uint64_t s) {
    if (s == 0 || n_ == 0) {
      n_ = 0;
      return;
    }
    if (s == 1) return;
    std::uint64_t carry = 0;
    for (int i = 0; i < n_; ++i) {
      unsigned __int128 p = static_cast<unsigned __int128>(limb_[i]) * s + carry;
      limb_[i] = static_cast<std::uint64_t>(p);
      carry = static_cast<std::uint64_t>(p >> 64);
    }
    if (carry) {
      if (n_ >= kCap) throw std::overflow_error("WalkInt overflow in mul_small");
      limb_[n_++] = carry;
    }
  }

  // Exact division by a small divisor; *this must be a multiple of d.
  void exact_div_small(std::uint64_t d) {
    if (d == 1 || n_ == 0) return;
    int tz = std::countr_zero(d);
    if (tz) {
      shift_right(tz);
      d >>= tz;
      if (d == 1) return;
    }
    // Jebelean exact division, LSB first.
    const std::uint64_t inv = detail::inv64_odd(d);
    std::uint64_t carry = 0;
    for (int i = 0; i < n_; ++i) {
      std::uint64_t a = limb_[i];
      std::uint64_t t = a - carry;
      std::uint64_t borrow = a < carry;
      std::uint64_t q = t * inv;
      limb_[i] = q;
      unsigned __int128 p = static_cast<unsigned __int128>(q) * d;
      carry = static_cast<std::uint64_t>(p >> 64) + borrow;
    }
    while (n_ > 0 && limb_[n_ - 1] == 0) --n_;
  }

  WalkInt mul(const WalkInt& o) const {
    WalkInt r;
    if (n_ == 0 || o.n_ == 0) return r;
    std::uint64_t acc[2 * kCap] = {};
    for (int i = 0; i < n_; ++i) {
      std::uint64_t carry = 0;
      for (int j = 0; j < o.n_; ++j) {
        unsigned __int128 p = static_cast<unsigned __int128>(limb_[i]) * o.limb_[j];
        p += acc[i + j];
        p += carry;
        acc[i + j] = static_cast<std::uint64_t>(p);
        carry = static_cast<std::uint64_t>(p >> 64);
      }
      acc[i + o.n_] += carry;
    }
    int n = n_ + o.n_;
    while (n > 0 && acc[n - 1] == 0) --n;
    if (n > kCap) throw std::overflow_error("WalkInt overflow in mul");
    for (int i = 0; i < n; ++i) r.limb_[i] = acc[i];
    r.n_ = n;
    return r;
  }

  std::uint64_t to_u64() const {
    if (n_ > 1) throw std::overflow_error("WalkInt does not fit u64");
    return n_ ? limb_[0] : 0;
  }

  BigInt to_bigint() const {
    if (n_ == 0) return BigInt(0);
    BigInt r;
    boost::multiprecision::import_bits(r, limb_, limb_ + n_, 64, false);
    return r;
  }

  static WalkInt from_bigint(const BigInt& v) {
    WalkInt r;
    if (v.is_zero()) return r;
    std::vector<std::uint64_t> limbs;
    boost::multiprecision::export_bits(v, std::back_inserter(limbs), 64, false);
    if (limbs.size() > kCap) throw std::overflow_error("BigInt does not fit WalkInt");
    for (std::size_t i = 0; i < limbs.size(); ++i) r.limb_[i] = limbs[i];
    r.n_ = static_cast<int>(limbs.size());
    return r;
  }

  std::size_t bit_count() const {
    if (n_ == 0) return 0;
    return static_cast<std::size_t>(n_ - 1) * 64 + (64 - std::countl_zero(limb_[n_ - 1]));
  }

 private:
  void shift_right(int bits) {
    int i = 0;
    for (; i + 1 < n_; ++i)
      limb_[i] = (limb_[i] >> bits) | (limb_[i + 1] << (64 - bits));
    if (n_ > 0) limb_[n_ - 1] >>= bits;
    while (n_ > 0 && limb_[n_ - 1] == 0) --n_;
  }

  std::uint64_t limb_[kCap] = {};
  int n_ = 0;
};

}  // namespace shapecode
