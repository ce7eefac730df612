#include "shapecode/typeclass.hpp"

#include <algorithm>
#include <cmath>

namespace shapecode {

BigInt multinomial(const CountVector& cv) {
  BigInt r = 1;
  std::uint64_t seen = 0;
  for (std::uint32_t c : cv.counts) {
    // r *= C(seen + c, c), accumulated incrementally
    for (std::uint32_t i = 1; i <= c; ++i) {
      ++seen;
      r *= seen;
      r /= i;
    }
  }
  return r;
}

double class_info(const CountVector& cv, KeyMode mode, const Ensemble* ensemble) {
  if (mode == KeyMode::empirical) return empirical_information_of_counts(cv.counts);
  if (!ensemble) throw std::invalid_argument("model-mode class_info requires an ensemble");
  if (static_cast<int>(cv.counts.size()) != ensemble->size())
    throw std::invalid_argument("count vector size does not match ensemble");
  double bits = 0.0;
  for (std::size_t a = 0; a < cv.counts.size(); ++a)
    bits -= static_cast<double>(cv.counts[a]) * std::log2(ensemble->prob(static_cast<int>(a)));
  return bits;
}

namespace {

// -sum n_a log2 p_a at 50 decimal digits, index-order summation.
BigFloat model_key(const std::vector<std::uint32_t>& counts, const Ensemble& e) {
  BigFloat bits = 0;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    if (counts[a] == 0) continue;
    bits -= BigFloat(counts[a]) * boost::multiprecision::log2(BigFloat(e.prob(static_cast<int>(a))));
  }
  return bits;
}

}  // namespace

int compare_classes(const CountVector& u, const CountVector& v, KeyMode mode,
                    const Ensemble* ensemble) {
  if (u.total != v.total) throw std::invalid_argument("compare_classes requires equal totals");
  if (mode == KeyMode::empirical) {
    BigInt ku = detail::empirical_exact_key_span(u.counts.data(), u.counts.size());
    BigInt kv = detail::empirical_exact_key_span(v.counts.data(), v.counts.size());
    // larger key means lower information, i.e. earlier in the order
    if (ku != kv) return ku > kv ? -1 : 1;
    return 0;
  }
  if (!ensemble) throw std::invalid_argument("model-mode compare requires an ensemble");
  BigFloat ku = model_key(u.counts, *ensemble);
  BigFloat kv = model_key(v.counts, *ensemble);
  BigFloat diff = ku - kv;
  static const BigFloat kTie("1e-20");
  if (diff > kTie) return 1;
  if (diff < -kTie) return -1;
  return 0;
}

std::uint64_t count_classes(int m, int length, std::uint64_t cap) {
  if (m < 2) throw std::invalid_argument("alphabet size must be >= 2");
  if (length < 0) throw std::invalid_argument("length must be >= 0");
  // C(length + m - 1, m - 1) with overflow/cap guard
  unsigned __int128 r = 1;
  for (int i = 1; i <= m - 1; ++i) {
    r = r * static_cast<unsigned>(length + i) / static_cast<unsigned>(i);
    if (r > static_cast<unsigned __int128>(cap) * 2 + 2)
      throw ResourceLimitError("class enumeration for m=" + std::to_string(m) + ", N=" +
                               std::to_string(length) + " exceeds the cap of " + std::to_string(cap));
  }
  std::uint64_t n = static_cast<std::uint64_t>(r);
  if (n > cap)
    throw ResourceLimitError("class enumeration for m=" + std::to_string(m) + ", N=" +
                             std::to_string(length) + " exceeds the cap of " + std::to_string(cap));
  return n;
}

std::vector<CountVector> enumerate_classes(int m, int length, std::uint64_t cap) {
  std::uint64_t n = count_classes(m, length, cap);
  std::vector<CountVector> out;
  out.reserve(n);
  CountVector cur;
  cur.counts.assign(static_cast<std::size_t>(m), 0);
  cur.total = static_cast<std::uint32_t>(length);
  // lexicographic recursion over coordinates
  auto rec = [&](auto&& self, int d, std::uint32_t rem) -> void {
    if (d == m - 1) {
      cur.counts[static_cast<std::size_t>(d)] = rem;
      out.push_back(cur);
      return;
    }
    for (std::uint32_t v = 0; v <= rem; ++v) {
      cur.counts[static_cast<std::size_t>(d)] = v;
      self(self, d + 1, rem - v);
    }
  };
  rec(rec, 0, static_cast<std::uint32_t>(length));
  return out;
}

}  // namespace shapecode
