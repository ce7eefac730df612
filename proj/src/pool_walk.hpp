#pragma once

// Digit-walk kernels over a tie group's pooled string set (the union of its
// type classes, ordered lexicographically). Each kernel keeps one exact
// "remaining completions" counter per class; consuming symbol s at position j
// with r = L - j symbols left updates M_v <- M_v * (v_s - c_s) / r, and the
// count of pool strings extending the prefix with a symbol a < s is
// sum_v M_v * (v_a - c_a) / r. All divisions are exact.
//
// Int is WalkInt when the table's counts fit (ClassTable::walk_fits), else
// BigInt.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "shapecode/typeclass.hpp"

namespace shapecode::walk {

inline void mul_small(WalkInt& a, std::uint64_t s) { a.mul_small(s); }
inline void mul_small(BigInt& a, std::uint64_t s) { a *= s; }
inline void ediv_small(WalkInt& a, std::uint64_t d) { a.exact_div_small(d); }
inline void ediv_small(BigInt& a, std::uint64_t d) { a /= d; }
inline bool is_zero(const WalkInt& a) { return a.is_zero(); }
inline bool is_zero(const BigInt& a) { return a.is_zero(); }
inline int cmp(const WalkInt& a, const WalkInt& b) { return WalkInt::compare(a, b); }
inline int cmp(const BigInt& a, const BigInt& b) { return a.compare(b); }
inline BigInt to_bigint(const WalkInt& a) { return a.to_bigint(); }
inline BigInt to_bigint(const BigInt& a) { return a; }

template <class Int>
struct IntFrom;
template <>
struct IntFrom<WalkInt> {
  static WalkInt big(const BigInt& v) { return WalkInt::from_bigint(v); }
};
template <>
struct IntFrom<BigInt> {
  static BigInt big(const BigInt& v) { return v; }
};

struct GroupView {
  const ClassTable* table;
  const std::uint16_t* counts;  // first class, row-major
  std::size_t num;
  int m;
  int L;
  const std::uint16_t* cls(std::size_t i) const {
    return counts + i * static_cast<std::size_t>(m);
  }
};

inline GroupView view_of(const ClassTable& t, std::size_t gid) {
  const auto& g = t.group(gid);
  return GroupView{&t, t.class_counts(g.first_class), g.num_classes, t.alphabet_size(), t.length()};
}

// x *= C(n, k)
inline void mul_binom(WalkInt& x, const ClassTable& t, int n, int k) {
  x = x.mul(t.walk_binom(n, k));
}
inline void mul_binom(BigInt& x, const ClassTable& t, int n, int k) {
  (void)t;
  if (k > n - k) k = n - k;
  for (int i = 1; i <= k; ++i) {
    x *= static_cast<unsigned>(n - k + i);
    x /= static_cast<unsigned>(i);
  }
}

// Number of length-R completions inside class v given consumed counts c.
template <class Int>
Int class_completions(const GroupView& g, const std::uint16_t* v, const std::uint32_t* c, int R) {
  Int x(1);
  int rem = R;
  for (int d = 0; d < g.m - 1; ++d) {
    const int k = static_cast<int>(v[d]) - static_cast<int>(c[d]);
    mul_binom(x, *g.table, rem, k);
    rem -= k;
  }
  return x;
}

// Shared per-walk state; thread_local in the kernels.
template <class Int>
struct State {
  std::vector<Int> M;
  std::vector<Int> Mn;
  std::vector<std::uint8_t> act;
  std::vector<std::uint32_t> c;
  Int tmp;
};

template <class Int>
State<Int>& state() {
  thread_local State<Int> s;
  return s;
}

template <class Int>
void init_full(const GroupView& g, State<Int>& s) {
  s.M.assign(g.num, Int(0));
  s.act.assign(g.num, 1);
  s.c.assign(static_cast<std::size_t>(g.m), 0);
  for (std::size_t i = 0; i < g.num; ++i)
    s.M[i] = class_completions<Int>(g, g.cls(i), s.c.data(), g.L);
}

// Count of pool strings lexicographically below x (x of length L with
// counts in the pool's class set).
template <class Int>
Int pool_rank(const GroupView& g, const Symbol* x) {
  auto& s = state<Int>();
  init_full(g, s);
  Int acc(0);
  const int m = g.m, L = g.L;
  for (int j = 0; j < L; ++j) {
    const std::uint64_t r = static_cast<std::uint64_t>(L - j);
    const Symbol sym = x[j];
    for (std::size_t i = 0; i < g.num; ++i) {
      if (!s.act[i]) continue;
      const std::uint16_t* v = g.cls(i);
      std::uint64_t below = 0;
      for (int a = 0; a < sym; ++a) below += v[a] - s.c[a];
      if (below) {
        s.tmp = s.M[i];
        mul_small(s.tmp, below);
        ediv_small(s.tmp, r);
        acc += s.tmp;
      }
      const std::uint32_t rem = static_cast<std::uint32_t>(v[sym]) - s.c[sym];
      if (rem) {
        mul_small(s.M[i], rem);
        ediv_small(s.M[i], r);
      } else {
        s.act[i] = 0;
      }
    }
    ++s.c[sym];
  }
  return acc;
}

// w-th pool string (0-based, lexicographic); w < pool size.
template <class Int>
void pool_unrank(const GroupView& g, Int w, Symbol* out) {
  auto& s = state<Int>();
  init_full(g, s);
  s.Mn.assign(g.num, Int(0));
  const int m = g.m, L = g.L;
  for (int j = 0; j < L; ++j) {
    const std::uint64_t r = static_cast<std::uint64_t>(L - j);
    bool placed = false;
    for (int a = 0; a < m && !placed; ++a) {
      Int cnt(0);
      for (std::size_t i = 0; i < g.num; ++i) {
        if (!s.act[i]) continue;
        const std::uint16_t* v = g.cls(i);
        const std::uint32_t rem = static_cast<std::uint32_t>(v[a]) - s.c[a];
        if (v[a] > s.c[a]) {
          s.Mn[i] = s.M[i];
          mul_small(s.Mn[i], rem);
          ediv_small(s.Mn[i], r);
          cnt += s.Mn[i];
        } else {
          s.Mn[i] = Int(0);
        }
      }
      if (cmp(w, cnt) < 0) {
        out[j] = static_cast<Symbol>(a);
        for (std::size_t i = 0; i < g.num; ++i) {
          if (!s.act[i]) continue;
          const std::uint16_t* v = g.cls(i);
          if (v[a] > s.c[a])
            s.M[i] = s.Mn[i];
          else
            s.act[i] = 0;
        }
        ++s.c[a];
        placed = true;
      } else {
        w -= cnt;
      }
    }
    if (!placed) throw std::logic_error("pool_unrank: index exceeds pool size");
  }
}

// Completions of a prefix with the given counts (j symbols consumed).
template <class Int>
Int pool_count_completions(const GroupView& g, const std::uint32_t* c, int j) {
  const int R = g.L - j;
  Int acc(0);
  for (std::size_t i = 0; i < g.num; ++i) {
    const std::uint16_t* v = g.cls(i);
    bool ok = true;
    for (int a = 0; a < g.m; ++a)
      if (v[a] < c[a]) {
        ok = false;
        break;
      }
    if (!ok) continue;
    acc += class_completions<Int>(g, v, c, R);
  }
  return acc;
}

// Count of pool strings that extend prefix p and are lexicographically
// strictly below t (t a pool string of full length).
template <class Int>
Int pool_count_prefix_below(const GroupView& g, const Symbol* p, int plen, const Symbol* t) {
  int rel = 0;
  for (int j = 0; j < plen && rel == 0; ++j)
    rel = p[j] < t[j] ? -1 : (p[j] > t[j] ? 1 : 0);
  if (rel > 0) return Int(0);

  thread_local std::vector<std::uint32_t> c;
  c.assign(static_cast<std::size_t>(g.m), 0);
  for (int j = 0; j < plen; ++j) ++c[p[j]];
  if (rel < 0) return pool_count_completions<Int>(g, c.data(), plen);

  // p is a prefix of t: walk t's remaining symbols
  auto& s = state<Int>();
  s.M.assign(g.num, Int(0));
  s.act.assign(g.num, 0);
  const int L = g.L;
  for (std::size_t i = 0; i < g.num; ++i) {
    const std::uint16_t* v = g.cls(i);
    bool ok = true;
    for (int a = 0; a < g.m; ++a)
      if (v[a] < c[a]) {
        ok = false;
        break;
      }
    if (!ok) continue;
    s.act[i] = 1;
    s.M[i] = class_completions<Int>(g, v, c.data(), L - plen);
  }
  Int acc(0);
  for (int j = plen; j < L; ++j) {
    const std::uint64_t r = static_cast<std::uint64_t>(L - j);
    const Symbol sym = t[j];
    for (std::size_t i = 0; i < g.num; ++i) {
      if (!s.act[i]) continue;
      const std::uint16_t* v = g.cls(i);
      std::uint64_t below = 0;
      for (int a = 0; a < sym; ++a)
        if (v[a] > c[a]) below += v[a] - c[a];
      if (below) {
        s.tmp = s.M[i];
        mul_small(s.tmp, below);
        ediv_small(s.tmp, r);
        acc += s.tmp;
      }
      if (v[sym] > c[sym]) {
        mul_small(s.M[i], static_cast<std::uint32_t>(v[sym]) - c[sym]);
        ediv_small(s.M[i], r);
      } else {
        s.act[i] = 0;
      }
    }
    ++c[sym];
  }
  return acc;
}

// Interval of cuts (ascending pool offsets) containing pool_rank(x),
// resolved with an early-stopping walk: the walk maintains
// [lo, lo + width) as the candidate range for the rank and descends only
// while a cut point falls inside it.
template <class Int>
std::size_t pool_locate_interval(const GroupView& g, const Symbol* x, const std::vector<Int>& cuts) {
  auto& s = state<Int>();
  init_full(g, s);
  Int lo(0);
  const int m = g.m, L = g.L;
  int j = 0;
  for (;;) {
    // first cut strictly above lo
    std::size_t idx = 0;
    {
      std::size_t a = 0, b = cuts.size();
      while (a < b) {
        std::size_t mid = (a + b) / 2;
        if (cmp(cuts[mid], lo) <= 0)
          a = mid + 1;
        else
          b = mid;
      }
      idx = a;
    }
    if (idx == cuts.size()) return idx;
    Int hi = lo;
    bool has_width = false;
    for (std::size_t i = 0; i < g.num; ++i) {
      if (s.act[i]) {
        hi += s.M[i];
        has_width = true;
      }
    }
    (void)has_width;
    if (cmp(cuts[idx], hi) >= 0) return idx;
    // descend one symbol
    const std::uint64_t r = static_cast<std::uint64_t>(L - j);
    const Symbol sym = x[j];
    for (std::size_t i = 0; i < g.num; ++i) {
      if (!s.act[i]) continue;
      const std::uint16_t* v = g.cls(i);
      std::uint64_t below = 0;
      for (int a = 0; a < sym; ++a) below += v[a] - s.c[a];
      if (below) {
        s.tmp = s.M[i];
        mul_small(s.tmp, below);
        ediv_small(s.tmp, r);
        lo += s.tmp;
      }
      const std::uint32_t rem = static_cast<std::uint32_t>(v[sym]) - s.c[sym];
      if (rem) {
        mul_small(s.M[i], rem);
        ediv_small(s.M[i], r);
      } else {
        s.act[i] = 0;
      }
    }
    ++s.c[sym];
    ++j;
  }
}

// Does any class of the pool dominate the consumed counts componentwise?
inline bool pool_has_completion(const GroupView& g, const std::uint32_t* c) {
  for (std::size_t i = 0; i < g.num; ++i) {
    const std::uint16_t* v = g.cls(i);
    bool ok = true;
    for (int a = 0; a < g.m; ++a)
      if (v[a] < c[a]) {
        ok = false;
        break;
      }
    if (ok) return true;
  }
  return false;
}

// With p a prefix of t: is the lexicographically smallest pool completion
// of p strictly below t?
inline bool pool_min_completion_below(const GroupView& g, const Symbol* p, int plen,
                                      const Symbol* t) {
  thread_local std::vector<std::uint32_t> c;
  c.assign(static_cast<std::size_t>(g.m), 0);
  for (int j = 0; j < plen; ++j) ++c[p[j]];
  if (!pool_has_completion(g, c.data())) return false;
  for (int j = plen; j < g.L; ++j) {
    bool advanced = false;
    for (int a = 0; a < g.m; ++a) {
      ++c[a];
      if (pool_has_completion(g, c.data())) {
        if (a < t[j]) return true;
        if (a > t[j]) return false;
        advanced = true;
        break;  // a == t[j], keep walking
      }
      --c[a];
    }
    if (!advanced) return false;
  }
  return false;  // the only remaining completion is t itself
}

}  // namespace shapecode::walk
