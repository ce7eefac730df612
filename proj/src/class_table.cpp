#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>

#include "shapecode/typeclass.hpp"

namespace shapecode {

// ---- composition ranking ----------------------------------------------

// comp_binom_[rem * m + k] = C(rem + k, k) = number of compositions of rem
// into k+1 parts. Every entry is bounded by the table's class count.
namespace {

std::vector<std::uint64_t> build_comp_binom(int m, int length) {
  std::vector<std::uint64_t> t(static_cast<std::size_t>(length + 1) * m);
  for (int k = 0; k < m; ++k) t[static_cast<std::size_t>(k)] = 1;  // rem = 0
  for (int rem = 1; rem <= length; ++rem) {
    std::uint64_t* row = t.data() + static_cast<std::size_t>(rem) * m;
    const std::uint64_t* prev = row - m;
    row[0] = 1;
    for (int k = 1; k < m; ++k) row[k] = prev[k] + row[k - 1];
  }
  return t;
}

}  // namespace

std::uint64_t ClassTable::composition_rank(const std::uint32_t* counts) const {
  const int m = m_;
  std::uint64_t rank = 0;
  std::uint32_t rem = static_cast<std::uint32_t>(length_);
  for (int d = 0; d < m - 1; ++d) {
    const int p = m - d - 1;
    rank += comp_binom_[static_cast<std::size_t>(rem) * m + p] -
            comp_binom_[static_cast<std::size_t>(rem - counts[d]) * m + p];
    rem -= counts[d];
  }
  return rank;
}

std::size_t ClassTable::group_of_counts(const std::uint32_t* counts) const {
  return gid_by_enum_[composition_rank(counts)];
}

std::size_t ClassTable::group_containing(const BigInt& rank) const {
  if (rank < 0 || rank >= total_) throw std::out_of_range("rank outside [0, m^N)");
  // last group with cumulative_start <= rank
  std::size_t lo = 0, hi = groups_.size();
  while (hi - lo > 1) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (groups_[mid].cumulative_start <= rank)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

void ClassTable::finalize() {
  comp_binom_ = build_comp_binom(m_, length_);
  comp_binom_cols_ = m_;

  const double bits = static_cast<double>(length_) * std::log2(static_cast<double>(m_));
  walk_fits_ = bits + 24.0 < 64.0 * WalkInt::kCap;
  if (walk_fits_) {
    const int L = length_;
    walk_binom_.assign(static_cast<std::size_t>(L + 1) * (L + 2) / 2, WalkInt());
    auto at = [&](int n, int k) -> WalkInt& {
      return walk_binom_[static_cast<std::size_t>(n) * (n + 1) / 2 + k];
    };
    at(0, 0) = WalkInt(1);
    for (int n = 1; n <= L; ++n) {
      at(n, 0) = WalkInt(1);
      at(n, n) = WalkInt(1);
      for (int k = 1; k < n; ++k) {
        WalkInt v = at(n - 1, k - 1);
        v += at(n - 1, k);
        at(n, k) = v;
      }
    }
  }

  BigInt cum = 0;
  for (auto& g : groups_) {
    g.cumulative_start = cum;
    cum += g.size;
    CountVector cv;
    const std::uint16_t* c = class_counts(g.first_class);
    cv.counts.assign(c, c + m_);
    cv.total = static_cast<std::uint32_t>(length_);
    const Ensemble* e = ensemble_ ? &*ensemble_ : nullptr;
    g.info_bits = class_info(cv, mode_, e);
  }
  total_ = boost::multiprecision::pow(BigInt(m_), static_cast<unsigned>(length_));
  if (cum != total_) throw std::logic_error("class table sizes do not sum to m^N");
}

// ---- build --------------------------------------------------------------

namespace {

using u128 = unsigned __int128;

// log2(n) in 2^-60 units, rounded; exact for powers of two.
std::vector<std::uint64_t> build_log2_table(int max_n) {
  std::vector<std::uint64_t> t(static_cast<std::size_t>(max_n) + 1, 0);
  const BigFloat scale = boost::multiprecision::pow(BigFloat(2), 60);
  for (int n = 2; n <= max_n; ++n) {
    BigFloat v = boost::multiprecision::log2(BigFloat(n)) * scale + BigFloat(0.5);
    t[static_cast<std::size_t>(n)] = v.convert_to<std::uint64_t>();
  }
  return t;
}

struct Run {
  std::uint32_t begin = 0, end = 0;  // span in the sorted order
  u128 fp = 0;
};

}  // namespace

struct TableBuilder {
  static std::shared_ptr<ClassTable> run(int m, int length, KeyMode mode,
                                         const Ensemble* ensemble, std::uint64_t cap) {
    if (length < 1) throw std::invalid_argument("table length must be >= 1");
    if (length > 65535) throw ResourceLimitError("table length > 65535 is unsupported");
    if (mode == KeyMode::model) {
      if (!ensemble) throw std::invalid_argument("model mode requires an ensemble");
      if (ensemble->size() != m) throw std::invalid_argument("ensemble size does not match alphabet");
    }
    const std::uint64_t num64 = count_classes(m, length, cap);
    const std::size_t num = static_cast<std::size_t>(num64);
    if (num64 > 0xFFFFFFFFull) throw ResourceLimitError("class count exceeds 2^32");

    auto table = std::shared_ptr<ClassTable>(new ClassTable());
    ClassTable& t = *table;
    t.m_ = m;
    t.length_ = length;
    t.mode_ = mode;
    if (ensemble) t.ensemble_ = *ensemble;
    t.num_classes_ = num;

    // 1. enumerate compositions in lex order
    std::vector<std::uint16_t> counts_enum(num * static_cast<std::size_t>(m));
    {
      std::vector<std::uint16_t> cur(static_cast<std::size_t>(m), 0);
      std::size_t idx = 0;
      auto rec = [&](auto&& self, int d, int rem) -> void {
        if (d == m - 1) {
          cur[static_cast<std::size_t>(d)] = static_cast<std::uint16_t>(rem);
          std::memcpy(counts_enum.data() + idx * m, cur.data(), sizeof(std::uint16_t) * m);
          ++idx;
          return;
        }
        for (int v = 0; v <= rem; ++v) {
          cur[static_cast<std::size_t>(d)] = static_cast<std::uint16_t>(v);
          self(self, d + 1, rem - v);
        }
      };
      rec(rec, 0, length);
    }

    std::vector<std::uint32_t> order(num);
    for (std::size_t i = 0; i < num; ++i) order[i] = static_cast<std::uint32_t>(i);

    // final global order of enum indices, and group spans over it
    std::vector<std::uint32_t> global;
    global.reserve(num);
    std::vector<std::pair<std::size_t, std::size_t>> group_spans;

    if (mode == KeyMode::empirical) {
      build_empirical_order(t, counts_enum, order, global, group_spans);
    } else {
      build_model_order(t, counts_enum, order, global, group_spans);
    }

    // sort classes of each group lexicographically (deterministic pools)
    auto lex_less = [&](std::uint32_t a, std::uint32_t b) {
      const std::uint16_t* ca = counts_enum.data() + static_cast<std::size_t>(a) * m;
      const std::uint16_t* cb = counts_enum.data() + static_cast<std::size_t>(b) * m;
      return std::lexicographical_compare(ca, ca + m, cb, cb + m);
    };
    for (auto [b, e] : group_spans) std::sort(global.begin() + b, global.begin() + e, lex_less);

    // materialize global class order and the enum -> group map
    t.class_counts_.resize(num * static_cast<std::size_t>(m));
    t.gid_by_enum_.resize(num);
    t.groups_.resize(group_spans.size());
    for (std::size_t g = 0; g < group_spans.size(); ++g) {
      auto [b, e] = group_spans[g];
      t.groups_[g].first_class = b;
      t.groups_[g].num_classes = e - b;
      for (std::size_t i = b; i < e; ++i) {
        std::memcpy(t.class_counts_.data() + i * m, counts_enum.data() + static_cast<std::size_t>(global[i]) * m,
                    sizeof(std::uint16_t) * m);
        t.gid_by_enum_[global[i]] = static_cast<std::uint32_t>(g);
      }
    }

    // group sizes: exact multinomial sums accumulated along the enumeration
    const double fbits = static_cast<double>(length) * std::log2(static_cast<double>(m));
    if (fbits + 24.0 < 64.0 * WalkInt::kCap) {
      accumulate_sizes<WalkInt>(t, m, length);
    } else {
      accumulate_sizes<BigInt>(t, m, length);
    }

    t.finalize();
    return table;
  }

  // Sorted order + tie groups under the exact empirical key prod n^n.
  // Fast path: 2^-60 fixed-point Sum n*log2(n) keys; exact-key comparison
  // resolves anything within the rounding margin.
  static void build_empirical_order(ClassTable& t, const std::vector<std::uint16_t>& counts_enum,
                                    std::vector<std::uint32_t>& order,
                                    std::vector<std::uint32_t>& global,
                                    std::vector<std::pair<std::size_t, std::size_t>>& group_spans) {
    const int m = t.m_;
    const int length = t.length_;
    const std::size_t num = order.size();
    const auto l2 = build_log2_table(length);

    std::vector<u128> fp(num);
    for (std::size_t i = 0; i < num; ++i) {
      const std::uint16_t* c = counts_enum.data() + i * m;
      u128 k = 0;
      for (int a = 0; a < m; ++a) k += static_cast<u128>(c[a]) * l2[c[a]];
      fp[i] = k;
    }

    auto multiset_cmp = [&](std::uint32_t a, std::uint32_t b) {
      thread_local std::vector<std::uint16_t> sa, sb;
      const std::uint16_t* ca = counts_enum.data() + static_cast<std::size_t>(a) * m;
      const std::uint16_t* cb = counts_enum.data() + static_cast<std::size_t>(b) * m;
      sa.assign(ca, ca + m);
      sb.assign(cb, cb + m);
      std::sort(sa.begin(), sa.end(), std::greater<>());
      std::sort(sb.begin(), sb.end(), std::greater<>());
      if (sa < sb) return -1;
      if (sb < sa) return 1;
      return 0;
    };

    // descending key = ascending information; ties broken by multiset then lex
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (fp[a] != fp[b]) return fp[a] > fp[b];
      int mc = multiset_cmp(a, b);
      if (mc != 0) return mc < 0;
      const std::uint16_t* ca = counts_enum.data() + static_cast<std::size_t>(a) * m;
      const std::uint16_t* cb = counts_enum.data() + static_cast<std::size_t>(b) * m;
      return std::lexicographical_compare(ca, ca + m, cb, cb + m);
    });

    // runs of identical multisets (these always share the exact key)
    std::vector<Run> runs;
    for (std::size_t i = 0; i < num;) {
      std::size_t j = i + 1;
      while (j < num && fp[order[j]] == fp[order[i]] && multiset_cmp(order[i], order[j]) == 0) ++j;
      runs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), fp[order[i]]});
      i = j;
    }

    // windows of runs whose fixed-point keys are within the rounding margin:
    // order and merge those by the exact integer key
    const u128 margin = static_cast<u128>(16) * static_cast<u128>(length) + 1024;
    auto exact_key = [&](const Run& r) {
      return detail::empirical_exact_key_span(counts_enum.data() + static_cast<std::size_t>(order[r.begin]) * m,
                                              static_cast<std::size_t>(m));
    };

    global.reserve(num);
    std::size_t ri = 0;
    while (ri < runs.size()) {
      std::size_t rj = ri + 1;
      while (rj < runs.size() && runs[rj - 1].fp - runs[rj].fp <= margin) ++rj;
      if (rj - ri == 1) {
        std::size_t b = global.size();
        for (std::uint32_t p = runs[ri].begin; p < runs[ri].end; ++p) global.push_back(order[p]);
        group_spans.emplace_back(b, global.size());
      } else {
        // rare: exact comparison decides order and grouping inside the window
        std::vector<std::size_t> idx(rj - ri);
        std::vector<BigInt> keys(rj - ri);
        for (std::size_t k = 0; k < idx.size(); ++k) {
          idx[k] = ri + k;
          keys[k] = exact_key(runs[ri + k]);
        }
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
          return keys[a - ri] > keys[b - ri];  // descending key = ascending info
        });
        std::size_t k = 0;
        while (k < idx.size()) {
          std::size_t k2 = k + 1;
          while (k2 < idx.size() && keys[idx[k2] - ri] == keys[idx[k] - ri]) ++k2;
          std::size_t b = global.size();
          for (std::size_t q = k; q < k2; ++q) {
            const Run& r = runs[idx[q]];
            for (std::uint32_t p = r.begin; p < r.end; ++p) global.push_back(order[p]);
          }
          group_spans.emplace_back(b, global.size());
          k = k2;
        }
      }
      ri = rj;
    }
  }

  static void build_model_order(ClassTable& t, const std::vector<std::uint16_t>& counts_enum,
                                std::vector<std::uint32_t>& order,
                                std::vector<std::uint32_t>& global,
                                std::vector<std::pair<std::size_t, std::size_t>>& group_spans) {
    const int m = t.m_;
    const std::size_t num = order.size();
    const Ensemble& e = *t.ensemble_;

    std::vector<BigFloat> w(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) w[static_cast<std::size_t>(a)] = -boost::multiprecision::log2(BigFloat(e.prob(a)));
    std::vector<BigFloat> key(num);
    for (std::size_t i = 0; i < num; ++i) {
      const std::uint16_t* c = counts_enum.data() + i * m;
      BigFloat k = 0;
      for (int a = 0; a < m; ++a)
        if (c[a]) k += BigFloat(c[a]) * w[static_cast<std::size_t>(a)];
      key[i] = k;
    }

    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (key[a] != key[b]) return key[a] < key[b];
      const std::uint16_t* ca = counts_enum.data() + static_cast<std::size_t>(a) * m;
      const std::uint16_t* cb = counts_enum.data() + static_cast<std::size_t>(b) * m;
      return std::lexicographical_compare(ca, ca + m, cb, cb + m);
    });

    static const BigFloat kTie("1e-20");
    global.assign(order.begin(), order.end());
    std::size_t i = 0;
    while (i < num) {
      std::size_t j = i + 1;
      while (j < num && key[order[j]] - key[order[i]] <= kTie) ++j;
      group_spans.emplace_back(i, j);
      i = j;
    }
  }

  // Walk the lex enumeration once more, carrying the multinomial of the
  // partial composition; C(rem, v+1) = C(rem, v) * (rem - v) / (v + 1).
  template <class Int>
  static void accumulate_sizes(ClassTable& t, int m, int length) {
    std::vector<Int> sizes(t.groups_.size(), Int(0));
    std::size_t idx = 0;
    auto rec = [&](auto&& self, int d, int rem, const Int& partial) -> void {
      if (d == m - 1) {
        sizes[t.gid_by_enum_[idx]] += partial;
        ++idx;
        return;
      }
      Int cur = partial;  // n_d = 0
      for (int v = 0;; ++v) {
        self(self, d + 1, rem - v, cur);
        if (v == rem) break;
        mul_by(cur, static_cast<std::uint64_t>(rem - v));
        div_by(cur, static_cast<std::uint64_t>(v + 1));
      }
    };
    rec(rec, 0, length, Int(1));
    for (std::size_t g = 0; g < sizes.size(); ++g) t.groups_[g].size = to_big(sizes[g]);
  }

  static void mul_by(WalkInt& x, std::uint64_t v) { x.mul_small(v); }
  static void mul_by(BigInt& x, std::uint64_t v) { x *= v; }
  static void div_by(WalkInt& x, std::uint64_t v) { x.exact_div_small(v); }
  static void div_by(BigInt& x, std::uint64_t v) { x /= v; }
  static BigInt to_big(const WalkInt& x) { return x.to_bigint(); }
  static BigInt to_big(const BigInt& x) { return x; }
};

// ---- build entry point with in-process and file caching ------------------

namespace {

std::string table_key(int m, int length, KeyMode mode, const Ensemble* e) {
  std::string k = (mode == KeyMode::empirical ? "e" : "p");
  k += "-m" + std::to_string(m) + "-N" + std::to_string(length);
  if (mode == KeyMode::model && e) {
    // FNV-1a over the probability bit patterns
    std::uint64_t h = 1469598103934665603ull;
    for (double p : e->probs()) {
      std::uint64_t bits;
      std::memcpy(&bits, &p, 8);
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xFF;
        h *= 1099511628211ull;
      }
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "-p%016llx", static_cast<unsigned long long>(h));
    k += buf;
  }
  return k;
}

std::mutex g_cache_mutex;
std::map<std::string, std::weak_ptr<const ClassTable>>& memo_cache() {
  static std::map<std::string, std::weak_ptr<const ClassTable>> c;
  return c;
}

}  // namespace

// defined in table_cache.cpp
std::shared_ptr<ClassTable> try_load_cached_table(const std::string& key, int m, int length,
                                                  KeyMode mode, const Ensemble* ensemble);
void try_save_cached_table(const std::string& key, const ClassTable& t);

std::shared_ptr<const ClassTable> ClassTable::build(int m, int length, KeyMode mode,
                                                    const Ensemble* ensemble,
                                                    std::uint64_t class_cap) {
  const std::string key = table_key(m, length, mode, ensemble);
  {
    std::lock_guard<std::mutex> lk(g_cache_mutex);
    auto it = memo_cache().find(key);
    if (it != memo_cache().end()) {
      if (auto sp = it->second.lock()) return sp;
    }
  }
  std::shared_ptr<const ClassTable> t = try_load_cached_table(key, m, length, mode, ensemble);
  if (!t) {
    t = TableBuilder::run(m, length, mode, ensemble, class_cap);
    try_save_cached_table(key, *t);
  }
  {
    std::lock_guard<std::mutex> lk(g_cache_mutex);
    memo_cache()[key] = t;
  }
  return t;
}

}  // namespace shapecode
