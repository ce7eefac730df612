#include "shapecode/shaping.hpp"

#include <cstring>

#include "pool_walk.hpp"

namespace shapecode {

namespace {

void check_length(const SymbolString& x, int expect, const char* what) {
  if (static_cast<int>(x.size()) != expect)
    throw std::invalid_argument(std::string(what) + ": expected length " + std::to_string(expect) +
                                ", got " + std::to_string(x.size()));
}

std::vector<std::uint32_t>& counts_scratch(int m) {
  thread_local std::vector<std::uint32_t> c;
  c.assign(static_cast<std::size_t>(m), 0);
  return c;
}

template <class Int>
BigInt rank_impl(const ClassTable& t, const SymbolString& x, std::size_t gid) {
  walk::GroupView g = walk::view_of(t, gid);
  Int below = walk::pool_rank<Int>(g, x.data());
  return t.group(gid).cumulative_start + walk::to_bigint(below);
}

template <class Int>
SymbolString unrank_impl(const ClassTable& t, const BigInt& i) {
  const std::size_t gid = t.group_containing(i);
  walk::GroupView g = walk::view_of(t, gid);
  BigInt off = i - t.group(gid).cumulative_start;
  SymbolString out(static_cast<std::size_t>(t.length()));
  walk::pool_unrank<Int>(g, walk::IntFrom<Int>::big(off), out.data());
  return out;
}

}  // namespace

BigInt rank(const ClassTable& t, const SymbolString& x) {
  check_length(x, t.length(), "rank");
  validate_string(x, t.alphabet_size());
  auto& c = counts_scratch(t.alphabet_size());
  for (Symbol s : x) ++c[s];
  const std::size_t gid = t.group_of_counts(c.data());
  if (t.walk_fits()) return rank_impl<WalkInt>(t, x, gid);
  return rank_impl<BigInt>(t, x, gid);
}

SymbolString unrank(const ClassTable& t, const BigInt& i) {
  if (i < 0 || i >= t.total()) throw std::out_of_range("unrank: index outside [0, m^N)");
  if (t.walk_fits()) return unrank_impl<WalkInt>(t, i);
  return unrank_impl<BigInt>(t, i);
}

Shaper::Shaper(const ShapingConfig& cfg) : cfg_(cfg) {
  if (cfg.K < 0) throw std::invalid_argument("shaping order K must be >= 0");
  if (cfg.mode == KeyMode::model && !cfg.ensemble)
    throw std::invalid_argument("model mode requires an ensemble");
  const Ensemble* e = cfg.ensemble ? &*cfg.ensemble : nullptr;
  src_ = ClassTable::build(cfg.m, cfg.N, cfg.mode, e, cfg.class_cap);
  dst_ = cfg.K == 0 ? src_ : ClassTable::build(cfg.m, cfg.N + cfg.K, cfg.mode, e, cfg.class_cap);
  image_size_ = src_->total();

  if (cfg.K == 0) {
    boundary_gid_ = dst_->num_groups();
    partial_ = false;
    return;
  }
  boundary_gid_ = dst_->group_containing(image_size_);
  boundary_take_ = image_size_ - dst_->group(boundary_gid_).cumulative_start;
  partial_ = boundary_take_ > 0;
  if (partial_) cut_string_ = unrank(*dst_, image_size_);
}

SymbolString Shaper::shape(const SymbolString& x) const {
  check_length(x, cfg_.N, "shape");
  validate_string(x, cfg_.m);
  if (cfg_.K == 0) return x;
  return unrank(*dst_, rank(*src_, x));
}

SymbolString Shaper::unshape(const SymbolString& y) const {
  check_length(y, cfg_.N + cfg_.K, "unshape");
  validate_string(y, cfg_.m);
  if (cfg_.K == 0) return y;
  auto& c = counts_scratch(cfg_.m);
  for (Symbol s : y) ++c[s];
  const std::size_t gid = dst_->group_of_counts(c.data());
  if (gid > boundary_gid_ || (gid == boundary_gid_ && !partial_))
    throw NotInImageError("string is not in the image set");
  BigInt r;
  if (gid == boundary_gid_) {
    walk::GroupView g = walk::view_of(*dst_, gid);
    BigInt below = dst_->walk_fits() ? walk::pool_rank<WalkInt>(g, y.data()).to_bigint()
                                     : walk::pool_rank<BigInt>(g, y.data());
    if (below >= boundary_take_) throw NotInImageError("string is not in the image set");
    r = dst_->group(gid).cumulative_start + below;
  } else {
    r = rank(*dst_, y);
  }
  return unrank(*src_, r);
}

bool Shaper::is_in_image(const SymbolString& y) const {
  check_length(y, cfg_.N + cfg_.K, "is_in_image");
  validate_string(y, cfg_.m);
  if (cfg_.K == 0) return true;
  auto& c = counts_scratch(cfg_.m);
  for (Symbol s : y) ++c[s];
  const std::size_t gid = dst_->group_of_counts(c.data());
  if (gid < boundary_gid_) return true;
  if (gid > boundary_gid_ || !partial_) return false;
  walk::GroupView g = walk::view_of(*dst_, gid);
  BigInt below = dst_->walk_fits() ? walk::pool_rank<WalkInt>(g, y.data()).to_bigint()
                                   : walk::pool_rank<BigInt>(g, y.data());
  return below < boundary_take_;
}

std::optional<int> Shaper::first_infeasible_position(const SymbolString& y) const {
  const int L = cfg_.N + cfg_.K;
  check_length(y, L, "first_infeasible_position");
  validate_string(y, cfg_.m);
  const int m = cfg_.m;
  auto& c = counts_scratch(m);
  int rel = 0;  // prefix vs cut string: -1 below, 0 prefix-of, +1 above
  walk::GroupView boundary{};
  if (partial_) boundary = walk::view_of(*dst_, boundary_gid_);

  for (int j = 1; j <= L; ++j) {
    const Symbol s = y[static_cast<std::size_t>(j - 1)];
    if (partial_ && rel == 0) {
      const Symbol ts = cut_string_[static_cast<std::size_t>(j - 1)];
      rel = s < ts ? -1 : (s > ts ? 1 : 0);
    }
    ++c[s];
    // minimum group over all classes dominating the prefix counts: the
    // information key is concave, so the minimum is at a simplex vertex
    const int r = L - j;
    std::size_t best;
    if (r == 0) {
      best = dst_->group_of_counts(c.data());
    } else {
      best = SIZE_MAX;
      for (int a = 0; a < m; ++a) {
        c[a] += static_cast<std::uint32_t>(r);
        std::size_t gid = dst_->group_of_counts(c.data());
        c[a] -= static_cast<std::uint32_t>(r);
        if (gid < best) best = gid;
      }
    }
    bool feasible;
    if (best < boundary_gid_) {
      feasible = true;
    } else if (best == boundary_gid_ && partial_) {
      if (rel < 0)
        feasible = true;  // any boundary-class completion sits below the cut
      else if (rel == 0)
        feasible = walk::pool_min_completion_below(boundary, y.data(), j, cut_string_.data());
      else
        feasible = false;
    } else {
      feasible = false;
    }
    if (!feasible) return j;
  }
  return std::nullopt;
}

namespace {

// sum of multinomial(r; u) over compositions u of r with gid(base+u) below
// the boundary group, walking the composition tree with an incremental
// partial multinomial
template <class Int>
BigInt sum_in_image_completions(const ClassTable& t, std::vector<std::uint32_t>& work, int r,
                                std::size_t boundary_gid) {
  const int m = t.alphabet_size();
  BigInt acc = 0;
  auto rec = [&](auto&& self, int d, int rem, const Int& partial) -> void {
    if (d == m - 1) {
      work[static_cast<std::size_t>(d)] += static_cast<std::uint32_t>(rem);
      if (t.group_of_counts(work.data()) < boundary_gid) acc += walk::to_bigint(partial);
      work[static_cast<std::size_t>(d)] -= static_cast<std::uint32_t>(rem);
      return;
    }
    Int cur = partial;
    for (int v = 0;; ++v) {
      self(self, d + 1, rem - v, cur);
      if (v == rem) break;
      work[static_cast<std::size_t>(d)] += 1;
      walk::mul_small(cur, static_cast<std::uint64_t>(rem - v));
      walk::ediv_small(cur, static_cast<std::uint64_t>(v + 1));
    }
    work[static_cast<std::size_t>(d)] -= static_cast<std::uint32_t>(rem);
  };
  rec(rec, 0, r, Int(1));
  return acc;
}

}  // namespace

BigInt Shaper::count_in_image_with_prefix(const SymbolString& prefix) const {
  const int L = cfg_.N + cfg_.K;
  if (static_cast<int>(prefix.size()) > L)
    throw std::invalid_argument("prefix longer than N+K");
  validate_string(prefix, cfg_.m);
  const int j = static_cast<int>(prefix.size());
  if (cfg_.K == 0)
    return boost::multiprecision::pow(BigInt(cfg_.m), static_cast<unsigned>(L - j));

  std::vector<std::uint32_t> work(static_cast<std::size_t>(cfg_.m), 0);
  for (Symbol s : prefix) ++work[s];

  BigInt acc = dst_->walk_fits()
                   ? sum_in_image_completions<WalkInt>(*dst_, work, L - j, boundary_gid_)
                   : sum_in_image_completions<BigInt>(*dst_, work, L - j, boundary_gid_);

  if (partial_) {
    int rel = 0;
    for (int q = 0; q < j && rel == 0; ++q)
      rel = prefix[q] < cut_string_[q] ? -1 : (prefix[q] > cut_string_[q] ? 1 : 0);
    if (rel <= 0) {
      walk::GroupView g = walk::view_of(*dst_, boundary_gid_);
      if (rel < 0) {
        acc += dst_->walk_fits()
                   ? walk::pool_count_completions<WalkInt>(g, work.data(), j).to_bigint()
                   : walk::pool_count_completions<BigInt>(g, work.data(), j);
      } else {
        acc += dst_->walk_fits()
                   ? walk::pool_count_prefix_below<WalkInt>(g, prefix.data(), j, cut_string_.data())
                         .to_bigint()
                   : walk::pool_count_prefix_below<BigInt>(g, prefix.data(), j, cut_string_.data());
      }
    }
  }
  return acc;
}

}  // namespace shapecode
