#include "shapecode/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>
#include <thread>

#include "shapecode/rng.hpp"
#include "pool_walk.hpp"

namespace shapecode {

Channel Channel::parse(const std::string& spec) {
  if (spec == "single_substitution" || spec == "single") return single_substitution();
  if (spec.rfind("symmetric(", 0) == 0 && spec.back() == ')') {
    double eps = std::stod(spec.substr(10, spec.size() - 11));
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("symmetric epsilon must be in [0,1]");
    return symmetric(eps);
  }
  throw std::invalid_argument("unknown channel spec: " + spec +
                              " (expected single_substitution or symmetric(eps))");
}

std::string Channel::describe() const {
  if (kind == Kind::single_substitution) return "single_substitution";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "symmetric(%g)", epsilon);
  return buf;
}

namespace {

// Draws symbols from the ensemble. Uniform sources take 8 bits per symbol
// from the engine (rejection above the largest multiple of m); others use
// the 53-bit double path against the CDF.
struct SymbolSampler {
  explicit SymbolSampler(const Ensemble& e) : m(e.size()) {
    uniform = true;
    for (double p : e.probs())
      if (std::abs(p - 1.0 / m) > 1e-15) uniform = false;
    if (uniform && m <= 128) {
      byte_limit = static_cast<std::uint32_t>(256 / m * m);
    } else {
      uniform = false;
      cdf.reserve(e.probs().size());
      double acc = 0;
      for (double p : e.probs()) {
        acc += p;
        cdf.push_back(acc);
      }
      cdf.back() = 1.0;
    }
  }

  Symbol draw(std::mt19937_64& g) {
    if (uniform) {
      for (;;) {
        if (have == 0) {
          buf = g();
          have = 8;
        }
        std::uint32_t b = buf & 0xFF;
        buf >>= 8;
        --have;
        if (b < byte_limit) return static_cast<Symbol>(b % m);
      }
    }
    double u = u01(g);
    for (std::size_t a = 0; a + 1 < cdf.size(); ++a)
      if (u < cdf[a]) return static_cast<Symbol>(a);
    return static_cast<Symbol>(cdf.size() - 1);
  }

  void reset() { have = 0; }

  int m;
  bool uniform = false;
  std::uint32_t byte_limit = 0;
  std::uint64_t buf = 0;
  int have = 0;
  std::vector<double> cdf;
};

struct Kahan {
  double s = 0, c = 0;
  void add(double v) {
    double y = v - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

// For every source tie group, the target-table information value over each
// slice of its rank range: the rank of a sampled string is located against
// `cuts` (offsets within the group) only when the group straddles a
// target-group boundary.
struct CutMap {
  bool fast = false;
  std::vector<std::vector<double>> infos;
  std::vector<std::vector<WalkInt>> cuts_fast;
  std::vector<std::vector<BigInt>> cuts_big;
};

CutMap build_cut_map(const ClassTable& src, const ClassTable& dst) {
  CutMap cm;
  cm.fast = src.walk_fits();
  const std::size_t G = src.num_groups();
  cm.infos.resize(G);
  if (cm.fast)
    cm.cuts_fast.resize(G);
  else
    cm.cuts_big.resize(G);

  std::size_t d = 0;
  BigInt dst_end = dst.group(0).cumulative_start + dst.group(0).size;
  for (std::size_t g = 0; g < G; ++g) {
    const BigInt& s = src.group(g).cumulative_start;
    BigInt e = s + src.group(g).size;
    while (dst_end <= s) {
      ++d;
      dst_end += dst.group(d).size;
    }
    cm.infos[g].push_back(dst.group(d).info_bits);
    while (dst_end < e) {
      BigInt cut = dst_end - s;
      if (cm.fast)
        cm.cuts_fast[g].push_back(WalkInt::from_bigint(cut));
      else
        cm.cuts_big[g].push_back(cut);
      ++d;
      dst_end += dst.group(d).size;
      cm.infos[g].push_back(dst.group(d).info_bits);
    }
  }
  return cm;
}

struct ChunkMoments {
  Kahan sx, sxx, sy, syy;
  std::uint64_t n = 0;
};

}  // namespace

AvgInfoReport estimate_avg_info(const ShapingConfig& cfg, std::uint64_t samples,
                                std::uint64_t seed, int threads) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  const Ensemble ens = cfg.ensemble ? *cfg.ensemble : Ensemble::uniform(cfg.m);
  if (cfg.mode == KeyMode::model && !cfg.ensemble)
    throw std::invalid_argument("model mode requires an ensemble");
  const Ensemble* table_e = cfg.ensemble ? &*cfg.ensemble : nullptr;
  auto src = ClassTable::build(cfg.m, cfg.N, cfg.mode, table_e, cfg.class_cap);
  auto dst = cfg.K == 0 ? src
                        : ClassTable::build(cfg.m, cfg.N + cfg.K, cfg.mode, table_e, cfg.class_cap);
  const CutMap cm = build_cut_map(*src, *dst);

  const double center = static_cast<double>(cfg.N) * std::log2(static_cast<double>(cfg.m));
  const std::uint64_t nchunks = (samples + kSamplesPerChunk - 1) / kSamplesPerChunk;
  std::vector<ChunkMoments> chunks(static_cast<std::size_t>(nchunks));

  auto run_chunk = [&](std::uint64_t ci) {
    std::mt19937_64 eng(derive_stream_seed(seed, ci));
    SymbolSampler sampler(ens);
    const std::uint64_t n0 = ci * kSamplesPerChunk;
    const std::uint64_t n1 = std::min(samples, n0 + kSamplesPerChunk);
    ChunkMoments& mo = chunks[static_cast<std::size_t>(ci)];
    SymbolString x(static_cast<std::size_t>(cfg.N));
    std::vector<std::uint32_t> c(static_cast<std::size_t>(cfg.m));
    for (std::uint64_t t = n0; t < n1; ++t) {
      std::fill(c.begin(), c.end(), 0);
      for (int j = 0; j < cfg.N; ++j) {
        Symbol s = sampler.draw(eng);
        x[static_cast<std::size_t>(j)] = s;
        ++c[s];
      }
      const std::size_t gid = src->group_of_counts(c.data());
      const double ix = src->group(gid).info_bits;
      double iy;
      const auto& infos = cm.infos[gid];
      if (infos.size() == 1) {
        iy = infos[0];
      } else {
        walk::GroupView gv = walk::view_of(*src, gid);
        std::size_t idx = cm.fast ? walk::pool_locate_interval<WalkInt>(gv, x.data(), cm.cuts_fast[gid])
                                  : walk::pool_locate_interval<BigInt>(gv, x.data(), cm.cuts_big[gid]);
        iy = infos[idx];
      }
      mo.sx.add(ix - center);
      mo.sxx.add((ix - center) * (ix - center));
      mo.sy.add(iy - center);
      mo.syy.add((iy - center) * (iy - center));
      ++mo.n;
    }
  };

  int nt = threads <= 0 ? static_cast<int>(std::thread::hardware_concurrency()) : threads;
  if (nt < 1) nt = 1;
  if (nt == 1 || nchunks == 1) {
    for (std::uint64_t ci = 0; ci < nchunks; ++ci) run_chunk(ci);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t)
      pool.emplace_back([&] {
        for (;;) {
          std::uint64_t ci = next.fetch_add(1);
          if (ci >= nchunks) return;
          run_chunk(ci);
        }
      });
    for (auto& th : pool) th.join();
  }

  Kahan sx, sxx, sy, syy;
  for (const auto& mo : chunks) {
    sx.add(mo.sx.s);
    sxx.add(mo.sxx.s);
    sy.add(mo.sy.s);
    syy.add(mo.syy.s);
  }
  const double n = static_cast<double>(samples);
  const double mx = sx.s / n, my = sy.s / n;
  auto stderr_of = [&](double sum, double sumsq, double mean) {
    if (samples < 2) return 0.0;
    double var = (sumsq - n * mean * mean) / (n - 1.0);
    (void)sum;
    return var > 0 ? std::sqrt(var / n) : 0.0;
  };

  AvgInfoReport r;
  r.m = cfg.m;
  r.N = cfg.N;
  r.K = cfg.K;
  r.samples = samples;
  r.seed = seed;
  r.I_x = mx + center;
  r.I_y = my + center;
  r.diff = r.I_x - r.I_y;
  r.std_err_x = stderr_of(sx.s, sxx.s, mx);
  r.std_err_y = stderr_of(sy.s, syy.s, my);
  return r;
}

std::uint64_t table_cell_seed(std::uint64_t seed, std::size_t cell_index) {
  return derive_stream_seed(seed, 0xCE11u + cell_index);
}

std::vector<AvgInfoReport> run_table1(std::uint64_t samples, std::uint64_t seed, int threads) {
  std::vector<AvgInfoReport> out;
  std::size_t cell = 0;
  for (int m = 2; m <= 5; ++m) {
    for (int K = 1; K <= 2; ++K) {
      ShapingConfig cfg;
      cfg.m = m;
      cfg.N = 100;
      cfg.K = K;
      out.push_back(estimate_avg_info(cfg, samples, table_cell_seed(seed, cell++), threads));
    }
  }
  return out;
}

std::vector<AvgInfoReport> run_table2(std::uint64_t samples, std::uint64_t seed, int threads) {
  std::vector<AvgInfoReport> out;
  for (int K = 1; K <= 5; ++K) {
    ShapingConfig cfg;
    cfg.m = 3;
    cfg.N = 100;
    cfg.K = K;
    out.push_back(estimate_avg_info(cfg, samples, table_cell_seed(seed, static_cast<std::size_t>(K - 1)), threads));
  }
  return out;
}

CurveReport exact_curves(int m, int N, const std::vector<int>& Ks, const Ensemble& e,
                         KeyMode mode) {
  const double points_bits = static_cast<double>(N) * std::log2(static_cast<double>(m));
  if (points_bits > 24.0)
    throw ResourceLimitError("exact_curves: m^N exceeds the enumeration budget of 2^24 points");
  const std::uint64_t total = [&] {
    std::uint64_t t = 1;
    for (int i = 0; i < N; ++i) t *= static_cast<std::uint64_t>(m);
    return t;
  }();

  const Ensemble* te = mode == KeyMode::model ? &e : nullptr;
  CurveReport rep;
  rep.m = m;
  rep.N = N;
  rep.Ks = Ks;
  rep.I_x.resize(total);
  auto src = ClassTable::build(m, N, mode, te);
  for (std::size_t g = 0; g < src->num_groups(); ++g) {
    const auto& gr = src->group(g);
    const std::uint64_t b = gr.cumulative_start.convert_to<std::uint64_t>();
    const std::uint64_t sz = gr.size.convert_to<std::uint64_t>();
    std::fill(rep.I_x.begin() + b, rep.I_x.begin() + b + sz, gr.info_bits);
  }
  for (int K : Ks) {
    if (K < 0) throw std::invalid_argument("K must be >= 0");
    auto dst = ClassTable::build(m, N + K, mode, te);
    std::vector<double>& iy = rep.I_y.emplace_back();
    iy.resize(total);
    std::uint64_t filled = 0;
    for (std::size_t g = 0; g < dst->num_groups() && filled < total; ++g) {
      const auto& gr = dst->group(g);
      std::uint64_t sz = total - filled;
      if (gr.size < sz) sz = gr.size.convert_to<std::uint64_t>();
      std::fill(iy.begin() + filled, iy.begin() + filled + sz, gr.info_bits);
      filled += sz;
    }
  }
  return rep;
}

DetectionReport detection_experiment(const ShapingConfig& cfg, std::uint64_t trials,
                                     const Channel& channel, std::uint64_t seed, int threads) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  Shaper shaper(cfg);
  const Ensemble ens = cfg.ensemble ? *cfg.ensemble : Ensemble::uniform(cfg.m);
  const int L = cfg.N + cfg.K;

  struct ChunkOut {
    std::uint64_t detected = 0;
    std::uint64_t pos_sum = 0;
  };
  const std::uint64_t nchunks = (trials + kSamplesPerChunk - 1) / kSamplesPerChunk;
  std::vector<ChunkOut> chunks(static_cast<std::size_t>(nchunks));

  auto run_chunk = [&](std::uint64_t ci) {
    std::mt19937_64 eng(derive_stream_seed(seed, ci));
    SymbolSampler sampler(ens);
    const std::uint64_t n0 = ci * kSamplesPerChunk;
    const std::uint64_t n1 = std::min(trials, n0 + kSamplesPerChunk);
    ChunkOut& out = chunks[static_cast<std::size_t>(ci)];
    SymbolString x(static_cast<std::size_t>(cfg.N));
    for (std::uint64_t t = n0; t < n1; ++t) {
      for (int j = 0; j < cfg.N; ++j) x[static_cast<std::size_t>(j)] = sampler.draw(eng);
      SymbolString y = shaper.shape(x);
      if (channel.kind == Channel::Kind::single_substitution) {
        const std::size_t pos = static_cast<std::size_t>(bounded_u64(eng, static_cast<std::uint64_t>(L)));
        const std::uint64_t delta = 1 + bounded_u64(eng, static_cast<std::uint64_t>(cfg.m - 1));
        y[pos] = static_cast<Symbol>((y[pos] + delta) % cfg.m);
      } else {
        for (int j = 0; j < L; ++j) {
          if (u01(eng) < channel.epsilon) {
            const std::uint64_t delta = 1 + bounded_u64(eng, static_cast<std::uint64_t>(cfg.m - 1));
            y[static_cast<std::size_t>(j)] = static_cast<Symbol>((y[static_cast<std::size_t>(j)] + delta) % cfg.m);
          }
        }
      }
      if (!shaper.is_in_image(y)) {
        ++out.detected;
        auto pos = shaper.first_infeasible_position(y);
        out.pos_sum += static_cast<std::uint64_t>(*pos);
      }
    }
  };

  int nt = threads <= 0 ? static_cast<int>(std::thread::hardware_concurrency()) : threads;
  if (nt < 1) nt = 1;
  if (nt == 1 || nchunks == 1) {
    for (std::uint64_t ci = 0; ci < nchunks; ++ci) run_chunk(ci);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t)
      pool.emplace_back([&] {
        for (;;) {
          std::uint64_t ci = next.fetch_add(1);
          if (ci >= nchunks) return;
          run_chunk(ci);
        }
      });
    for (auto& th : pool) th.join();
  }

  DetectionReport r;
  r.m = cfg.m;
  r.N = cfg.N;
  r.K = cfg.K;
  r.trials = trials;
  r.seed = seed;
  r.channel = channel.describe();
  for (const auto& ch : chunks) {
    r.detected += ch.detected;
  }
  std::uint64_t pos_sum = 0;
  for (const auto& ch : chunks) pos_sum += ch.pos_sum;
  r.detected_rate = static_cast<double>(r.detected) / static_cast<double>(trials);
  r.predicted = static_cast<double>(cfg.K) / static_cast<double>(cfg.N + cfg.K);
  r.mean_first_detect_position =
      r.detected ? static_cast<double>(pos_sum) / static_cast<double>(r.detected)
                 : std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace shapecode
