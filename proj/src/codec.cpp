#include "shapecode/codec.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <thread>

#include "shapecode/experiments.hpp"
#include "shapecode/rng.hpp"

namespace shapecode {

namespace {

constexpr std::uint32_t kHalf = 0x80000000u;
constexpr std::uint32_t kQuarter = 0x40000000u;
constexpr std::uint32_t kThreeQuarter = 0xC0000000u;
constexpr std::uint32_t kMaxLength = 1u << 24;  // keeps freq totals well below 2^30

struct BitWriter {
  std::vector<std::uint8_t> bytes;
  std::uint64_t nbits = 0;
  void push(int bit) {
    if ((nbits & 7) == 0) bytes.push_back(0);
    if (bit) bytes.back() |= static_cast<std::uint8_t>(0x80u >> (nbits & 7));
    ++nbits;
  }
};

struct BitReader {
  std::span<const std::uint8_t> bytes;
  std::uint64_t pos = 0;
  int read() {  // zero beyond the end; decode() validates canonically after
    if (pos >= bytes.size() * 8) {
      ++pos;
      return 0;
    }
    int b = (bytes[pos >> 3] >> (7 - (pos & 7))) & 1;
    ++pos;
    return b;
  }
};

// Adaptive Laplace(+1) order-0 model; totals stay below 2^30 because the
// message length is capped, so no count rescaling is needed.
struct AdaptiveModel {
  explicit AdaptiveModel(int m) : counts(static_cast<std::size_t>(m), 1), total(static_cast<std::uint32_t>(m)) {}
  std::vector<std::uint32_t> counts;
  std::uint32_t total;
  void update(int s) {
    ++counts[static_cast<std::size_t>(s)];
    ++total;
  }
};

// 32-bit interval coder, bit-wise renormalization with pending-bit tracking
// (never propagates carries into emitted data).
struct Encoder {
  BitWriter& out;
  std::uint32_t low = 0, high = 0xFFFFFFFFu;
  std::uint64_t pending = 0;

  explicit Encoder(BitWriter& w) : out(w) {}

  void emit(int bit) {
    out.push(bit);
    for (; pending; --pending) out.push(!bit);
  }

  void encode(std::uint32_t cum_lo, std::uint32_t freq, std::uint32_t total) {
    const std::uint64_t range = static_cast<std::uint64_t>(high) - low + 1;
    high = low + static_cast<std::uint32_t>(range * (cum_lo + freq) / total - 1);
    low = low + static_cast<std::uint32_t>(range * cum_lo / total);
    for (;;) {
      if (high < kHalf) {
        emit(0);
      } else if (low >= kHalf) {
        emit(1);
        low -= kHalf;
        high -= kHalf;
      } else if (low >= kQuarter && high < kThreeQuarter) {
        ++pending;
        low -= kQuarter;
        high -= kQuarter;
      } else {
        break;
      }
      low <<= 1;
      high = (high << 1) | 1;
    }
  }

  void finish() {
    ++pending;
    emit(low >= kQuarter ? 1 : 0);
  }
};

struct Decoder {
  BitReader& in;
  std::uint32_t low = 0, high = 0xFFFFFFFFu, code = 0;

  explicit Decoder(BitReader& r) : in(r) {
    for (int i = 0; i < 32; ++i) code = (code << 1) | static_cast<std::uint32_t>(r.read());
  }

  std::uint32_t decode_target(std::uint32_t total) {
    const std::uint64_t range = static_cast<std::uint64_t>(high) - low + 1;
    return static_cast<std::uint32_t>(((static_cast<std::uint64_t>(code - low) + 1) * total - 1) / range);
  }

  void consume(std::uint32_t cum_lo, std::uint32_t freq, std::uint32_t total) {
    const std::uint64_t range = static_cast<std::uint64_t>(high) - low + 1;
    high = low + static_cast<std::uint32_t>(range * (cum_lo + freq) / total - 1);
    low = low + static_cast<std::uint32_t>(range * cum_lo / total);
    for (;;) {
      if (high < kHalf) {
        // nothing
      } else if (low >= kHalf) {
        low -= kHalf;
        high -= kHalf;
        code -= kHalf;
      } else if (low >= kQuarter && high < kThreeQuarter) {
        low -= kQuarter;
        high -= kQuarter;
        code -= kQuarter;
      } else {
        break;
      }
      low <<= 1;
      high = (high << 1) | 1;
      code = (code << 1) | static_cast<std::uint32_t>(in.read());
    }
  }
};

std::vector<std::uint8_t> encode_payload(const SymbolString& x, int m, std::uint64_t* bits_out) {
  BitWriter w;
  Encoder enc(w);
  AdaptiveModel model(m);
  for (Symbol s : x) {
    std::uint32_t cum = 0;
    for (int a = 0; a < s; ++a) cum += model.counts[static_cast<std::size_t>(a)];
    enc.encode(cum, model.counts[s], model.total);
    model.update(s);
  }
  enc.finish();
  if (bits_out) *bits_out = w.nbits;
  return std::move(w.bytes);
}

}  // namespace

std::vector<std::uint8_t> CodedMessage::to_bytes() const {
  std::vector<std::uint8_t> out;
  out.reserve(5 + payload.size());
  out.push_back(static_cast<std::uint8_t>(m));
  out.push_back(static_cast<std::uint8_t>(declared_length >> 24));
  out.push_back(static_cast<std::uint8_t>(declared_length >> 16));
  out.push_back(static_cast<std::uint8_t>(declared_length >> 8));
  out.push_back(static_cast<std::uint8_t>(declared_length));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

CodedMessage CodedMessage::from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 5) throw MalformedMessage("message shorter than its header");
  CodedMessage msg;
  msg.m = bytes[0];
  msg.declared_length = (static_cast<std::uint32_t>(bytes[1]) << 24) |
                        (static_cast<std::uint32_t>(bytes[2]) << 16) |
                        (static_cast<std::uint32_t>(bytes[3]) << 8) | bytes[4];
  msg.payload.assign(bytes.begin() + 5, bytes.end());
  msg.payload_bits = msg.payload.size() * 8;
  return msg;
}

CodedMessage encode(const SymbolString& x, int m) {
  if (x.empty()) throw std::invalid_argument("encode requires a non-empty string");
  if (m < 2 || m > 255) throw std::invalid_argument("alphabet size must be in [2, 255]");
  if (x.size() > kMaxLength) throw std::invalid_argument("string longer than the codec cap of 2^24 symbols");
  validate_string(x, m);
  CodedMessage msg;
  msg.m = m;
  msg.declared_length = static_cast<std::uint32_t>(x.size());
  msg.payload = encode_payload(x, m, &msg.payload_bits);
  return msg;
}

SymbolString decode(const CodedMessage& msg) {
  if (msg.m < 2 || msg.m > 255) throw MalformedMessage("alphabet size must be in [2, 255]");
  if (msg.declared_length > kMaxLength) throw MalformedMessage("declared length exceeds the codec cap");
  if (msg.declared_length == 0) {
    if (!msg.payload.empty()) throw MalformedMessage("empty message with nonempty payload");
    return {};
  }
  BitReader r{msg.payload};
  Decoder dec(r);
  AdaptiveModel model(msg.m);
  SymbolString out;
  out.reserve(msg.declared_length);
  for (std::uint32_t i = 0; i < msg.declared_length; ++i) {
    const std::uint32_t target = dec.decode_target(model.total);
    std::uint32_t cum = 0;
    int sym = -1;
    for (int a = 0; a < msg.m; ++a) {
      const std::uint32_t f = model.counts[static_cast<std::size_t>(a)];
      if (target < cum + f) {
        sym = a;
        dec.consume(cum, f, model.total);
        break;
      }
      cum += f;
    }
    if (sym < 0) throw MalformedMessage("arithmetic payload decodes outside the model");
    out.push_back(static_cast<Symbol>(sym));
    model.update(sym);
  }
  // Canonical-form check: the payload must be exactly what encoding the
  // decoded string produces. This is what turns truncations and padding
  // games into hard errors instead of silently wrong strings.
  std::uint64_t bits = 0;
  std::vector<std::uint8_t> re = encode_payload(out, msg.m, &bits);
  if (re != msg.payload) throw MalformedMessage("payload is not a canonical encoding (truncated or corrupt)");
  return out;
}

CodeLengthReport compare_code_lengths(const ShapingConfig& cfg, std::uint64_t samples,
                                      std::uint64_t seed, int threads) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  Shaper shaper(cfg);
  const Ensemble ens = cfg.ensemble ? *cfg.ensemble : Ensemble::uniform(cfg.m);

  struct Chunk {
    double sx = 0, sy = 0;  // Kahan-compensated in run_chunk
    double cx = 0, cy = 0;
  };
  const std::uint64_t nchunks = (samples + kSamplesPerChunk - 1) / kSamplesPerChunk;
  std::vector<Chunk> chunks(static_cast<std::size_t>(nchunks));

  auto run_chunk = [&](std::uint64_t ci) {
    std::mt19937_64 eng(derive_stream_seed(seed, ci));
    std::vector<double> cdf;
    {
      double acc = 0;
      for (double p : ens.probs()) {
        acc += p;
        cdf.push_back(acc);
      }
      cdf.back() = 1.0;
    }
    const bool uniform = [&] {
      for (double p : ens.probs())
        if (std::abs(p - 1.0 / cfg.m) > 1e-15) return false;
      return true;
    }();
    const std::uint64_t n0 = ci * kSamplesPerChunk;
    const std::uint64_t n1 = std::min(samples, n0 + kSamplesPerChunk);
    Chunk& out = chunks[static_cast<std::size_t>(ci)];
    SymbolString x(static_cast<std::size_t>(cfg.N));
    auto kadd = [](double& s, double& c, double v) {
      double y = v - c;
      double t = s + y;
      c = (t - s) - y;
      s = t;
    };
    for (std::uint64_t t = n0; t < n1; ++t) {
      for (int j = 0; j < cfg.N; ++j) {
        if (uniform) {
          x[static_cast<std::size_t>(j)] = static_cast<Symbol>(bounded_u64(eng, static_cast<std::uint64_t>(cfg.m)));
        } else {
          double u = u01(eng);
          std::size_t a = 0;
          while (a + 1 < cdf.size() && u >= cdf[a]) ++a;
          x[static_cast<std::size_t>(j)] = static_cast<Symbol>(a);
        }
      }
      const SymbolString y = shaper.shape(x);
      kadd(out.sx, out.cx, static_cast<double>(encode(x, cfg.m).payload_bits));
      kadd(out.sy, out.cy, static_cast<double>(encode(y, cfg.m).payload_bits));
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

  double sx = 0, sy = 0, cx = 0, cy = 0;
  auto kadd = [](double& s, double& c, double v) {
    double y = v - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  };
  for (const auto& ch : chunks) {
    kadd(sx, cx, ch.sx);
    kadd(sy, cy, ch.sy);
  }
  CodeLengthReport r;
  r.m = cfg.m;
  r.N = cfg.N;
  r.K = cfg.K;
  r.samples = samples;
  r.seed = seed;
  r.mean_bits_x = sx / static_cast<double>(samples);
  r.mean_bits_y = sy / static_cast<double>(samples);
  r.diff_bits = r.mean_bits_x - r.mean_bits_y;
  return r;
}

}  // namespace shapecode
