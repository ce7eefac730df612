#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "shapecode/shaping.hpp"

namespace shapecode {

class MalformedMessage : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Wire layout (documented in the README, byte-exact):
///   byte 0:      alphabet size m
///   bytes 1..4:  declared length in symbols, big-endian
///   bytes 5..:   arithmetic payload, MSB-first bits, final byte zero-padded
struct CodedMessage {
  int m = 0;
  std::uint32_t declared_length = 0;
  std::uint64_t payload_bits = 0;  // exact bit count (<= 8 * payload.size())
  std::vector<std::uint8_t> payload;

  std::vector<std::uint8_t> to_bytes() const;
  static CodedMessage from_bytes(std::span<const std::uint8_t> bytes);
};

/// Adaptive order-0 arithmetic encoder, Laplace (+1) smoothed counts.
CodedMessage encode(const SymbolString& x, int m);

/// Exact inverse of encode; throws MalformedMessage when the payload is not
/// the canonical encoding of any string (e.g. truncated streams).
SymbolString decode(const CodedMessage& msg);

struct CodeLengthReport {
  int m = 0, N = 0, K = 0;
  std::uint64_t samples = 0, seed = 0;
  double mean_bits_x = 0, mean_bits_y = 0, diff_bits = 0;
};

/// Mean payload bits of encode(x) vs encode(shape(x)) over sampled strings.
CodeLengthReport compare_code_lengths(const ShapingConfig& cfg, std::uint64_t samples,
                                      std::uint64_t seed, int threads = 1);

}  // namespace shapecode
