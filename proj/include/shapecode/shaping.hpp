#pragma once

#include <memory>
#include <optional>

#include "shapecode/typeclass.hpp"

namespace shapecode {

/// Parameters that fully determine the shaping transform.
struct ShapingConfig {
  int m = 2;
  int N = 1;
  int K = 0;
  KeyMode mode = KeyMode::empirical;
  std::optional<Ensemble> ensemble;  // required in model mode
  std::uint64_t class_cap = kDefaultClassCap;
};

/// Thrown by unshape when the input is not a member of the image set.
class NotInImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 0-based position of x in the total order (information ascending,
/// lexicographic within tie pools). Bijective over A^N.
BigInt rank(const ClassTable& table, const SymbolString& x);

/// Exact inverse of rank. Throws std::out_of_range for i >= m^N.
SymbolString unrank(const ClassTable& table, const BigInt& i);

/// The order-preserving bijection A^N -> Y^{N+K} (lowest-information
/// length-(N+K) strings), its inverse, and the prefix-local detector.
class Shaper {
 public:
  explicit Shaper(const ShapingConfig& cfg);

  const ShapingConfig& config() const { return cfg_; }
  const ClassTable& source_table() const { return *src_; }
  const ClassTable& target_table() const { return *dst_; }
  const BigInt& image_size() const { return image_size_; }

  SymbolString shape(const SymbolString& x) const;
  SymbolString unshape(const SymbolString& y) const;  // throws NotInImageError
  bool is_in_image(const SymbolString& y) const;

  /// Smallest 1-based j such that no image string begins with y_1..y_j,
  /// or nullopt when y is in the image. Streaming: consumes one symbol at
  /// a time using only prefix counts (plus the boundary cut string).
  std::optional<int> first_infeasible_position(const SymbolString& y) const;

  /// Number of image strings extending the prefix.
  BigInt count_in_image_with_prefix(const SymbolString& prefix) const;

 private:
  friend struct ShaperInternals;

  ShapingConfig cfg_;
  std::shared_ptr<const ClassTable> src_, dst_;
  BigInt image_size_;             // m^N
  std::size_t boundary_gid_ = 0;  // dst group containing the cut, num_groups() if none
  bool partial_ = false;          // cut falls strictly inside that group
  BigInt boundary_take_;          // in-image strings of the boundary group
  SymbolString cut_string_;       // first string outside the image (when partial_)
};

}  // namespace shapecode
