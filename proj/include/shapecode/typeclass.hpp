#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapecode/bigint.hpp"
#include "shapecode/ensemble.hpp"

namespace shapecode {

enum class KeyMode : std::uint8_t { empirical = 0, model = 1 };

inline constexpr std::uint64_t kDefaultClassCap = 10'000'000;

/// Raised when an enumeration would exceed the configured class cap.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// N! / prod n_a!  (number of strings in the type class).
BigInt multinomial(const CountVector& cv);

/// Information content shared by every string of the class, in bits.
/// empirical: -sum n_a log2(n_a/N); model: -sum n_a log2 p_a.
double class_info(const CountVector& cv, KeyMode mode, const Ensemble* ensemble = nullptr);

/// Three-way comparison by information content under the given mode.
/// Returns 0 exactly when the two classes belong to the same tie group:
/// empirical mode compares the exact integer keys prod n^n, model mode
/// compares 50-digit float keys with a 1e-20-bit tie threshold.
int compare_classes(const CountVector& u, const CountVector& v, KeyMode mode,
                    const Ensemble* ensemble = nullptr);

/// Number of type classes C(length+m-1, m-1); throws ResourceLimitError
/// above the cap.
std::uint64_t count_classes(int m, int length, std::uint64_t cap = kDefaultClassCap);

/// All compositions of `length` into m parts, lexicographic order.
std::vector<CountVector> enumerate_classes(int m, int length,
                                           std::uint64_t cap = kDefaultClassCap);

/// All type classes of (m, length) sorted ascending by information content,
/// equal-information classes merged into tie groups, with exact cumulative
/// string counts. Immutable after construction.
class ClassTable {
 public:
  struct Group {
    std::size_t first_class = 0;  // index into global class order
    std::size_t num_classes = 0;
    BigInt cumulative_start;
    BigInt size;
    double info_bits = 0.0;
  };

  /// Build (or fetch from the in-process/file cache) the table.
  /// `ensemble` is required in model mode.
  static std::shared_ptr<const ClassTable> build(int m, int length, KeyMode mode,
                                                 const Ensemble* ensemble = nullptr,
                                                 std::uint64_t class_cap = kDefaultClassCap);

  int alphabet_size() const { return m_; }
  int length() const { return length_; }
  KeyMode mode() const { return mode_; }
  const std::optional<Ensemble>& ensemble() const { return ensemble_; }
  const BigInt& total() const { return total_; }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t num_groups() const { return groups_.size(); }
  const Group& group(std::size_t gid) const { return groups_[gid]; }

  /// Count vector of the class at `class_idx` in global order (m entries).
  const std::uint16_t* class_counts(std::size_t class_idx) const {
    return class_counts_.data() + class_idx * static_cast<std::size_t>(m_);
  }

  /// Tie-group id of the class with the given counts (must sum to length()).
  std::size_t group_of_counts(const std::uint32_t* counts) const;

  /// Tie-group containing the string with the given global rank.
  std::size_t group_containing(const BigInt& rank) const;

  /// True when every string count of this table fits the WalkInt fast path.
  bool walk_fits() const { return walk_fits_; }

  /// C(n, k) for the walk kernels; valid when walk_fits(), 0 <= k <= n <= length.
  const WalkInt& walk_binom(int n, int k) const {
    return walk_binom_[static_cast<std::size_t>(n) * (n + 1) / 2 + static_cast<std::size_t>(k)];
  }

  void save(const std::string& path) const;
  static std::shared_ptr<ClassTable> load_file(const std::string& path);

 private:
  ClassTable() = default;
  friend struct TableBuilder;
  friend struct TableCacheIO;

  void finalize();  // cum starts, infos, total; validates sum == m^length

  std::uint64_t composition_rank(const std::uint32_t* counts) const;

  int m_ = 0;
  int length_ = 0;
  KeyMode mode_ = KeyMode::empirical;
  std::optional<Ensemble> ensemble_;
  std::size_t num_classes_ = 0;
  std::vector<std::uint16_t> class_counts_;  // num_classes x m, global order
  std::vector<std::uint32_t> gid_by_enum_;   // lex-enumeration index -> group id
  std::vector<Group> groups_;
  std::vector<std::uint64_t> comp_binom_;    // C(n,k) for composition ranking
  int comp_binom_cols_ = 0;
  std::vector<WalkInt> walk_binom_;          // Pascal triangle, fast path only
  BigInt total_;
  bool walk_fits_ = false;
};

namespace detail {

/// prod_{n_a>0} n_a^n_a; larger key means lower empirical information.
template <class T>
BigInt empirical_exact_key_span(const T* counts, std::size_t m) {
  BigInt key = 1;
  for (std::size_t a = 0; a < m; ++a) {
    if (counts[a] > 1)
      key *= boost::multiprecision::pow(BigInt(counts[a]), static_cast<unsigned>(counts[a]));
  }
  return key;
}

}  // namespace detail

}  // namespace shapecode
