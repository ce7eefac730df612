#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace shapecode {

using Symbol = std::uint16_t;
using SymbolString = std::vector<Symbol>;

/// A memoryless source: alphabet {0..m-1} with strictly positive symbol
/// probabilities summing to 1 (absolute tolerance 1e-12).
class Ensemble {
 public:
  explicit Ensemble(std::vector<double> probs);
  static Ensemble uniform(int m);

  int size() const { return static_cast<int>(probs_.size()); }
  double prob(int a) const { return probs_[static_cast<std::size_t>(a)]; }
  const std::vector<double>& probs() const { return probs_; }

  bool operator==(const Ensemble& o) const { return probs_ == o.probs_; }

 private:
  std::vector<double> probs_;
};

/// Symbol histogram of a string; total is the string length.
struct CountVector {
  std::vector<std::uint32_t> counts;
  std::uint32_t total = 0;
};

CountVector count_vector(const SymbolString& x, int m);

/// Throws std::out_of_range if any symbol is outside [0, m).
void validate_string(const SymbolString& x, int m);

/// H(X) = -sum p_i log_base p_i.
double entropy(const Ensemble& e, double log_base = 2.0);

/// -sum_j log2 p(x_j).
double model_information(const SymbolString& x, const Ensemble& e);

/// prod_j p(x_j).
double string_probability(const SymbolString& x, const Ensemble& e);

/// Zero-order content of the string's own histogram:
/// -sum_{a: n_a>0} n_a log2(n_a/N). Throws std::invalid_argument on empty.
double empirical_information(const SymbolString& x);

/// Same quantity from counts; summation order is canonical (sorted counts)
/// so permuted histograms give bit-identical values.
double empirical_information_of_counts(std::span<const std::uint32_t> counts);

}  // namespace shapecode
