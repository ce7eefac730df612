#include "shapecode/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace shapecode {

Ensemble::Ensemble(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) throw std::invalid_argument("ensemble needs at least 2 symbols");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("ensemble probabilities must be in (0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("ensemble probabilities must sum to 1 (got " + std::to_string(sum) + ")");
}

Ensemble Ensemble::uniform(int m) {
  if (m < 2) throw std::invalid_argument("alphabet size must be >= 2");
  return Ensemble(std::vector<double>(static_cast<std::size_t>(m), 1.0 / m));
}

CountVector count_vector(const SymbolString& x, int m) {
  validate_string(x, m);
  CountVector cv;
  cv.counts.assign(static_cast<std::size_t>(m), 0);
  for (Symbol s : x) ++cv.counts[s];
  cv.total = static_cast<std::uint32_t>(x.size());
  return cv;
}

void validate_string(const SymbolString& x, int m) {
  for (Symbol s : x)
    if (s >= m) throw std::out_of_range("symbol " + std::to_string(s) + " outside alphabet of size " + std::to_string(m));
}

double entropy(const Ensemble& e, double log_base) {
  if (!(log_base > 0.0) || log_base == 1.0) throw std::invalid_argument("invalid log base");
  const double inv_log = 1.0 / std::log(log_base);
  double h = 0.0;
  for (double p : e.probs()) h -= p * std::log(p) * inv_log;
  return h;
}

double model_information(const SymbolString& x, const Ensemble& e) {
  validate_string(x, e.size());
  double bits = 0.0;
  for (Symbol s : x) bits -= std::log2(e.prob(s));
  return bits;
}

double string_probability(const SymbolString& x, const Ensemble& e) {
  validate_string(x, e.size());
  double p = 1.0;
  for (Symbol s : x) p *= e.prob(s);
  return p;
}

double empirical_information_of_counts(std::span<const std::uint32_t> counts) {
  std::uint64_t total = 0;
  // canonical summation order: sorted nonzero counts
  std::vector<std::uint32_t> nz;
  nz.reserve(counts.size());
  for (std::uint32_t c : counts) {
    if (c) {
      nz.push_back(c);
      total += c;
    }
  }
  std::sort(nz.begin(), nz.end());
  double sum_nlogn = 0.0;
  for (std::uint32_t c : nz) sum_nlogn += static_cast<double>(c) * std::log2(static_cast<double>(c));
  const double n = static_cast<double>(total);
  double bits = n * std::log2(n) - sum_nlogn;
  return bits < 0.0 ? 0.0 : bits;
}

double empirical_information(const SymbolString& x) {
  if (x.empty()) throw std::invalid_argument("empirical information of empty string is undefined");
  Symbol mx = 0;
  for (Symbol s : x) mx = std::max(mx, s);
  CountVector cv = count_vector(x, static_cast<int>(mx) + 1);
  return empirical_information_of_counts(cv.counts);
}

}  // namespace shapecode
