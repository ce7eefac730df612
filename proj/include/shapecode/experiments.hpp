#pragma once

#include <string>
#include <vector>

#include "shapecode/shaping.hpp"

namespace shapecode {

inline constexpr std::uint64_t kDefaultSeed = 20240901;
inline constexpr std::uint64_t kSamplesPerChunk = 65536;  // RNG stream granularity

struct AvgInfoReport {
  int m = 0, N = 0, K = 0;
  std::uint64_t samples = 0, seed = 0;
  double I_x = 0, I_y = 0, diff = 0, std_err_x = 0, std_err_y = 0;
};

struct DetectionReport {
  int m = 0, N = 0, K = 0;
  std::uint64_t trials = 0, seed = 0;
  std::string channel;
  std::uint64_t detected = 0;
  double detected_rate = 0;
  double predicted = 0;  // K/(N+K)
  double mean_first_detect_position = 0;  // NaN when nothing was detected
};

struct CurveReport {
  int m = 0, N = 0;
  std::vector<int> Ks;
  std::vector<double> I_x;               // length m^N, non-decreasing
  std::vector<std::vector<double>> I_y;  // one array per K
};

struct Channel {
  enum class Kind { single_substitution, symmetric } kind = Kind::single_substitution;
  double epsilon = 0.0;

  static Channel single_substitution() { return Channel{}; }
  static Channel symmetric(double eps) { return Channel{Kind::symmetric, eps}; }
  /// "single_substitution" or "symmetric(eps)".
  static Channel parse(const std::string& spec);
  std::string describe() const;
};

/// Mean information content of sampled strings and of their shaped images.
/// Deterministic given (seed, samples) for any thread count.
AvgInfoReport estimate_avg_info(const ShapingConfig& cfg, std::uint64_t samples,
                                std::uint64_t seed, int threads = 1);

/// Stream seed used for cell `i` of the table runs (recorded in reports).
std::uint64_t table_cell_seed(std::uint64_t seed, std::size_t cell_index);

/// The 8-cell grid m in {2..5} x K in {1,2}, N=100, uniform source.
std::vector<AvgInfoReport> run_table1(std::uint64_t samples = 1'000'000,
                                      std::uint64_t seed = kDefaultSeed, int threads = 1);

/// m=3, N=100, K=1..5, uniform source.
std::vector<AvgInfoReport> run_table2(std::uint64_t samples = 10'000'000,
                                      std::uint64_t seed = kDefaultSeed, int threads = 1);

/// Exact per-index curves I(x_i), I(y_i) over the full ordered sets.
CurveReport exact_curves(int m, int N, const std::vector<int>& Ks, const Ensemble& e,
                         KeyMode mode);

/// Corrupt shaped strings through the channel and count detections
/// (a trial is detected exactly when the corrupted string leaves the image).
DetectionReport detection_experiment(const ShapingConfig& cfg, std::uint64_t trials,
                                     const Channel& channel, std::uint64_t seed,
                                     int threads = 1);

}  // namespace shapecode
