#pragma once

#include <string>
#include <utility>
#include <vector>

#include "shapecode/codec.hpp"
#include "shapecode/experiments.hpp"

namespace shapecode {

/// Fixed-decimal formatting used for every CSV/JSON numeric field; C locale,
/// so identical parameters yield byte-identical output.
std::string format_fixed(double v, int decimals);

std::string avg_info_csv(const std::vector<AvgInfoReport>& rows, int decimals);
std::string avg_info_json(const std::vector<AvgInfoReport>& rows, int decimals);

/// Columns: index,I_x,I_y_K<k1>,I_y_K<k2>,...
std::string curves_csv(const CurveReport& rep, int decimals);

std::string detection_json(const DetectionReport& rep, int decimals);
std::string code_lengths_json(const CodeLengthReport& rep, int decimals);

struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> params;
  std::uint64_t seed = 0;
  std::string version;
  double wall_ms = 0;
};

std::string manifest_json(const RunManifest& m);

}  // namespace shapecode
