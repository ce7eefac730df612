#include "shapecode/reporting.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace shapecode {

using ordered_json = nlohmann::ordered_json;

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

namespace {

// fixed-decimal value as a raw JSON number
ordered_json jnum(double v, int decimals) {
  if (std::isnan(v)) return nullptr;
  return ordered_json::parse(format_fixed(v, decimals));
}

ordered_json avg_info_obj(const AvgInfoReport& r, int decimals) {
  ordered_json o;
  o["alphabet"] = r.m;
  o["K"] = r.K;
  o["I_x"] = jnum(r.I_x, decimals);
  o["I_y"] = jnum(r.I_y, decimals);
  o["diff"] = jnum(r.diff, decimals);
  o["stderr_x"] = jnum(r.std_err_x, decimals);
  o["stderr_y"] = jnum(r.std_err_y, decimals);
  o["samples"] = r.samples;
  o["seed"] = r.seed;
  return o;
}

}  // namespace

std::string avg_info_csv(const std::vector<AvgInfoReport>& rows, int decimals) {
  std::string out = "alphabet,K,I_x,I_y,diff,stderr_x,stderr_y,samples,seed\n";
  for (const auto& r : rows) {
    out += std::to_string(r.m) + "," + std::to_string(r.K) + "," + format_fixed(r.I_x, decimals) +
           "," + format_fixed(r.I_y, decimals) + "," + format_fixed(r.diff, decimals) + "," +
           format_fixed(r.std_err_x, decimals) + "," + format_fixed(r.std_err_y, decimals) + "," +
           std::to_string(r.samples) + "," + std::to_string(r.seed) + "\n";
  }
  return out;
}

std::string avg_info_json(const std::vector<AvgInfoReport>& rows, int decimals) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) arr.push_back(avg_info_obj(r, decimals));
  return arr.dump(2) + "\n";
}

std::string curves_csv(const CurveReport& rep, int decimals) {
  std::string out = "index,I_x";
  for (int k : rep.Ks) out += ",I_y_K" + std::to_string(k);
  out += "\n";
  for (std::size_t i = 0; i < rep.I_x.size(); ++i) {
    out += std::to_string(i) + "," + format_fixed(rep.I_x[i], decimals);
    for (const auto& iy : rep.I_y) out += "," + format_fixed(iy[i], decimals);
    out += "\n";
  }
  return out;
}

std::string detection_json(const DetectionReport& rep, int decimals) {
  ordered_json o;
  o["channel"] = rep.channel;
  o["alphabet"] = rep.m;
  o["N"] = rep.N;
  o["K"] = rep.K;
  o["trials"] = rep.trials;
  o["seed"] = rep.seed;
  o["detected"] = rep.detected;
  o["detected_rate"] = jnum(rep.detected_rate, std::max(decimals, 6));
  o["predicted"] = jnum(rep.predicted, 4);
  o["mean_first_detect_position"] = jnum(rep.mean_first_detect_position, decimals);
  return o.dump(2) + "\n";
}

std::string code_lengths_json(const CodeLengthReport& rep, int decimals) {
  ordered_json o;
  o["alphabet"] = rep.m;
  o["N"] = rep.N;
  o["K"] = rep.K;
  o["samples"] = rep.samples;
  o["seed"] = rep.seed;
  o["mean_bits_x"] = jnum(rep.mean_bits_x, decimals);
  o["mean_bits_y"] = jnum(rep.mean_bits_y, decimals);
  o["diff_bits"] = jnum(rep.diff_bits, decimals);
  return o.dump(2) + "\n";
}

std::string manifest_json(const RunManifest& m) {
  ordered_json o;
  o["command"] = m.command;
  ordered_json p;
  for (const auto& [k, v] : m.params) p[k] = v;
  o["params"] = p;
  o["seed"] = m.seed;
  o["version"] = m.version;
  o["wall_ms"] = jnum(m.wall_ms, 1);
  return o.dump(2) + "\n";
}

}  // namespace shapecode
