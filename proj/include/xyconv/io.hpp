#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "xyconv/convertibility.hpp"
#include "xyconv/entanglement.hpp"
#include "xyconv/scaling.hpp"
#include "xyconv/sweep.hpp"

namespace xyconv {

inline constexpr const char* kToolVersion = "0.1.0";

// 17 significant digits round-trip double precision exactly.
inline std::string format_double(double x) {
  if (x == 0.0) x = 0.0;  // normalize -0
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string to_string(Convertibility c) {
  switch (c) {
    case Convertibility::Down: return "down";
    case Convertibility::Up: return "up";
    case Convertibility::Equal: return "equal";
    default: return "incomp";
  }
}

inline std::string to_string(Sign s) {
  switch (s) {
    case Sign::Negative: return "neg";
    case Sign::Positive: return "pos";
    default: return "zero";
  }
}

inline std::string alpha_label(const Alpha& a) {
  switch (a.kind) {
    case Alpha::Kind::ZeroLimit: return "0+";
    case Alpha::Kind::One: return "1";
    case Alpha::Kind::Infinity: return "inf";
    default: return format_double(a.value);
  }
}

// Flat key=value configuration text. Blank lines and '#' comments ignored.
inline std::map<std::string, std::string> parse_flat_config(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key=value, got '" + t + "'");
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

inline std::map<std::string, std::string> load_flat_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  return parse_flat_config(in);
}

// Stable run identifier: FNV-1a over the tool version, the command, and the
// fully resolved configuration. Reruns of the same config share it.
inline std::string run_identifier(const std::string& command,
                                  const std::map<std::string, std::string>& config) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0x1f;
    h *= 1099511628211ULL;
  };
  mix(kToolVersion);
  mix(command);
  for (const auto& [k, v] : config) {
    mix(k);
    mix(v);
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct RunManifest {
  std::string command;
  std::string run_id;
  std::map<std::string, std::string> config;  // all defaults materialized
  double duration_seconds = 0.0;
  std::size_t failed_cells = 0;
  std::vector<std::string> outputs;
};

inline void write_manifest(const std::string& path, const RunManifest& m) {
  nlohmann::json j;
  j["tool"] = "xyconv";
  j["version"] = kToolVersion;
  j["command"] = m.command;
  j["run_id"] = m.run_id;
  j["config"] = m.config;
  j["duration_seconds"] = m.duration_seconds;
  j["failed_cells"] = m.failed_cells;
  j["outputs"] = m.outputs;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << j.dump(2) << "\n";
}

inline std::map<std::string, std::string> config_from_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open manifest: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  if (!j.contains("config"))
    throw std::invalid_argument("manifest has no config object: " + path);
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : j.at("config").items()) out[k] = v.get<std::string>();
  return out;
}

// grid.csv: one row per classified cell. A single leading comment line ties
// the file to its manifest; the column set below is fixed.
inline void write_grid_csv(const std::string& path, const PhaseDiagramGrid& grid,
                           const std::string& run_id) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write grid csv: " + path);
  out << "# run=" << run_id << "\n";
  out << "gamma,h,locc,elocc,degenerate,gap,S1,lambda1,lambda2,lambda3,lambda4\n";
  for (const CellRecord& c : grid.cells) {
    if (c.failed) continue;  // failures are counted in the manifest
    if (c.lambdas.size() != 4)
      throw std::runtime_error("write_grid_csv: grid schema requires a 2-spin block");
    out << format_double(c.gamma) << ',' << format_double(c.h) << ',' << to_string(c.locc) << ','
        << to_string(c.elocc) << ',' << (c.degenerate ? 1 : 0) << ',' << format_double(c.gap)
        << ',' << format_double(c.s1);
    for (double l : c.lambdas) out << ',' << format_double(l);
    out << "\n";
  }
}

inline void write_signmap_csv(const std::string& path, const SignMap& map,
                              const std::string& run_id) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write sign map csv: " + path);
  out << "# run=" << run_id << "\n";
  out << "h,alpha,sign,degenerate\n";
  for (std::size_t i = 0; i < map.h_values.size(); ++i) {
    for (std::size_t a = 0; a < map.grid.points.size(); ++a) {
      out << format_double(map.h_values[i]) << ',' << alpha_label(map.grid.points[a]) << ',';
      if (map.failed[i])
        out << "failed";
      else
        out << to_string(map.signs[i][a]);
      out << ',' << (map.degenerate[i] ? 1 : 0) << "\n";
    }
  }
}

inline void write_renyi_csv(const std::string& path, const RenyiCurve& curve,
                            const std::string& run_id) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write curve csv: " + path);
  out << "# run=" << run_id << "\n";
  out << "alpha,S\n";
  for (std::size_t i = 0; i < curve.grid.points.size(); ++i)
    out << alpha_label(curve.grid.points[i]) << ',' << format_double(curve.entropies[i]) << "\n";
}

inline void write_majorization_csv(const std::string& path, const SchmidtSpectrum& at_h,
                                   const SchmidtSpectrum& at_h_delta, const std::string& run_id) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write majorization csv: " + path);
  out << "# run=" << run_id << "\n";
  out << "l,f_h,f_h_plus_delta\n";
  const MajorizationProfile fa = MajorizationProfile::of(at_h);
  const MajorizationProfile fb = MajorizationProfile::of(at_h_delta);
  for (int l = 0; l < at_h.size(); ++l)
    out << (l + 1) << ',' << format_double(fa.partial_sums[l]) << ','
        << format_double(fb.partial_sums[l]) << "\n";
}

inline void write_scaling_json(const std::string& path, const ScalingResult& fit,
                               const std::string& run_id) {
  nlohmann::json j;
  j["run_id"] = run_id;
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : fit.samples) samples.push_back({{"L", s.L}, {"h_c", s.h_c}});
  j["samples"] = samples;
  j["h_c_infinity"] = fit.h_inf;
  j["amplitude"] = fit.amplitude;
  j["rate"] = fit.rate;
  j["residual_rms"] = fit.residual_rms;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scaling json: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace xyconv
