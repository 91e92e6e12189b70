#pragma once

#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <openssl/evp.h>

#include <nlohmann/json.hpp>

#include "gapsched/bezier.hpp"
#include "gapsched/errors.hpp"
#include "gapsched/optimize.hpp"
#include "gapsched/problems.hpp"
#include "gapsched/schedule.hpp"
#include "gapsched/simulator.hpp"
#include "gapsched/spectrum.hpp"

namespace gapsched {

// Shortest round-trip decimal representation; the same bits always print the
// same characters, which keeps every CSV byte-stable across runs.
inline std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) throw std::runtime_error("fmt_double: conversion failed");
  return std::string(buf, res.ptr);
}

inline std::string join_doubles(const std::vector<double>& values, char sep = ';') {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out.push_back(sep);
    out += fmt_double(values[i]);
  }
  return out;
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256_hex: digest failed");
  static const char* hexdig = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hexdig[digest[i] >> 4]);
    out.push_back(hexdig[digest[i] & 0xf]);
  }
  return out;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- gap profiles ----------------------------------------------------------

inline std::string profile_csv(const GapProfile& profile) {
  std::string out = "s,gap\n";
  for (std::size_t j = 0; j < profile.grid.size(); ++j)
    out += fmt_double(profile.grid[j]) + "," + fmt_double(profile.gaps[j]) + "\n";
  return out;
}

inline std::string aggregate_csv(const GapProfile& mean, const GapProfile& median) {
  if (mean.grid != median.grid)
    throw std::invalid_argument("aggregate_csv: mismatched grids");
  std::string out = "s,mean,median\n";
  for (std::size_t j = 0; j < mean.grid.size(); ++j)
    out += fmt_double(mean.grid[j]) + "," + fmt_double(mean.gaps[j]) + "," +
           fmt_double(median.gaps[j]) + "\n";
  return out;
}

inline std::string ensemble_csv(const std::vector<GapProfile>& profiles) {
  std::string out = "instance_id,s,gap\n";
  for (std::size_t i = 0; i < profiles.size(); ++i)
    for (std::size_t j = 0; j < profiles[i].grid.size(); ++j)
      out += std::to_string(i) + "," + fmt_double(profiles[i].grid[j]) + "," +
             fmt_double(profiles[i].gaps[j]) + "\n";
  return out;
}

inline std::string final_gaps_csv(const std::vector<double>& final_gaps) {
  std::string out = "instance_id,final_gap\n";
  for (std::size_t i = 0; i < final_gaps.size(); ++i)
    out += std::to_string(i) + "," + fmt_double(final_gaps[i]) + "\n";
  return out;
}

// ---- Bezier curves ---------------------------------------------------------

inline nlohmann::json curve_to_json(const BezierGapCurve& curve) {
  curve.validate();
  return nlohmann::json{{"degree", curve.degree},
                        {"y", curve.y},
                        {"source_profile_id", curve.source_profile_id},
                        {"rms_residual", curve.rms_residual}};
}

inline BezierGapCurve curve_from_json(const nlohmann::json& j) {
  BezierGapCurve curve;
  try {
    curve.degree = j.at("degree").get<int>();
    curve.y = j.at("y").get<std::vector<double>>();
    curve.source_profile_id = j.value("source_profile_id", std::string{});
    curve.rms_residual = j.value("rms_residual", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("curve document: ") + e.what());
  }
  curve.validate();
  return curve;
}

inline void save_curve(const BezierGapCurve& curve, const std::filesystem::path& path) {
  write_text_file(path, curve_to_json(curve).dump(2) + "\n");
}

inline BezierGapCurve load_curve(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse curve file " + path.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());  // unreadable input files are config errors
  }
  return curve_from_json(j);
}

// ---- schedules and traces --------------------------------------------------

inline std::string schedule_csv(const AngleSchedule& schedule) {
  schedule.validate();
  std::string out = "k,s_k,gamma,beta\n";
  for (int k = 1; k <= schedule.p; ++k) {
    const double s_k = static_cast<double>(k) / schedule.p;
    out += std::to_string(k) + "," + fmt_double(s_k) + "," +
           fmt_double(schedule.gammas[static_cast<std::size_t>(k - 1)]) + "," +
           fmt_double(schedule.betas[static_cast<std::size_t>(k - 1)]) + "\n";
  }
  return out;
}

inline std::string trace_csv(const OptResult& result) {
  const std::size_t d = result.best_params.size();
  std::string out = "eval_index,value";
  for (std::size_t i = 0; i < d; ++i) out += ",param_" + std::to_string(i);
  out += "\n";
  for (const TraceEntry& e : result.trace) {
    out += std::to_string(e.eval_index) + "," + fmt_double(e.value);
    for (double p : e.params) out += "," + fmt_double(p);
    out += "\n";
  }
  return out;
}

// ---- statevectors ----------------------------------------------------------

// 16-byte header: magic "GSQV", u32 version, u32 qubit count, u32 reserved;
// then 2^n little-endian (re, im) binary64 pairs.
inline void save_statevector(const StateVector& psi, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  const char magic[4] = {'G', 'S', 'Q', 'V'};
  const std::uint32_t version = 1, n = static_cast<std::uint32_t>(psi.n), reserved = 0;
  out.write(magic, 4);
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&reserved), 4);
  for (const Amp& a : psi.amps) {
    const double re = a.real(), im = a.imag();
    out.write(reinterpret_cast<const char*>(&re), 8);
    out.write(reinterpret_cast<const char*>(&im), 8);
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline StateVector load_statevector(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  char magic[4];
  std::uint32_t version = 0, n = 0, reserved = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&reserved), 4);
  if (!in || std::memcmp(magic, "GSQV", 4) != 0)
    throw std::runtime_error("not a statevector file: " + path.string());
  if (version != 1)
    throw std::runtime_error("unsupported statevector version in " + path.string());
  if (n < 1 || n > static_cast<std::uint32_t>(kSimulationCap))
    throw std::runtime_error("statevector qubit count out of range in " + path.string());
  StateVector psi;
  psi.n = static_cast<int>(n);
  psi.amps.resize(std::size_t{1} << n);
  for (Amp& a : psi.amps) {
    double re = 0.0, im = 0.0;
    in.read(reinterpret_cast<char*>(&re), 8);
    in.read(reinterpret_cast<char*>(&im), 8);
    a = Amp(re, im);
  }
  if (!in) throw std::runtime_error("truncated statevector file: " + path.string());
  return psi;
}

inline std::string probabilities_csv(const StateVector& psi) {
  if (psi.n > 16)
    throw CapExceeded("probabilities_csv: n = " + std::to_string(psi.n) +
                      " exceeds the n <= 16 export limit");
  std::string out = "index,probability\n";
  for (std::size_t x = 0; x < psi.amps.size(); ++x)
    out += std::to_string(x) + "," + fmt_double(std::norm(psi.amps[x])) + "\n";
  return out;
}

// ---- problem instances -----------------------------------------------------

// Instance documents: {"n": N, "coeffs": [[i, j, value], ...], "bounds_hint":
// [lo, hi] | null} for QUBO, {"n": N, "edges": [[u, v, weight], ...]} for
// MaxCut graphs. Indices are zero-based; binary64 values round-trip
// bit-exactly through the JSON layer.
inline nlohmann::json qubo_to_json(const QuboInstance& q) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const QuboTerm& t : q.coeffs) coeffs.push_back({t.i, t.j, t.value});
  nlohmann::json j{{"n", q.n}, {"coeffs", coeffs}};
  j["bounds_hint"] = q.bounds_hint
                         ? nlohmann::json{q.bounds_hint->first, q.bounds_hint->second}
                         : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json graph_to_json(const GraphInstance& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : g.edges) edges.push_back({e.u, e.v, e.w});
  return nlohmann::json{{"n", g.n}, {"edges", edges}};
}

// QUBO and graph documents are distinguished by their coeffs/edges key.
struct LoadedInstance {
  bool is_qubo = true;
  QuboInstance qubo;
  GraphInstance graph;

  IsingModel to_ising() const { return is_qubo ? qubo_to_ising(qubo) : maxcut_to_ising(graph); }
};

inline LoadedInstance instance_from_json(const nlohmann::json& j) {
  LoadedInstance inst;
  try {
    if (j.contains("coeffs")) {
      inst.is_qubo = true;
      inst.qubo.n = j.at("n").get<int>();
      for (const auto& t : j.at("coeffs")) {
        if (!t.is_array() || t.size() != 3)
          throw ConfigError("instance document: each coeff must be [i, j, value]");
        inst.qubo.coeffs.push_back(
            {t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<double>()});
      }
      if (j.contains("bounds_hint") && !j.at("bounds_hint").is_null()) {
        const auto& b = j.at("bounds_hint");
        if (!b.is_array() || b.size() != 2)
          throw ConfigError("instance document: bounds_hint must be [lo, hi]");
        inst.qubo.bounds_hint = {b.at(0).get<double>(), b.at(1).get<double>()};
      }
      inst.qubo.normalize();
      inst.qubo.validate();
    } else if (j.contains("edges")) {
      inst.is_qubo = false;
      inst.graph.n = j.at("n").get<int>();
      for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 3)
          throw ConfigError("instance document: each edge must be [u, v, weight]");
        inst.graph.edges.push_back(
            {e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()});
      }
      inst.graph.normalize();
      inst.graph.validate();
    } else {
      throw ConfigError("instance document: need a \"coeffs\" (QUBO) or \"edges\" (graph) key");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("instance document: ") + e.what());
  }
  return inst;
}

inline LoadedInstance load_instance(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse instance file " + path.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());  // unreadable input files are config errors
  }
  return instance_from_json(j);
}

}  // namespace gapsched
