#pragma once

// File formats: itinerary JSON, orbit/hair/grid CSV, constants JSON, point
// clouds for box counting. Numbers are written in shortest round-trip form.

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrtrig/analysis.hpp"
#include "qrtrig/core.hpp"
#include "qrtrig/dynamics.hpp"
#include "qrtrig/render.hpp"

namespace qrtrig {

using json = nlohmann::json;

inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error("format_double: conversion failed");
  return std::string(buf, end);
}

// ---------------------------------------------------------------------------
// Itinerary JSON: {"dim": d, "prefix": [[[r1,...],sign],...], "cycle": [...]}

inline json tray_to_json(const TrayIndex& r) { return json::array({r.lateral, r.sign}); }

inline json itinerary_to_json(const Itinerary& it) {
  json j;
  j["dim"] = it.dim();
  j["prefix"] = json::array();
  for (const auto& r : it.prefix()) j["prefix"].push_back(tray_to_json(r));
  j["cycle"] = json::array();
  for (const auto& r : it.cycle()) j["cycle"].push_back(tray_to_json(r));
  return j;
}

inline Itinerary itinerary_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("cycle"))
    throw InvalidItinerary(0, "itinerary JSON: expected object with \"dim\" and \"cycle\"");
  const int dim = j.at("dim").get<int>();
  auto parse_list = [&](const char* key) {
    std::vector<TrayIndex> out;
    if (!j.contains(key)) return out;
    const auto& arr = j.at(key);
    if (!arr.is_array()) throw InvalidItinerary(0, std::string("itinerary JSON: \"") + key + "\" must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto& e = arr[i];
      if (!e.is_array() || e.size() != 2 || !e[0].is_array() || !e[1].is_number_integer())
        throw InvalidItinerary(i, std::string("itinerary JSON: ") + key + "[" + std::to_string(i) +
                                      "] must be [[r1,...,r_{d-1}], sign]");
      const int sign = e[1].get<int>();
      if (sign != 1 && sign != -1)
        throw InvalidItinerary(i, std::string("itinerary JSON: ") + key + "[" + std::to_string(i) +
                                      "] sign must be +1 or -1");
      out.emplace_back(e[0].get<std::vector<std::int64_t>>(), sign);
    }
    return out;
  };
  return Itinerary(dim, parse_list("prefix"), parse_list("cycle"));
}

inline Itinerary load_itinerary(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open itinerary file '" + path + "'");
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw InvalidItinerary(0, "itinerary file '" + path + "': " + e.what());
  }
  return itinerary_from_json(j);
}

// ---------------------------------------------------------------------------
// Metadata shared by every artifact

struct RunInfo {
  int dim = 2;
  double lambda = 0.0;
  std::uint64_t seed = 0;
};

inline std::string csv_header(const RunInfo& info, int depth) {
  return "# dim=" + std::to_string(info.dim) + " lambda=" + format_double(info.lambda) +
         " depth=" + std::to_string(depth) + " seed=" + std::to_string(info.seed) +
         " version=" + kVersion + "\n";
}

inline void append_coords(std::string& line, const Point& p) {
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    line += ',';
    line += format_double(p[j]);
  }
}

/// Orbit CSV: header, then "k,x_1,...,x_d" per point.
inline std::string orbit_csv(const OrbitRecord& orbit, const RunInfo& info) {
  std::string out = csv_header(info, static_cast<int>(orbit.points.size()) - 1);
  for (std::size_t k = 0; k < orbit.points.size(); ++k) {
    std::string line = std::to_string(k);
    append_coords(line, orbit.points[k]);
    out += line + "\n";
  }
  return out;
}

/// Hair CSV: header, then "t,x_1,...,x_d" per sample.
inline std::string hair_csv(const HairTrace& hair, const RunInfo& info) {
  std::string out = csv_header(info, hair.depth);
  for (const auto& s : hair.samples) {
    std::string line = format_double(s.t);
    append_coords(line, s.point);
    out += line + "\n";
  }
  return out;
}

/// Grid CSV: "u,v,escape_step,sigma_parity" per pixel (escape_step -1 when
/// the orbit did not escape).
inline std::string grid_csv(const ImageGrid& grid, const SliceSpec& spec, const RunInfo& info,
                            int max_iter) {
  std::string out = csv_header(info, max_iter);
  for (int row = 0; row < grid.height; ++row) {
    for (int col = 0; col < grid.width; ++col) {
      const Point p = spec.pixel_point(col, row);
      const auto& px = grid.at(col, row);
      out += format_double(p[spec.axis_u]) + "," + format_double(p[spec.axis_v]) + "," +
             std::to_string(px.escape_step.value_or(-1)) + "," +
             std::to_string(px.first_tray.sigma_even() ? 0 : 1) + "\n";
    }
  }
  return out;
}

/// Reads comma-separated rows, skipping '#' comments and blank lines. When the
/// header declares dim=d and rows carry d+1 columns, the leading parameter
/// column (t or step index) is dropped.
inline std::vector<Point> read_points_csv(std::istream& is) {
  std::vector<Point> pts;
  std::optional<int> dim;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto pos = line.find("dim=");
      if (pos != std::string::npos) dim = std::stoi(line.substr(pos + 4));
      continue;
    }
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const char* b = cell.data();
      while (*b == ' ') ++b;
      auto [p, ec] = std::from_chars(b, cell.data() + cell.size(), v);
      if (ec != std::errc{})
        throw Error("points CSV line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      vals.push_back(v);
    }
    std::size_t skip = (dim && static_cast<int>(vals.size()) == *dim + 1) ? 1 : 0;
    Point p(static_cast<Eigen::Index>(vals.size() - skip));
    for (std::size_t j = skip; j < vals.size(); ++j) p[static_cast<Eigen::Index>(j - skip)] = vals[j];
    if (!pts.empty() && p.size() != pts.front().size())
      throw Error("points CSV line " + std::to_string(lineno) + ": inconsistent column count");
    pts.push_back(std::move(p));
  }
  return pts;
}

// ---------------------------------------------------------------------------
// JSON reports

inline json point_to_json(const Point& p) {
  json a = json::array();
  for (Eigen::Index j = 0; j < p.size(); ++j) a.push_back(p[j]);
  return a;
}

struct ConstantsReport {
  RunInfo info;
  int samples = 0;
  double beta_hat = 0, alpha_hat = 0, delta_hat = 0;
  double k_hat = 0, k_o_hat = 0, k_i_hat = 0, m_hat = 0;
};

inline json constants_to_json(const ConstantsReport& r) {
  return json{{"dim", r.info.dim},        {"lambda", r.info.lambda}, {"beta_hat", r.beta_hat},
              {"alpha_hat", r.alpha_hat}, {"delta_hat", r.delta_hat}, {"K_hat", r.k_hat},
              {"K_O_hat", r.k_o_hat},     {"K_I_hat", r.k_i_hat},     {"M_hat", r.m_hat},
              {"seed", r.info.seed},      {"samples", r.samples},     {"version", kVersion}};
}

inline json dimension_to_json(const DimensionEstimate& est) {
  return json{{"scales", est.scales}, {"counts", est.counts}, {"slope", est.slope},
              {"r2", est.r2}, {"version", kVersion}};
}

}  // namespace qrtrig
