#pragma once

// JSON space/sample formats and CSV reports.
//
//   space:  {"labels": ["a", ...], "rho": [[0, ...], ...]}
//   ball:   {"center_tau": [...], "R": r, "taus": [[...], ...], "gram": [[...], ...]}
//   map:    [i0, i1, ...]  (image index of each source point)

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mfill/boundary.hpp"
#include "mfill/error.hpp"
#include "mfill/filling.hpp"
#include "mfill/moebius.hpp"
#include "mfill/rough_isometry.hpp"
#include "mfill/semimetric.hpp"

namespace mfill::io {

using json = nlohmann::json;

inline FiniteSemiMetric space_from_json(const json& j) {
  if (!j.is_object() || !j.contains("rho")) throw Error(ErrorCode::ParseError, "space JSON needs a \"rho\" matrix");
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  try {
    rows = j.at("rho").get<std::vector<std::vector<double>>>();
    if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return FiniteSemiMetric(SquareMatrix::from_rows(rows), std::move(labels));
}

inline json space_to_json(const FiniteSemiMetric& s) {
  return json{{"labels", s.labels()}, {"rho", s.matrix().rows()}};
}

inline FiniteSemiMetric read_space(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return space_from_json(j);
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
  out << j.dump(2) << '\n';
}

inline json ball_to_json(const BallSample& b) {
  json taus = json::array();
  for (const auto& p : b.points) taus.push_back(p.tau.values);
  return json{{"center_tau", b.center.tau.values}, {"R", b.radius}, {"taus", taus}, {"gram", b.gram.rows()}};
}

/// Rebuilds a sample over `base`; gram is recomputed and checked against the
/// stored one.
inline BallSample ball_from_json(const json& j, const SpaceRef& base) {
  BallSample b;
  b.center = MoebiusPoint{TauVector{base, j.at("center_tau").get<std::vector<double>>()}, 0.0};
  b.radius = j.at("R").get<double>();
  for (const auto& t : j.at("taus")) {
    TauVector tau{base, t.get<std::vector<double>>()};
    check_dimension(tau.values, *base);
    const double res = discrepancy_norm(tau.values, *base);
    b.points.push_back(MoebiusPoint{std::move(tau), res});
  }
  b.gram = gram_matrix(b.points);
  const auto stored = SquareMatrix::from_rows(j.at("gram").get<std::vector<std::vector<double>>>());
  if (stored.size() != b.gram.size()) throw Error(ErrorCode::SchemaMismatch, "gram size does not match taus");
  for (std::size_t i = 0; i < stored.size(); ++i)
    for (std::size_t k = 0; k < stored.size(); ++k)
      if (std::abs(stored(i, k) - b.gram(i, k)) > 1e-9)
        throw Error(ErrorCode::SchemaMismatch, "stored gram disagrees with taus");
  return b;
}

inline json map_to_json(const PointMap& f) { return json(f.assignment); }

// ---------------------------------------------------------------------------
// CSV

struct CsvSchema {
  std::vector<std::string> columns;
};

inline const CsvSchema filling_schema{{"n", "eps_n", "distortion", "net_defect", "sup_discrepancy", "wallclock_ms"}};
inline const CsvSchema boundary_schema{
    {"eta", "component_count", "epsilon_g", "max_cross_gromov", "min_same_shadow_gromov"}};
inline const CsvSchema flow_schema{{"t", "residual", "distance_to_final"}};

inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Header row then one line per row, 17 significant digits. An optional
/// preamble is written as '#'-prefixed lines before the header.
inline void report_writer(std::ostream& out, const std::vector<std::vector<double>>& rows, const CsvSchema& schema,
                          const std::string& preamble = {}) {
  for (const auto& row : rows)
    if (row.size() != schema.columns.size())
      throw Error(ErrorCode::SchemaMismatch, "row has " + std::to_string(row.size()) + " fields, schema has " +
                                                 std::to_string(schema.columns.size()));
  if (!preamble.empty()) {
    std::istringstream lines(preamble);
    for (std::string l; std::getline(lines, l);) out << "# " << l << '\n';
  }
  for (std::size_t c = 0; c < schema.columns.size(); ++c) out << (c ? "," : "") << schema.columns[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
    out << '\n';
  }
}

inline std::vector<std::vector<double>> to_rows(const FillingReport& r, bool include_wallclock = true) {
  std::vector<std::vector<double>> rows;
  for (const auto& x : r.rows)
    rows.push_back({static_cast<double>(x.n), x.eps_n, x.distortion, x.net_defect, x.sup_discrepancy,
                    include_wallclock ? x.wallclock_ms : 0.0});
  return rows;
}

inline std::vector<std::vector<double>> to_rows(const BoundaryReport& r) {
  std::vector<std::vector<double>> rows;
  for (const auto& x : r.rows)
    rows.push_back({x.eta, static_cast<double>(x.component_count), x.epsilon_g, x.max_cross_gromov,
                    x.min_same_shadow_gromov});
  return rows;
}

inline std::vector<std::vector<double>> to_rows(const FlowTrajectory& t) {
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < t.times.size(); ++k)
    rows.push_back({t.times[k], t.discrepancy_norms[k], sup_distance(t.taus[k], t.taus.back())});
  return rows;
}

inline std::string report_string(const std::vector<std::vector<double>>& rows, const CsvSchema& schema,
                                 const std::string& preamble = {}) {
  std::ostringstream os;
  report_writer(os, rows, schema, preamble);
  return os.str();
}

}  // namespace mfill::io
