#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dppa/algorithms.hpp"
#include "dppa/instance.hpp"

namespace dppa {

inline constexpr const char* kTrajectoryHeader =
    "t,a_t,b_t,mean_err,log10_mean_err,r1,r2,ledger";

namespace detail {

// 17 significant digits: enough to round-trip any double exactly.
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << kTrajectoryHeader << '\n';
  for (const auto& row : traj.rows) {
    out << row.t << ',' << detail::format_g17(row.err.a_t) << ','
        << detail::format_g17(row.err.b_t) << ',' << detail::format_g17(row.err.mean_err)
        << ',' << detail::format_g17(std::log10(row.err.mean_err)) << ','
        << detail::format_g17(row.r1) << ',' << detail::format_g17(row.r2) << ','
        << detail::format_g17(row.ledger) << '\n';
  }
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_trajectory_csv(out, traj);
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::vector<TrajectoryRow> read_trajectory_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryHeader)
    throw ValidationError(path + ": unexpected trajectory header");
  std::vector<TrajectoryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8) throw ValidationError(path + ": malformed row '" + line + "'");
    TrajectoryRow row;
    row.t = std::stol(fields[0]);
    row.err.a_t = std::strtod(fields[1].c_str(), nullptr);
    row.err.b_t = std::strtod(fields[2].c_str(), nullptr);
    row.err.mean_err = std::strtod(fields[3].c_str(), nullptr);
    row.r1 = std::strtod(fields[5].c_str(), nullptr);
    row.r2 = std::strtod(fields[6].c_str(), nullptr);
    row.ledger = std::strtod(fields[7].c_str(), nullptr);
    rows.push_back(row);
  }
  if (rows.empty()) throw ValidationError(path + ": no rows");
  return rows;
}

// Everything needed to reproduce one run byte-for-byte, plus a snapshot
// of the derived constants so a verifier can detect an instance swap.
struct RunManifest {
  std::string instance_path;
  Algo algo = Algo::Dppa;
  double eta = 0.0;
  long rounds = 0;
  std::string out_csv;
  bool diverged = false;
  InstanceConstants constants;
};

inline nlohmann::json manifest_to_json(const RunManifest& m) {
  return nlohmann::json{{"instance", m.instance_path},
                        {"algo", algo_name(m.algo)},
                        {"eta", m.eta},
                        {"rounds", m.rounds},
                        {"out_csv", m.out_csv},
                        {"diverged", m.diverged},
                        {"constants", constants_to_json(m.constants)}};
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.instance_path = j.at("instance").get<std::string>();
  m.algo = parse_algo(j.at("algo").get<std::string>());
  m.eta = j.at("eta").get<double>();
  m.rounds = j.at("rounds").get<long>();
  m.out_csv = j.at("out_csv").get<std::string>();
  m.diverged = j.at("diverged").get<bool>();
  m.constants = constants_from_json(j.at("constants"));
  return m;
}

inline void write_manifest(const std::string& path, const RunManifest& m) {
  write_json_file(path, manifest_to_json(m));
}

inline RunManifest read_manifest(const std::string& path) {
  try {
    return manifest_from_json(read_json_file(path));
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(path + ": " + ex.what());
  }
}

// Mean of mean_err over the trailing fraction of the rows (at least one
// row); the plateau statistic used for stepsize sweeps.
inline double plateau_mean(const std::vector<TrajectoryRow>& rows, double fraction = 0.1) {
  if (rows.empty()) throw std::invalid_argument("plateau_mean: no rows");
  auto tail = static_cast<std::size_t>(fraction * static_cast<double>(rows.size()));
  if (tail < 1) tail = 1;
  double sum = 0.0;
  for (std::size_t i = rows.size() - tail; i < rows.size(); ++i) sum += rows[i].err.mean_err;
  return sum / static_cast<double>(tail);
}

}  // namespace dppa
