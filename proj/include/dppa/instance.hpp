#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dppa/costs.hpp"
#include "dppa/graph.hpp"
#include "dppa/mixing.hpp"
#include "dppa/theory.hpp"

namespace dppa {

// Raised for malformed or inconsistent on-disk artifacts; the CLI maps
// it to its validation-failure exit code.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InstanceMeta {
  int n = 0;
  int m = 0;
  int d = 0;
  double link_prob = 0.0;
  std::uint64_t seed = 0;
  double scale = 0.5;
};

struct InstanceFile {
  CommGraph graph;
  MixingMatrix w;
  std::vector<QuadraticCost> costs;
  InstanceMeta meta;
};

inline constexpr std::uint64_t kCostStreamBase = 1ull << 32;

// Samples a full instance: a connected graph whose Metropolis matrix
// passes validation (resampled on the incremented attempt stream up to
// the retry cap, sharing the graph sampler's stream layout), plus one
// least-squares cost per agent with N(0,1) entries drawn from the
// per-agent streams kCostStreamBase + i (row-major A first, then y).
// Identical arguments always produce the identical instance.
inline InstanceFile generate_instance(int n, int m, int d, double link_prob,
                                      std::uint64_t seed, double scale) {
  if (n < 2) throw std::invalid_argument("generate_instance: need n >= 2");
  if (m < 1 || d < 1) throw std::invalid_argument("generate_instance: need m, d >= 1");
  if (!(link_prob > 0.0) || link_prob > 1.0)
    throw std::invalid_argument("generate_instance: link_prob must be in (0, 1]");
  if (!(scale > 0.0)) throw std::invalid_argument("generate_instance: scale must be positive");

  InstanceFile inst;
  bool found = false;
  for (std::uint64_t attempt = 0; attempt < kGraphRetryCap; ++attempt) {
    CommGraph g = detail::sample_graph(n, link_prob, seed, attempt);
    if (!is_connected(g)) continue;
    MixingMatrix mm = metropolis_weights(g);
    if (!validate_mixing_matrix(mm).empty()) continue;
    inst.graph = std::move(g);
    inst.w = std::move(mm);
    found = true;
    break;
  }
  if (!found)
    throw std::runtime_error("generate_instance: no valid sample within " +
                             std::to_string(kGraphRetryCap) + " attempts");

  inst.costs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    CounterRng rng(seed, kCostStreamBase + static_cast<std::uint64_t>(i));
    Eigen::MatrixXd a(m, d);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < d; ++c) a(r, c) = rng.next_gaussian();
    Eigen::VectorXd y(m);
    for (int r = 0; r < m; ++r) y(r) = rng.next_gaussian();
    inst.costs.emplace_back(std::move(a), std::move(y), scale);
  }

  inst.meta = InstanceMeta{n, m, d, link_prob, seed, scale};
  return inst;
}

// ---------------------------------------------------------------------
// JSON serialization. nlohmann objects keep keys sorted, and doubles are
// printed in shortest round-trip form, so serialization is canonical:
// the same values always produce the same bytes.

namespace detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw ValidationError("matrix: expected nonempty array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw ValidationError("matrix: ragged rows");
    for (Eigen::Index jx = 0; jx < cols; ++jx)
      m(i, jx) = row.at(static_cast<std::size_t>(jx)).get<double>();
  }
  return m;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

}  // namespace detail

inline nlohmann::json graph_to_json(const CommGraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [i, j] : g.edges) edges.push_back(nlohmann::json::array({i, j}));
  return nlohmann::json{{"n", g.n}, {"edges", std::move(edges)}};
}

inline CommGraph graph_from_json(const nlohmann::json& j) {
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges"))
    edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  try {
    return make_graph(j.at("n").get<int>(), std::move(edges));
  } catch (const std::invalid_argument& ex) {
    throw ValidationError(std::string("graph: ") + ex.what());
  }
}

inline nlohmann::json mixing_to_json(const MixingMatrix& m) {
  return nlohmann::json{{"w", detail::matrix_to_json(m.w)},
                        {"rho_w", m.rho_w},
                        {"lambda_min", m.lambda_min}};
}

inline nlohmann::json cost_to_json(const QuadraticCost& q) {
  return nlohmann::json{{"a", detail::matrix_to_json(q.a())},
                        {"y", detail::vector_to_json(q.y())},
                        {"scale", q.scale()}};
}

inline QuadraticCost cost_from_json(const nlohmann::json& j) {
  return QuadraticCost(detail::matrix_from_json(j.at("a")),
                       detail::vector_from_json(j.at("y")), j.at("scale").get<double>());
}

inline nlohmann::json instance_to_json(const InstanceFile& inst) {
  nlohmann::json costs = nlohmann::json::array();
  for (const auto& q : inst.costs) costs.push_back(cost_to_json(q));
  return nlohmann::json{
      {"graph", graph_to_json(inst.graph)},
      {"w", mixing_to_json(inst.w)},
      {"costs", std::move(costs)},
      {"meta",
       {{"n", inst.meta.n},
        {"m", inst.meta.m},
        {"d", inst.meta.d},
        {"link_prob", inst.meta.link_prob},
        {"seed", inst.meta.seed},
        {"scale", inst.meta.scale}}}};
}

// Parses and cross-validates an instance: the graph must be connected,
// the stored weight matrix must pass the mixing validation, match the
// graph's sparsity pattern, and its cached spectral quantities must
// agree with recomputation to 1e-12.
inline InstanceFile instance_from_json(const nlohmann::json& j) {
  InstanceFile inst;
  inst.graph = graph_from_json(j.at("graph"));
  if (!is_connected(inst.graph)) throw ValidationError("instance: graph is not connected");

  const auto& jw = j.at("w");
  inst.w.w = detail::matrix_from_json(jw.at("w"));
  inst.w.n = inst.graph.n;
  if (inst.w.w.rows() != inst.graph.n || inst.w.w.cols() != inst.graph.n)
    throw ValidationError("instance: weight matrix shape does not match graph");
  const auto [rho, lmin] = spectral_gap_quantities(inst.w.w);
  inst.w.rho_w = rho;
  inst.w.lambda_min = lmin;
  if (std::abs(rho - jw.at("rho_w").get<double>()) > 1e-12 ||
      std::abs(lmin - jw.at("lambda_min").get<double>()) > 1e-12)
    throw ValidationError("instance: stored spectral quantities do not match the matrix");
  if (const auto violations = validate_mixing_matrix(inst.w); !violations.empty())
    throw ValidationError("instance: invalid mixing matrix: " + violations.front());
  {
    Eigen::MatrixXd pattern = Eigen::MatrixXd::Zero(inst.graph.n, inst.graph.n);
    for (const auto& [a, b] : inst.graph.edges) pattern(a, b) = pattern(b, a) = 1.0;
    for (int a = 0; a < inst.graph.n; ++a)
      for (int b = 0; b < inst.graph.n; ++b)
        if (a != b && (inst.w.w(a, b) > 0.0) != (pattern(a, b) > 0.0))
          throw ValidationError("instance: weight sparsity does not match graph edges");
  }

  const auto& jm = j.at("meta");
  inst.meta = InstanceMeta{jm.at("n").get<int>(),
                           jm.at("m").get<int>(),
                           jm.at("d").get<int>(),
                           jm.at("link_prob").get<double>(),
                           jm.at("seed").get<std::uint64_t>(),
                           jm.at("scale").get<double>()};
  if (inst.meta.n != inst.graph.n) throw ValidationError("instance: meta.n mismatch");

  for (const auto& jc : j.at("costs")) {
    try {
      inst.costs.push_back(cost_from_json(jc));
    } catch (const std::invalid_argument& ex) {
      throw ValidationError(std::string("instance: cost: ") + ex.what());
    }
    const auto& q = inst.costs.back();
    if (q.a().rows() != inst.meta.m || q.a().cols() != inst.meta.d)
      throw ValidationError("instance: cost shape does not match meta");
  }
  if (static_cast<int>(inst.costs.size()) != inst.meta.n)
    throw ValidationError("instance: expected one cost per agent");
  return inst;
}

inline std::string canonical_dump(const nlohmann::json& j) { return j.dump(1) + "\n"; }

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << canonical_dump(j);
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& ex) {
    throw ValidationError(path + ": " + ex.what());
  }
}

inline void write_instance(const std::string& path, const InstanceFile& inst) {
  write_json_file(path, instance_to_json(inst));
}

inline InstanceFile read_instance(const std::string& path) {
  try {
    return instance_from_json(read_json_file(path));
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(path + ": " + ex.what());
  }
}

// Constants report with the fixed key set. Quantities that are undefined
// for the instance (no unique optimizer, or a zero smoothness constant)
// are serialized as null.
inline nlohmann::json constants_to_json(const InstanceConstants& c) {
  nlohmann::json j{{"L", c.l_smooth},
                   {"alpha", c.alpha},
                   {"rho_w", c.rho_w},
                   {"lambda_min", c.lambda_min}};
  j["eta_c"] = std::isfinite(c.eta_c) ? nlohmann::json(c.eta_c) : nlohmann::json();
  if (c.degenerate()) {
    j["D"] = nullptr;
    j["eta_dppa"] = nullptr;
    j["xstar"] = nullptr;
  } else {
    j["D"] = c.d_const;
    j["eta_dppa"] = c.eta_dppa;
    j["xstar"] = detail::vector_to_json(c.xstar);
  }
  return j;
}

inline InstanceConstants constants_from_json(const nlohmann::json& j) {
  InstanceConstants c;
  c.l_smooth = j.at("L").get<double>();
  c.alpha = j.at("alpha").get<double>();
  c.rho_w = j.at("rho_w").get<double>();
  c.lambda_min = j.at("lambda_min").get<double>();
  c.eta_c = j.at("eta_c").is_null() ? std::numeric_limits<double>::infinity()
                                    : j.at("eta_c").get<double>();
  if (!j.at("xstar").is_null()) {
    c.xstar = detail::vector_from_json(j.at("xstar"));
    c.d_const = j.at("D").get<double>();
    c.eta_dppa = j.at("eta_dppa").get<double>();
  }
  return c;
}

}  // namespace dppa
