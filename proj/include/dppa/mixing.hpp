#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dppa/graph.hpp"

namespace dppa {

// Symmetric doubly stochastic weight matrix for one communication round,
// with its two cached spectral quantities:
//   rho_w      — spectral norm of W - (1/n)11^T, the consensus contraction
//                factor (< 1 iff the graph is connected),
//   lambda_min — smallest eigenvalue of W (enters the explicit-step
//                stability threshold).
struct MixingMatrix {
  int n = 0;
  Eigen::MatrixXd w;
  double rho_w = 0.0;
  double lambda_min = 0.0;
};

inline constexpr double kStochasticTol = 1e-12;

// (rho_w, lambda_min) of a symmetric matrix. Throws on asymmetric input.
inline std::pair<double, double> spectral_gap_quantities(const Eigen::MatrixXd& w) {
  if (w.rows() != w.cols())
    throw std::invalid_argument("spectral_gap_quantities: matrix not square");
  const double asym = (w - w.transpose()).cwiseAbs().maxCoeff();
  if (asym > kStochasticTol)
    throw std::invalid_argument("spectral_gap_quantities: matrix not symmetric");
  const auto n = w.rows();
  const Eigen::MatrixXd centered =
      w - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_c(centered, Eigen::EigenvaluesOnly);
  const auto& evc = es_c.eigenvalues();
  const double rho = std::max(std::abs(evc(0)), std::abs(evc(n - 1)));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_w(w, Eigen::EigenvaluesOnly);
  return {rho, es_w.eigenvalues()(0)};
}

// Metropolis-style weights on a connected graph:
//   w_ij = 1 / (1 + max(deg_i, deg_j))   for each edge {i, j},
//   w_ii = 1 - sum_{j in N_i} w_ij,      zero otherwise.
// The +1 keeps every diagonal entry positive (w_ii >= 1/(1+deg_i)); the
// result is symmetric by construction and doubly stochastic up to
// floating-point addition.
inline MixingMatrix metropolis_weights(const CommGraph& g) {
  const int n = g.n;
  MixingMatrix m;
  m.n = n;
  m.w = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : g.edges) {
    const double wij =
        1.0 / (1.0 + static_cast<double>(std::max(g.degrees[static_cast<std::size_t>(i)],
                                                  g.degrees[static_cast<std::size_t>(j)])));
    m.w(i, j) = wij;
    m.w(j, i) = wij;
  }
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) off += m.w(i, j);
    m.w(i, i) = 1.0 - off;
  }
  std::tie(m.rho_w, m.lambda_min) = spectral_gap_quantities(m.w);
  return m;
}

// Checks the mixing-matrix contract: symmetric, nonnegative, row and
// column sums equal to 1 within 1e-12, strictly positive diagonal.
// Violations are returned as human-readable strings; an empty list means
// the matrix is acceptable.
inline std::vector<std::string> validate_mixing_matrix(const MixingMatrix& m) {
  std::vector<std::string> violations;
  const int n = m.n;
  if (m.w.rows() != n || m.w.cols() != n) {
    violations.push_back("dimension mismatch between n and w");
    return violations;
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(m.w(i, j) - m.w(j, i)) > kStochasticTol) {
        violations.push_back("asymmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (m.w(i, j) < 0.0)
        violations.push_back("negative entry at (" + std::to_string(i) + "," + std::to_string(j) + ")");
  for (int i = 0; i < n; ++i) {
    double row = 0.0, col = 0.0;
    for (int j = 0; j < n; ++j) {
      row += m.w(i, j);
      col += m.w(j, i);
    }
    if (std::abs(row - 1.0) > kStochasticTol)
      violations.push_back("row " + std::to_string(i) + " sums to " + std::to_string(row));
    if (std::abs(col - 1.0) > kStochasticTol)
      violations.push_back("column " + std::to_string(i) + " sums to " + std::to_string(col));
  }
  // A genuinely positive diagonal of a weight matrix built from unit
  // fractions is bounded well away from zero; 1e-12 separates it from
  // an exact zero computed in floating point.
  for (int i = 0; i < n; ++i)
    if (!(m.w(i, i) > kStochasticTol))
      violations.push_back("zero diagonal at node " + std::to_string(i));
  return violations;
}

// One communication round: returns W * x. Column means are preserved
// because the weights are doubly stochastic.
inline Eigen::MatrixXd mix(const MixingMatrix& m, const Eigen::MatrixXd& x) {
  if (x.rows() != m.n)
    throw std::invalid_argument("mix: state has " + std::to_string(x.rows()) +
                                " rows, expected " + std::to_string(m.n));
  return m.w * x;
}

}  // namespace dppa
