#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dppa/costs.hpp"
#include "dppa/mixing.hpp"

namespace dppa {

// Constants derived from one instance (costs + mixing matrix). They feed
// the stability thresholds, the per-round inequality monitors, and the
// convergence-bound curves.
//
//   l_smooth   — L, the largest per-agent smoothness constant
//   alpha      — strong-convexity modulus of the network-averaged cost
//                (1/n) sum_k f_k; the contraction constant of the
//                averaged iterate recursion
//   d_const    — D = max_i ||grad f_i(x*)||, the gradient spread at the
//                optimizer
//   xstar      — minimizer of sum_k f_k (empty when the aggregate
//                Hessian is singular; bound checks are then disabled)
//   eta_c      — explicit-step (DGD) stability threshold (1+lambda_min)/L
//   eta_dppa   — certified proximal-step stability threshold, the
//                positive root of the stability quadratic
struct InstanceConstants {
  double l_smooth = 0.0;
  double alpha = 0.0;
  double d_const = 0.0;
  double rho_w = 0.0;
  double lambda_min = 0.0;
  Eigen::VectorXd xstar;
  double eta_c = std::numeric_limits<double>::infinity();
  double eta_dppa = 0.0;
  std::optional<double> r_bound;  // uniform iterate radius, set per run

  bool degenerate() const { return xstar.size() == 0; }
};

namespace detail {

inline Eigen::MatrixXd aggregate_hessian(const std::vector<QuadraticCost>& costs) {
  if (costs.empty()) throw std::invalid_argument("aggregate_hessian: no costs");
  Eigen::MatrixXd h = costs.front().hessian();
  for (std::size_t k = 1; k < costs.size(); ++k) h += costs[k].hessian();
  return h;
}

}  // namespace detail

// Strong-convexity modulus of the averaged cost (1/n) sum_k f_k: the
// smallest eigenvalue of the averaged Hessian. This is the constant for
// which the averaged-iterate contraction holds; the literal sum's
// modulus is n times larger and does not satisfy that recursion.
inline double strong_convexity_alpha(const std::vector<QuadraticCost>& costs) {
  const Eigen::MatrixXd h = detail::aggregate_hessian(costs) / static_cast<double>(costs.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Minimizer of sum_k f_k via the normal equations. Throws when the
// aggregate Hessian is singular (no unique optimizer) or when the
// gradient residual at the solution exceeds 1e-9 * (1 + ||x*||).
inline Eigen::VectorXd solve_global_optimum(const std::vector<QuadraticCost>& costs) {
  const Eigen::MatrixXd h = detail::aggregate_hessian(costs);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(h.rows());
  for (const auto& q : costs) rhs += q.gradient_constant();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(h.rows() - 1);
  if (!(lo > 1e-10 * std::max(1.0, hi)))
    throw std::runtime_error("solve_global_optimum: aggregate Hessian is singular");

  const Eigen::VectorXd xstar = Eigen::LLT<Eigen::MatrixXd>(h).solve(rhs);
  Eigen::VectorXd grad_sum = Eigen::VectorXd::Zero(xstar.size());
  for (const auto& q : costs) grad_sum += q.gradient(xstar);
  if (grad_sum.norm() > 1e-9 * (1.0 + xstar.norm()))
    throw std::runtime_error("solve_global_optimum: residual check failed");
  return xstar;
}

// D = max_i ||grad f_i(x*)||.
inline double max_local_gradient_norm(const std::vector<QuadraticCost>& costs,
                                      const Eigen::VectorXd& xstar) {
  double d = 0.0;
  for (const auto& q : costs) d = std::max(d, q.gradient(xstar).norm());
  return d;
}

// Largest stepsize for which the explicit-step method is certified
// stable: (1 + lambda_min(W)) / L.
inline double dgd_stability_threshold(double l, double lambda_min) {
  if (!(l > 0.0)) throw std::invalid_argument("dgd_stability_threshold: need L > 0");
  return (1.0 + lambda_min) / l;
}

// Certified proximal-step stability threshold: the positive root of
//   q(eta) = eta^2 (alpha^2 + alpha L)
//          + eta (alpha + L - (1 - rho) alpha^2 / L)
//          - (1 - rho) alpha / L,
// so q(eta) < 0 strictly for all eta in (0, root). q(0) < 0 and the
// leading coefficient is positive, so the positive root exists and is
// unique; it is computed with the cancellation-free quadratic formula.
inline double dppa_stability_threshold(double alpha, double l, double rho_w) {
  if (!(alpha > 0.0) || !(alpha <= l * (1.0 + 1e-12)))
    throw std::invalid_argument("dppa_stability_threshold: need 0 < alpha <= L");
  if (!(rho_w >= 0.0) || !(rho_w < 1.0))
    throw std::invalid_argument("dppa_stability_threshold: need 0 <= rho_w < 1");
  const double a = alpha * alpha + alpha * l;
  const double b = alpha + l - (1.0 - rho_w) * alpha * alpha / l;
  const double c = -(1.0 - rho_w) * alpha / l;
  const double sq = std::sqrt(b * b - 4.0 * a * c);
  return b >= 0.0 ? (2.0 * -c) / (b + sq) : (sq - b) / (2.0 * a);
}

// Value of the stability quadratic above; negative iff the stepsize is
// strictly inside the certified region.
inline double dppa_stability_margin(double alpha, double l, double rho_w, double eta) {
  return eta * eta * (alpha * alpha + alpha * l) +
         eta * (alpha + l - (1.0 - rho_w) * alpha * alpha / l) -
         (1.0 - rho_w) * alpha / l;
}

namespace detail {

// Hessian of the penalized aggregate sum_k f_k(x_k) + (1/2 eta) x^T (I-W) x,
// assembled as an nd-by-nd dense matrix with agent-major ordering.
inline Eigen::MatrixXd penalized_cost_hessian(const std::vector<Eigen::MatrixXd>& hessians,
                                              const MixingMatrix& m, double eta) {
  const int n = m.n;
  if (static_cast<int>(hessians.size()) != n)
    throw std::invalid_argument("penalized_cost_hessian: one Hessian per agent required");
  const auto d = hessians.front().rows();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n * d, n * d);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  for (int k = 0; k < n; ++k) {
    h.block(k * d, k * d, d, d) = hessians[static_cast<std::size_t>(k)] +
                                  (1.0 - m.w(k, k)) / eta * id;
    for (int j = 0; j < n; ++j)
      if (j != k && m.w(k, j) != 0.0) h.block(k * d, j * d, d, d) = -m.w(k, j) / eta * id;
  }
  return h;
}

}  // namespace detail

// True iff the penalized aggregate cost is bounded below and attains a
// minimizer: its Hessian must be positive semidefinite and the
// stationarity system consistent. Always true for convex quadratics with
// a symmetric doubly stochastic W; the explicit check exists so that a
// non-convex injection is detected.
inline bool penalized_cost_bounded_below(const std::vector<Eigen::MatrixXd>& hessians,
                                         const std::vector<Eigen::VectorXd>& linear_terms,
                                         const MixingMatrix& m, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("penalized_cost_bounded_below: eta > 0 required");
  const Eigen::MatrixXd h = detail::penalized_cost_hessian(hessians, m, eta);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  const auto& ev = es.eigenvalues();
  const double scale = std::max(1.0, std::abs(ev(ev.size() - 1)));
  const double tol = 1e-9 * scale;
  if (ev(0) < -tol) return false;

  const auto d = hessians.front().rows();
  Eigen::VectorXd rhs(h.rows());
  for (int k = 0; k < m.n; ++k) rhs.segment(k * d, d) = linear_terms[static_cast<std::size_t>(k)];
  // Consistency: the right-hand side must have no component in the null
  // space of the Hessian.
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) <= tol &&
        std::abs(es.eigenvectors().col(i).dot(rhs)) > 1e-9 * (1.0 + rhs.norm()))
      return false;
  }
  return true;
}

inline bool penalized_cost_bounded_below(const std::vector<QuadraticCost>& costs,
                                         const MixingMatrix& m, double eta) {
  std::vector<Eigen::MatrixXd> hessians;
  std::vector<Eigen::VectorXd> linear_terms;
  hessians.reserve(costs.size());
  linear_terms.reserve(costs.size());
  for (const auto& q : costs) {
    hessians.push_back(q.hessian());
    linear_terms.push_back(q.gradient_constant());
  }
  return penalized_cost_bounded_below(hessians, linear_terms, m, eta);
}

// Stationary point of the penalized aggregate cost, which is also the
// fixed point of the proximal-step update: row k solves
//   eta * grad f_k(x_k) + x_k - sum_j w_kj x_j = 0.
// Returns the n-by-d stack of agent rows. Throws when the system is
// singular (all-zero costs) or the solve residual exceeds tolerance.
inline Eigen::MatrixXd solve_network_fixed_point(const std::vector<QuadraticCost>& costs,
                                                 const MixingMatrix& m, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("solve_network_fixed_point: eta > 0 required");
  const int n = m.n;
  if (static_cast<int>(costs.size()) != n)
    throw std::invalid_argument("solve_network_fixed_point: one cost per agent required");
  if (strong_convexity_alpha(costs) <= 0.0)
    throw std::runtime_error(
        "solve_network_fixed_point: aggregate Hessian singular; every consensus "
        "state in its null space is stationary");

  const int d = costs.front().dim();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(n * d, n * d);
  Eigen::VectorXd rhs(n * d);
  for (int k = 0; k < n; ++k) {
    system.block(k * d, k * d, d, d) =
        eta * costs[static_cast<std::size_t>(k)].hessian() + (1.0 - m.w(k, k)) * id;
    for (int j = 0; j < n; ++j)
      if (j != k && m.w(k, j) != 0.0) system.block(k * d, j * d, d, d) = -m.w(k, j) * id;
    rhs.segment(k * d, d) = eta * costs[static_cast<std::size_t>(k)].gradient_constant();
  }

  const Eigen::VectorXd flat = Eigen::LDLT<Eigen::MatrixXd>(system).solve(rhs);
  if ((system * flat - rhs).norm() > 1e-9 * (1.0 + rhs.norm()))
    throw std::runtime_error("solve_network_fixed_point: residual check failed");

  Eigen::MatrixXd fp(n, d);
  for (int k = 0; k < n; ++k) fp.row(k) = flat.segment(k * d, d).transpose();
  return fp;
}

// Bound curve for the distance of the averaged iterate from the
// optimizer after t rounds:
//   A_0/(1+eta*alpha)^t
//   + t*eta*L*B_0*rho/(1+eta*alpha) * max{rho, 1/(1+eta*alpha)}^(t-1)
//   + eta*L*(2RL + D) / (alpha*(1-rho)).
// The middle term is zero at t = 0 by convention.
inline double average_error_bound(long t, const InstanceConstants& c, double eta,
                                  double a0, double b0, double r) {
  if (!(c.alpha > 0.0)) throw std::invalid_argument("average_error_bound: alpha > 0 required");
  const double contraction = 1.0 / (1.0 + eta * c.alpha);
  const double head = a0 * std::pow(contraction, static_cast<double>(t));
  const double mid =
      t == 0 ? 0.0
             : static_cast<double>(t) * eta * c.l_smooth * b0 * c.rho_w * contraction *
                   std::pow(std::max(c.rho_w, contraction), static_cast<double>(t - 1));
  const double tail =
      eta * c.l_smooth * (2.0 * r * c.l_smooth + c.d_const) / (c.alpha * (1.0 - c.rho_w));
  return head + mid + tail;
}

// Bound curve for the consensus error after t rounds:
//   rho^t B_0 + eta (2RL + D) / (1 - rho).
inline double disagreement_bound(long t, const InstanceConstants& c, double eta,
                                 double b0, double r) {
  return std::pow(c.rho_w, static_cast<double>(t)) * b0 +
         eta * (2.0 * r * c.l_smooth + c.d_const) / (1.0 - c.rho_w);
}

// Uniform iterate radius R for a run started at (A_0, B_0, B_1):
//   max{ A_0, (L/alpha) B_0, (L/alpha) B_1, eta D / denom },
// where denom = (alpha/L)(1 - eta L - eta^2 L^2/(1+eta alpha))
//             - (alpha/L) rho - eta L/(1+eta alpha).
// The denominator is positive exactly when the stepsize is strictly
// inside the certified stability region; otherwise nullopt is returned
// and callers fall back to the measured sup of max(A_t, B_t).
inline std::optional<double> iterate_radius(const InstanceConstants& c, double eta,
                                            double a0, double b0, double b1) {
  if (!(c.alpha > 0.0) || !(c.l_smooth > 0.0))
    throw std::invalid_argument("iterate_radius: positive alpha and L required");
  const double ratio = c.alpha / c.l_smooth;
  const double el = eta * c.l_smooth;
  const double denom = ratio * (1.0 - el - el * el / (1.0 + eta * c.alpha)) -
                       ratio * c.rho_w - el / (1.0 + eta * c.alpha);
  if (!(denom > 0.0)) return std::nullopt;
  return std::max({a0, b0 / ratio, b1 / ratio, eta * c.d_const / denom});
}

// All instance constants in one pass. When the aggregate Hessian is
// singular there is no unique optimizer: xstar stays empty, d_const is
// zero, and eta_dppa is zero (no stepsize can be certified).
inline InstanceConstants compute_instance_constants(const std::vector<QuadraticCost>& costs,
                                                    const MixingMatrix& m) {
  InstanceConstants c;
  for (const auto& q : costs) c.l_smooth = std::max(c.l_smooth, q.smoothness());
  c.rho_w = m.rho_w;
  c.lambda_min = m.lambda_min;
  c.eta_c = c.l_smooth > 0.0 ? dgd_stability_threshold(c.l_smooth, c.lambda_min)
                             : std::numeric_limits<double>::infinity();

  const Eigen::MatrixXd avg = detail::aggregate_hessian(costs) / static_cast<double>(costs.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(avg, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(avg.rows() - 1);
  if (lo > 1e-10 * std::max(1.0, hi)) {
    c.alpha = lo;
    c.xstar = solve_global_optimum(costs);
    c.d_const = max_local_gradient_norm(costs, c.xstar);
    c.eta_dppa = dppa_stability_threshold(c.alpha, c.l_smooth, c.rho_w);
  } else {
    c.alpha = std::max(lo, 0.0);
  }
  return c;
}

}  // namespace dppa
