#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dppa/costs.hpp"
#include "dppa/mixing.hpp"
#include "dppa/theory.hpp"

namespace dppa {

enum class Algo { Dppa, Dgd };

inline const char* algo_name(Algo a) { return a == Algo::Dppa ? "dppa" : "dgd"; }

inline Algo parse_algo(const std::string& s) {
  if (s == "dppa") return Algo::Dppa;
  if (s == "dgd") return Algo::Dgd;
  throw std::invalid_argument("unknown algorithm '" + s + "' (expected dppa or dgd)");
}

// Stacked network state at round t: row i holds agent i's iterate, xbar
// the exact column mean. Reductions run in fixed index order so repeated
// runs are bit-identical.
struct NetworkState {
  long t = 0;
  Eigen::MatrixXd x;
  Eigen::VectorXd xbar;
};

namespace detail {

inline Eigen::VectorXd column_mean(const Eigen::MatrixXd& x) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) s += x(i, j);
    mean(j) = s / static_cast<double>(x.rows());
  }
  return mean;
}

inline double row_norm(const Eigen::MatrixXd& x, Eigen::Index i,
                       const Eigen::VectorXd& ref) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double d = x(i, j) - ref(j);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace detail

inline NetworkState make_state(long t, Eigen::MatrixXd x) {
  NetworkState s;
  s.t = t;
  s.xbar = detail::column_mean(x);
  s.x = std::move(x);
  return s;
}

// Error functionals of a state relative to the optimizer x*:
//   a_t      — || xbar - x* ||
//   b_t      — root-mean-square disagreement (1/sqrt n) || x - 1 xbar^T ||_F
//   mean_err — (1/n) sum_k || x_k - x* ||, the plotted quantity
struct ErrorFunctionals {
  double a_t = 0.0;
  double b_t = 0.0;
  double mean_err = 0.0;
};

inline ErrorFunctionals error_functionals(const NetworkState& s, const Eigen::VectorXd& xstar) {
  if (xstar.size() != s.x.cols())
    throw std::invalid_argument("error_functionals: xstar dimension mismatch");
  ErrorFunctionals e;
  {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < s.xbar.size(); ++j) {
      const double d = s.xbar(j) - xstar(j);
      sum += d * d;
    }
    e.a_t = std::sqrt(sum);
  }
  {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < s.x.rows(); ++i) {
      const double r = detail::row_norm(s.x, i, s.xbar);
      sum += r * r;
    }
    e.b_t = std::sqrt(sum / static_cast<double>(s.x.rows()));
  }
  {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < s.x.rows(); ++i) sum += detail::row_norm(s.x, i, xstar);
    e.mean_err = sum / static_cast<double>(s.x.rows());
  }
  return e;
}

// Sum over agents of the distance to the penalized-cost fixed point.
// Along any proximal-step trajectory with convex costs this value is
// nonincreasing in t, for every stepsize.
inline double disagreement_ledger(const NetworkState& s, const Eigen::MatrixXd& fixed_point) {
  if (fixed_point.rows() != s.x.rows() || fixed_point.cols() != s.x.cols())
    throw std::invalid_argument("disagreement_ledger: fixed point dimension mismatch");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < s.x.rows(); ++i) {
    double r = 0.0;
    for (Eigen::Index j = 0; j < s.x.cols(); ++j) {
      const double d = s.x(i, j) - fixed_point(i, j);
      r += d * d;
    }
    sum += std::sqrt(r);
  }
  return sum;
}

using CostList = std::vector<const CostFunction*>;

inline CostList cost_list(const std::vector<QuadraticCost>& costs) {
  CostList list;
  list.reserve(costs.size());
  for (const auto& q : costs) list.push_back(&q);
  return list;
}

// Proximal step: mix, then every agent applies its own proximal map to
// the mixed point (an implicit gradient step on the local cost).
inline NetworkState dppa_step(const NetworkState& s, const MixingMatrix& m,
                              const CostList& costs, double eta) {
  if (static_cast<int>(costs.size()) != m.n)
    throw std::invalid_argument("dppa_step: one cost per agent required");
  const Eigen::MatrixXd mixed = mix(m, s.x);
  Eigen::MatrixXd next(s.x.rows(), s.x.cols());
  for (Eigen::Index i = 0; i < next.rows(); ++i)
    next.row(i) = costs[static_cast<std::size_t>(i)]
                      ->prox(mixed.row(i).transpose(), eta)
                      .transpose();
  return make_state(s.t + 1, std::move(next));
}

// Explicit step: mix, then subtract eta times the local gradient
// evaluated at the agent's previous iterate.
inline NetworkState dgd_step(const NetworkState& s, const MixingMatrix& m,
                             const CostList& costs, double eta) {
  if (static_cast<int>(costs.size()) != m.n)
    throw std::invalid_argument("dgd_step: one cost per agent required");
  Eigen::MatrixXd next = mix(m, s.x);
  for (Eigen::Index i = 0; i < next.rows(); ++i)
    next.row(i) -= eta * costs[static_cast<std::size_t>(i)]
                             ->gradient(s.x.row(i).transpose())
                             .transpose();
  return make_state(s.t + 1, std::move(next));
}

struct AlgoConfig {
  double eta = 0.0;
  long rounds = 0;
  Eigen::MatrixXd init;  // empty means all zeros
  double overflow_guard = 1e12;
};

// One recorded round. r1 and r2 are the residuals of the two per-round
// inequalities for the transition t -> t+1 (nonpositive, up to
// floating-point slack, along every stable proximal-step trajectory):
//   r1 = (1 + eta*alpha) A_{t+1} - A_t - eta L B_{t+1}
//   r2 = B_{t+1} - rho B_t - eta L B_{t+1} - eta L A_{t+1} - eta D
// The final row has no following transition, so its residuals are NaN.
// ledger is the fixed-point distance sum (NaN when no fixed point was
// supplied).
struct TrajectoryRow {
  long t = 0;
  ErrorFunctionals err;
  double r1 = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
  double ledger = std::numeric_limits<double>::quiet_NaN();
};

struct Trajectory {
  std::vector<TrajectoryRow> rows;
  NetworkState final_state;
  bool diverged = false;
};

namespace detail {

// NaN-proof magnitude guard: true when any entry fails |v| <= guard.
inline bool exceeds_guard(const Eigen::MatrixXd& x, double guard) {
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      if (!(std::abs(x(i, j)) <= guard)) return true;
  return false;
}

}  // namespace detail

// Runs a trajectory of cfg.rounds synchronous rounds, recording error
// functionals, inequality residuals, and the fixed-point ledger each
// round. The inequality monitors use the instance's computed constants,
// never caller-supplied ones. Divergence (any iterate entry beyond the
// overflow guard) stops the run early and is recorded, not thrown.
inline Trajectory run(Algo algo, const AlgoConfig& cfg, const MixingMatrix& m,
                      const CostList& costs, const InstanceConstants& consts,
                      const Eigen::MatrixXd* fixed_point = nullptr) {
  if (!(cfg.eta > 0.0)) throw std::invalid_argument("run: eta must be positive");
  if (cfg.rounds < 1) throw std::invalid_argument("run: rounds must be >= 1");
  if (consts.xstar.size() == 0)
    throw std::invalid_argument("run: constants carry no optimizer (degenerate instance)");

  Eigen::MatrixXd init = cfg.init.size() > 0
                             ? cfg.init
                             : Eigen::MatrixXd::Zero(m.n, consts.xstar.size());
  if (init.rows() != m.n || init.cols() != consts.xstar.size())
    throw std::invalid_argument("run: init has wrong shape");

  const double eta = cfg.eta;
  const double al = consts.alpha;
  const double el = eta * consts.l_smooth;

  Trajectory traj;
  traj.rows.reserve(static_cast<std::size_t>(cfg.rounds) + 1);

  NetworkState state = make_state(0, std::move(init));
  ErrorFunctionals err = error_functionals(state, consts.xstar);

  for (long t = 0; t < cfg.rounds; ++t) {
    NetworkState next = algo == Algo::Dppa ? dppa_step(state, m, costs, eta)
                                           : dgd_step(state, m, costs, eta);
    const ErrorFunctionals next_err = error_functionals(next, consts.xstar);

    TrajectoryRow row;
    row.t = state.t;
    row.err = err;
    row.r1 = (1.0 + eta * al) * next_err.a_t - err.a_t - el * next_err.b_t;
    row.r2 = next_err.b_t - consts.rho_w * err.b_t - el * next_err.b_t -
             el * next_err.a_t - eta * consts.d_const;
    if (fixed_point != nullptr) row.ledger = disagreement_ledger(state, *fixed_point);
    traj.rows.push_back(row);

    state = std::move(next);
    err = next_err;
    if (detail::exceeds_guard(state.x, cfg.overflow_guard)) {
      traj.diverged = true;
      break;
    }
  }

  TrajectoryRow last;
  last.t = state.t;
  last.err = err;
  if (fixed_point != nullptr) last.ledger = disagreement_ledger(state, *fixed_point);
  traj.rows.push_back(last);
  traj.final_state = std::move(state);
  return traj;
}

}  // namespace dppa
