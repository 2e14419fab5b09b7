#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "dppa/instance.hpp"
#include "dppa/theory.hpp"
#include "dppa/trajectory_io.hpp"

namespace dppa {

inline constexpr double kBoundSlack = 1e-9;
inline constexpr double kResidualSlack = 1e-7;
inline constexpr double kLedgerSlack = 1e-9;

struct CheckResult {
  std::string name;
  std::string status;  // "pass", "fail", or "n/a"
  double worst = std::numeric_limits<double>::quiet_NaN();
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& c) { return c.status != "fail"; });
  }
};

inline nlohmann::json report_to_json(const VerifyReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) {
    nlohmann::json jc{{"name", c.name}, {"status", c.status}, {"detail", c.detail}};
    jc["worst"] = std::isfinite(c.worst) ? nlohmann::json(c.worst) : nlohmann::json();
    checks.push_back(std::move(jc));
  }
  return nlohmann::json{{"checks", std::move(checks)}, {"passed", r.passed()}};
}

namespace detail {

inline bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

inline bool constants_match(const InstanceConstants& a, const InstanceConstants& b) {
  constexpr double tol = 1e-12;
  if (!close(a.l_smooth, b.l_smooth, tol) || !close(a.alpha, b.alpha, tol) ||
      !close(a.rho_w, b.rho_w, tol) || !close(a.lambda_min, b.lambda_min, tol))
    return false;
  if (a.degenerate() != b.degenerate()) return false;
  if (!a.degenerate()) {
    if (!close(a.d_const, b.d_const, tol) || !close(a.eta_dppa, b.eta_dppa, tol))
      return false;
    if (a.xstar.size() != b.xstar.size()) return false;
    for (Eigen::Index i = 0; i < a.xstar.size(); ++i)
      if (!close(a.xstar(i), b.xstar(i), tol)) return false;
  }
  if (std::isfinite(a.eta_c) != std::isfinite(b.eta_c)) return false;
  if (std::isfinite(a.eta_c) && !close(a.eta_c, b.eta_c, tol)) return false;
  return true;
}

}  // namespace detail

// Re-derives every claim a finished run is supposed to satisfy:
// recomputed constants must match the manifest snapshot, the two bound
// curves must dominate the recorded errors, the per-round inequality
// residuals must stay within slack, and the fixed-point ledger must be
// nonincreasing. The inequality and ledger checks apply to the proximal
// method only and are reported as n/a for explicit-step runs.
inline VerifyReport verify_trajectory(const InstanceFile& inst, const RunManifest& manifest,
                                      const std::vector<TrajectoryRow>& rows) {
  VerifyReport report;
  const double eta = manifest.eta;

  InstanceConstants consts = compute_instance_constants(inst.costs, inst.w);
  {
    CheckResult c{.name = "constants_match", .status = "pass"};
    if (!detail::constants_match(consts, manifest.constants)) {
      c.status = "fail";
      c.detail = "recomputed constants disagree with manifest (instance/trajectory mismatch?)";
    }
    report.checks.push_back(std::move(c));
    if (report.checks.back().status == "fail") return report;
  }

  {
    CheckResult c{.name = "rows_well_formed", .status = "pass"};
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].t != static_cast<long>(i)) {
        c.status = "fail";
        c.detail = "round numbers are not consecutive from 0";
        break;
      }
    report.checks.push_back(std::move(c));
    if (report.checks.back().status == "fail") return report;
  }

  const bool proximal = manifest.algo == Algo::Dppa;
  const bool theorems_apply = proximal && !consts.degenerate();

  // Uniform iterate radius: closed form when the stepsize is certified,
  // otherwise the measured sup of max(A_t, B_t).
  double r_used = 0.0;
  std::string r_detail;
  if (theorems_apply) {
    const double b1 = rows.size() > 1 ? rows[1].err.b_t : rows[0].err.b_t;
    const auto r = iterate_radius(consts, eta, rows[0].err.a_t, rows[0].err.b_t, b1);
    if (r.has_value()) {
      r_used = *r;
      r_detail = "closed-form radius";
    } else {
      for (const auto& row : rows) r_used = std::max({r_used, row.err.a_t, row.err.b_t});
      r_detail = "measured radius (stepsize beyond certified region)";
    }
  }

  {
    CheckResult c{.name = "bound_on_average_error"};
    if (!theorems_apply) {
      c.status = "n/a";
    } else {
      double worst = std::numeric_limits<double>::infinity();
      for (const auto& row : rows)
        worst = std::min(worst, average_error_bound(row.t, consts, eta, rows[0].err.a_t,
                                                    rows[0].err.b_t, r_used) -
                                    row.err.a_t);
      c.worst = worst;
      c.status = worst >= -kBoundSlack ? "pass" : "fail";
      c.detail = r_detail;
    }
    report.checks.push_back(std::move(c));
  }

  {
    CheckResult c{.name = "bound_on_disagreement"};
    if (!theorems_apply) {
      c.status = "n/a";
    } else {
      double worst = std::numeric_limits<double>::infinity();
      for (const auto& row : rows)
        worst = std::min(worst, disagreement_bound(row.t, consts, eta, rows[0].err.b_t,
                                                   r_used) -
                                    row.err.b_t);
      c.worst = worst;
      c.status = worst >= -kBoundSlack ? "pass" : "fail";
      c.detail = r_detail;
    }
    report.checks.push_back(std::move(c));
  }

  // Per-round inequality residuals, recomputed from the error columns
  // and cross-checked against the recorded values.
  for (int which = 1; which <= 2; ++which) {
    CheckResult c{.name = which == 1 ? "residual_r1" : "residual_r2"};
    if (!theorems_apply) {
      c.status = "n/a";
      report.checks.push_back(std::move(c));
      continue;
    }
    double worst = -std::numeric_limits<double>::infinity();
    bool consistent = true;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      const auto& cur = rows[i].err;
      const auto& nxt = rows[i + 1].err;
      const double el = eta * consts.l_smooth;
      const double recomputed =
          which == 1 ? (1.0 + eta * consts.alpha) * nxt.a_t - cur.a_t - el * nxt.b_t
                     : nxt.b_t - consts.rho_w * cur.b_t - el * nxt.b_t - el * nxt.a_t -
                           eta * consts.d_const;
      const double recorded = which == 1 ? rows[i].r1 : rows[i].r2;
      if (std::isfinite(recorded) && !detail::close(recomputed, recorded, 1e-12))
        consistent = false;
      worst = std::max(worst, recomputed);
    }
    c.worst = worst;
    if (!consistent) {
      c.status = "fail";
      c.detail = "recorded residuals disagree with the error columns";
    } else {
      c.status = worst <= kResidualSlack ? "pass" : "fail";
    }
    report.checks.push_back(std::move(c));
  }

  {
    CheckResult c{.name = "ledger_nonincreasing"};
    const bool have_ledger =
        std::any_of(rows.begin(), rows.end(),
                    [](const TrajectoryRow& r) { return std::isfinite(r.ledger); });
    if (!proximal || !have_ledger) {
      c.status = "n/a";
    } else {
      double worst = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i + 1 < rows.size(); ++i)
        worst = std::max(worst, rows[i + 1].ledger - rows[i].ledger);
      c.worst = worst;
      c.status = worst <= kLedgerSlack ? "pass" : "fail";
    }
    report.checks.push_back(std::move(c));
  }

  return report;
}

}  // namespace dppa
