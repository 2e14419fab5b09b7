#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace dppa {

inline constexpr double kDefaultProxTol = 1e-10;
inline constexpr long kProxIterationCap = 1'000'000;

// A differentiable local cost f_i: R^d -> R with a known smoothness
// (Lipschitz-gradient) constant. The proximal map
//   prox_{eta f}(v) = argmin_x f(x) + (1/2eta) ||x - v||^2
// has a generic iterative default; concrete costs override it when a
// closed form exists.
class CostFunction {
 public:
  virtual ~CostFunction() = default;
  virtual double value(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x) const = 0;
  virtual double smoothness() const = 0;
  virtual Eigen::VectorXd prox(const Eigen::VectorXd& v, double eta) const;
};

// Solves prox_{eta f}(v) by gradient descent on the strongly convex
// objective phi(x) = f(x) + ||x - v||^2 / (2 eta), warm-started at v with
// the standard stepsize 1/(L + 1/eta). Returns the first iterate whose
// optimality residual ||grad f(x) + (x - v)/eta|| falls below
// tol * (1 + ||v||). Throws if the iteration cap is reached, which
// signals a non-convex cost or an understated smoothness constant.
inline Eigen::VectorXd prox_generic(const CostFunction& f, const Eigen::VectorXd& v,
                                    double eta, double tol) {
  if (!(eta > 0.0)) throw std::invalid_argument("prox_generic: eta must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("prox_generic: tol must be positive");
  const double threshold = tol * (1.0 + v.norm());
  const double step = 1.0 / (f.smoothness() + 1.0 / eta);
  Eigen::VectorXd x = v;
  for (long iter = 0; iter < kProxIterationCap; ++iter) {
    const Eigen::VectorXd residual = f.gradient(x) + (x - v) / eta;
    if (residual.norm() <= threshold) return x;
    x -= step * residual;
  }
  throw std::runtime_error("prox_generic: iteration cap reached before tolerance");
}

inline Eigen::VectorXd CostFunction::prox(const Eigen::VectorXd& v, double eta) const {
  return prox_generic(*this, v, eta, kDefaultProxTol);
}

// Least-squares cost f(x) = scale * ||A x - y||^2. Gradient is
// 2*scale*A^T(Ax - y); the smoothness constant 2*scale*lambda_max(A^T A)
// and the Gram matrix are cached at construction.
class QuadraticCost final : public CostFunction {
 public:
  QuadraticCost(Eigen::MatrixXd a, Eigen::VectorXd y, double scale = 0.5)
      : a_(std::move(a)), y_(std::move(y)), scale_(scale) {
    if (a_.rows() != y_.size())
      throw std::invalid_argument("QuadraticCost: A has " + std::to_string(a_.rows()) +
                                  " rows but y has " + std::to_string(y_.size()));
    if (!(scale_ > 0.0)) throw std::invalid_argument("QuadraticCost: scale must be positive");
    gram_ = a_.transpose() * a_;
    aty_ = a_.transpose() * y_;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_, Eigen::EigenvaluesOnly);
    smoothness_ = 2.0 * scale_ * es.eigenvalues()(gram_.rows() - 1);
  }

  double value(const Eigen::VectorXd& x) const override {
    return scale_ * (a_ * x - y_).squaredNorm();
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override {
    return 2.0 * scale_ * (gram_ * x - aty_);
  }

  double smoothness() const override { return smoothness_; }

  Eigen::VectorXd prox(const Eigen::VectorXd& v, double eta) const override;

  int dim() const { return static_cast<int>(a_.cols()); }
  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::VectorXd& y() const { return y_; }
  double scale() const { return scale_; }
  // Hessian of f: 2*scale*A^T A.
  Eigen::MatrixXd hessian() const { return 2.0 * scale_ * gram_; }
  Eigen::VectorXd gradient_constant() const { return 2.0 * scale_ * aty_; }

 private:
  Eigen::MatrixXd a_;
  Eigen::VectorXd y_;
  double scale_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd aty_;
  double smoothness_ = 0.0;
};

// Closed-form proximal map of a quadratic cost: the optimality condition
// 2*scale*A^T(Ax - y) + (x - v)/eta = 0 rearranges to the SPD system
//   (I + 2*scale*eta*A^T A) x = v + 2*scale*eta*A^T y.
inline Eigen::VectorXd prox_quadratic(const QuadraticCost& q, const Eigen::VectorXd& v,
                                      double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("prox_quadratic: eta must be positive");
  if (v.size() != q.dim())
    throw std::invalid_argument("prox_quadratic: v has wrong dimension");
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(q.dim(), q.dim()) + eta * q.hessian();
  return Eigen::LLT<Eigen::MatrixXd>(system).solve(v + eta * q.gradient_constant());
}

inline Eigen::VectorXd QuadraticCost::prox(const Eigen::VectorXd& v, double eta) const {
  return prox_quadratic(*this, v, eta);
}

// Smoothness constant of a quadratic cost, 2*scale*lambda_max(A^T A).
inline double smoothness_constant(const QuadraticCost& q) { return q.smoothness(); }

// The identically-zero cost; its proximal map is the identity.
class ZeroCost final : public CostFunction {
 public:
  double value(const Eigen::VectorXd&) const override { return 0.0; }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override {
    return Eigen::VectorXd::Zero(x.size());
  }
  double smoothness() const override { return 0.0; }
  Eigen::VectorXd prox(const Eigen::VectorXd& v, double) const override { return v; }
};

}  // namespace dppa
