#pragma once

// Nonlinear least squares via Eigen's Levenberg-Marquardt (MINPACK port) with
// central-difference Jacobians. Parameter covariance is (J^T J)^-1 scaled by
// the reduced chi-square, matching the usual curve-fit convention when the
// residuals are not pre-weighted by known absolute errors.

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include <cmath>
#include <functional>
#include <string>

#include "qplas/core/error.hpp"

namespace qplas::fit {

using ResidualFn = std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals)>;

struct LeastSquaresOptions {
  int max_evaluations = 4000;
  double xtol = 1e-14;
  double ftol = 1e-15;
  bool scale_covariance = true;
};

struct LeastSquaresResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;
  double residual_norm = 0.0;
  int evaluations = 0;
  int status = 0;

  double error(Eigen::Index i) const { return std::sqrt(std::max(0.0, covariance(i, i))); }
};

namespace detail {

struct ResidualFunctor : Eigen::DenseFunctor<double> {
  ResidualFunctor(ResidualFn fn, int n_params, int n_residuals)
      : Eigen::DenseFunctor<double>(n_params, n_residuals), fn_(std::move(fn)) {}

  int operator()(const InputType& x, ValueType& fvec) const {
    fn_(x, fvec);
    return 0;
  }

  ResidualFn fn_;
};

inline Eigen::MatrixXd central_jacobian(const ResidualFn& fn, const Eigen::VectorXd& x, int n_residuals) {
  Eigen::MatrixXd jac(n_residuals, x.size());
  Eigen::VectorXd plus(n_residuals), minus(n_residuals);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = std::cbrt(1e-16) * std::max(1.0, std::abs(x(j)));
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    fn(xp, plus);
    fn(xm, minus);
    jac.col(j) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

}  // namespace detail

/// Minimizes ||r(p)||^2 starting from `initial`. Throws FitError when the
/// problem is underdetermined, the evaluation budget runs out, or the final
/// Jacobian is rank deficient.
inline LeastSquaresResult least_squares(const ResidualFn& residuals, Eigen::VectorXd initial, int n_residuals,
                                        const LeastSquaresOptions& options = {}) {
  const auto n_params = static_cast<int>(initial.size());
  if (n_residuals < n_params)
    throw FitError("underdetermined fit: " + std::to_string(n_residuals) + " residuals for " +
                   std::to_string(n_params) + " parameters");

  detail::ResidualFunctor functor(residuals, n_params, n_residuals);
  Eigen::NumericalDiff<detail::ResidualFunctor, Eigen::Central> numeric(functor);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<detail::ResidualFunctor, Eigen::Central>> lm(numeric);
  lm.setMaxfev(options.max_evaluations);
  lm.setXtol(options.xtol);
  lm.setFtol(options.ftol);
  const auto status = lm.minimize(initial);

  if (status == Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation ||
      status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters)
    throw FitError("least squares did not converge (status " + std::to_string(static_cast<int>(status)) +
                   ", evaluations " + std::to_string(lm.nfev()) + ")");
  for (Eigen::Index i = 0; i < initial.size(); ++i)
    if (!std::isfinite(initial(i))) throw FitError("least squares diverged to a non-finite parameter");

  LeastSquaresResult result;
  result.params = initial;
  result.evaluations = static_cast<int>(lm.nfev());
  result.status = static_cast<int>(status);

  Eigen::VectorXd r(n_residuals);
  residuals(result.params, r);
  result.residual_norm = r.norm();

  const Eigen::MatrixXd jac = detail::central_jacobian(residuals, result.params, n_residuals);
  const Eigen::MatrixXd normal = jac.transpose() * jac;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
  if (!lu.isInvertible()) throw FitError("singular normal matrix at the solution (degenerate data)");
  result.covariance = lu.inverse();
  if (options.scale_covariance && n_residuals > n_params)
    result.covariance *= r.squaredNorm() / static_cast<double>(n_residuals - n_params);
  return result;
}

}  // namespace qplas::fit
