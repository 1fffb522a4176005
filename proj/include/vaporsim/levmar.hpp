#pragma once

#include <functional>

#include <Eigen/Dense>

namespace vaporsim {

// Residuals and Jacobian of a model at the given parameter vector. The
// callback resizes nothing: residuals has one entry per data point and the
// Jacobian is (points x params), d residual_i / d theta_j.
using LevMarModel =
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&,
                       Eigen::MatrixXd&)>;

struct LevMarOptions {
  int max_iterations = 200;
  double step_tol = 1e-12;    // relative parameter step
  double ssr_tol = 1e-14;     // relative SSR improvement
  double lambda_init = 1e-3;
};

struct LevMarResult {
  Eigen::VectorXd params;
  double ssr = 0.0;
  int iterations = 0;
  bool converged = false;
  bool at_bound = false;
  Eigen::MatrixXd jtj;  // J^T J at the solution, for covariance estimates
};

// Damped least squares with box constraints enforced by projection. The
// model is evaluated only inside the box; a parameter that finishes on a
// bound is reported through at_bound.
LevMarResult levmar_fit(const LevMarModel& model, const Eigen::VectorXd& start,
                        const Eigen::VectorXd& lower,
                        const Eigen::VectorXd& upper,
                        const LevMarOptions& options = {});

}  // namespace vaporsim
