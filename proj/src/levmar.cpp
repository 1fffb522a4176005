#include "vaporsim/levmar.hpp"

#include <cmath>
#include <stdexcept>

namespace vaporsim {

namespace {

Eigen::VectorXd clamp_to_box(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

}  // namespace

LevMarResult levmar_fit(const LevMarModel& model, const Eigen::VectorXd& start,
                        const Eigen::VectorXd& lower,
                        const Eigen::VectorXd& upper,
                        const LevMarOptions& options) {
  const long np = start.size();
  if (lower.size() != np || upper.size() != np)
    throw std::invalid_argument("parameter bound sizes must match the start");
  if (((upper - lower).array() <= 0.0).any())
    throw std::invalid_argument("each upper bound must exceed its lower bound");

  LevMarResult out;
  out.params = clamp_to_box(start, lower, upper);

  Eigen::VectorXd residuals;
  Eigen::MatrixXd jac;
  model(out.params, residuals, jac);
  out.ssr = residuals.squaredNorm();
  out.jtj = jac.transpose() * jac;

  double lambda = options.lambda_init;
  for (out.iterations = 1; out.iterations <= options.max_iterations;
       ++out.iterations) {
    const Eigen::VectorXd gradient = jac.transpose() * residuals;

    bool accepted = false;
    for (int attempt = 0; attempt < 25; ++attempt) {
      Eigen::MatrixXd damped = out.jtj;
      damped.diagonal() += lambda * out.jtj.diagonal().cwiseMax(1e-30);
      const Eigen::VectorXd step = damped.ldlt().solve(-gradient);
      if (!step.allFinite()) {
        lambda *= 5.0;
        continue;
      }
      const Eigen::VectorXd trial =
          clamp_to_box(out.params + step, lower, upper);

      Eigen::VectorXd trial_res;
      Eigen::MatrixXd trial_jac;
      model(trial, trial_res, trial_jac);
      const double trial_ssr = trial_res.squaredNorm();
      if (std::isfinite(trial_ssr) && trial_ssr <= out.ssr) {
        const double step_size =
            (trial - out.params).norm() /
            (out.params.norm() + 1e-300);
        const double improvement = (out.ssr - trial_ssr) /
                                   (out.ssr + 1e-300);
        out.params = trial;
        residuals.swap(trial_res);
        jac.swap(trial_jac);
        out.ssr = trial_ssr;
        out.jtj = jac.transpose() * jac;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (step_size < options.step_tol || improvement < options.ssr_tol)
          out.converged = true;
        break;
      }
      lambda *= 5.0;
    }
    if (!accepted) {
      // No downhill step exists at any damping, so the point is stationary.
      out.converged = true;
    }
    if (out.converged) break;
  }

  for (long j = 0; j < np; ++j) {
    const double span = upper(j) - lower(j);
    if (out.params(j) - lower(j) < 1e-9 * span ||
        upper(j) - out.params(j) < 1e-9 * span)
      out.at_bound = true;
  }
  return out;
}

}  // namespace vaporsim
