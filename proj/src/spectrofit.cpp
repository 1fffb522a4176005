#include "vaporsim/spectrofit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "vaporsim/errors.hpp"
#include "vaporsim/levmar.hpp"
#include "vaporsim/rng.hpp"
#include "vaporsim/voigt.hpp"

namespace vaporsim {

namespace {

constexpr int k_n_params = 5;  // d, P, T, slope, offset

// Spectral shape pieces of the two-manifold model. The vapour density and
// the cross-section prefactor cancel between the profile and its centroid
// normalization, so only the Voigt shapes matter here.
struct ShapeModel {
  const OpticalLine* line;
  double gamma;  // Lorentzian HWHM, natural plus pressure broadening
  double c4;
  double c3;

  explicit ShapeModel(const VaporCell& cell)
      : line(&cell.line),
        gamma(lorentzian_gamma_from_fwhm(lorentzian_fwhm_ghz(cell))),
        c4(cell.line.centroid_f4_ghz()),
        c3(cell.line.centroid_f3_ghz()) {}

  double sigma(double temperature_k) const {
    return gaussian_sigma_from_fwhm(doppler_fwhm(*line, temperature_k));
  }

  // OD(nu) for unit optical depth at the F=4 centroid.
  double shape(double nu, double sigma_t, double pol) const {
    const double v4 = voigt_profile(nu - c4, sigma_t, gamma);
    const double v3 = voigt_profile(nu - c3, sigma_t, gamma);
    return (v4 + (1.0 / pol - 1.0) * v3) / voigt_profile(0.0, sigma_t, gamma);
  }

};

void check_span(const ShapeModel& model, const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("frequency grid is empty");
  const auto [lo, hi] = std::minmax_element(grid.begin(), grid.end());
  if (*lo > model.c4 || *hi < model.c3)
    throw std::invalid_argument(
        "frequency grid must span both ground-state manifolds");
}

Eigen::VectorXd pack(const SpectrumFit& fit) {
  Eigen::VectorXd theta(k_n_params);
  theta << fit.optical_depth, fit.polarization, fit.temperature_k,
      fit.baseline_slope_per_ghz, fit.baseline_offset;
  return theta;
}

}  // namespace

void SpectrumTrace::validate() const {
  if (frequency_ghz.size() != transmission.size())
    throw std::invalid_argument("frequency and transmission lengths differ");
  if (frequency_ghz.size() < 64)
    throw std::invalid_argument("a scan needs at least 64 samples");
  for (double t : transmission)
    if (!(t >= 0.0))
      throw std::invalid_argument("transmission entries must be >= 0");
  if (noise_sigma < 0.0)
    throw std::invalid_argument("noise level must be >= 0");
}

double polarization_from_ratio(double n1, double n3) {
  if (n1 < 0.0 || n3 < 0.0)
    throw std::invalid_argument("populations must be >= 0");
  if (n1 + n3 == 0.0)
    throw std::invalid_argument("populations must not both be zero");
  return n1 / (n1 + n3);
}

double centroid_optical_depth(const VaporCell& cell,
                              const GroundPopulations& pops) {
  GroundPopulations only_f4;
  only_f4.n1_fraction = 1.0;
  only_f4.n3_fraction = 0.0;
  return pops.n1_fraction *
         optical_depth_profile(cell, only_f4,
                               {cell.line.centroid_f4_ghz()})[0];
}

std::vector<double> model_transmission(const VaporCell& cell_template,
                                       const SpectrumFit& params,
                                       const std::vector<double>& grid_ghz) {
  const ShapeModel model(cell_template);
  check_span(model, grid_ghz);
  if (!(params.optical_depth > 0.0))
    throw std::invalid_argument("optical depth must be positive");
  if (!(params.polarization > 0.0 && params.polarization <= 1.0))
    throw std::invalid_argument("polarization must lie in (0, 1]");
  if (!(params.temperature_k > 0.0))
    throw std::invalid_argument("temperature must be positive");

  const double sigma_t = model.sigma(params.temperature_k);
  std::vector<double> out(grid_ghz.size());
  for (size_t i = 0; i < grid_ghz.size(); ++i) {
    const double nu = grid_ghz[i];
    const double od = params.optical_depth *
                      model.shape(nu, sigma_t, params.polarization);
    out[i] = (params.baseline_offset + params.baseline_slope_per_ghz * nu) *
             std::exp(-od);
  }
  return out;
}

SpectrumTrace synthesize_scan(const VaporCell& cell,
                              const GroundPopulations& pops,
                              double baseline_slope_per_ghz,
                              double baseline_offset, double noise_sigma,
                              std::uint64_t seed,
                              const std::vector<double>& grid_ghz) {
  if (noise_sigma < 0.0)
    throw std::invalid_argument("noise level must be >= 0");
  SpectrumTrace trace;
  trace.frequency_ghz = grid_ghz;
  trace.transmission = transmission_spectrum(cell, pops, grid_ghz);
  trace.noise_sigma = noise_sigma;
  Rng rng(seed);
  for (size_t i = 0; i < grid_ghz.size(); ++i) {
    double value = (baseline_offset + baseline_slope_per_ghz * grid_ghz[i]) *
                   trace.transmission[i];
    if (noise_sigma > 0.0) value += noise_sigma * rng.normal();
    trace.transmission[i] = std::max(value, 0.0);
  }
  return trace;
}

SpectrumTrace synthesize_scan_from_fit(const VaporCell& cell_template,
                                       const SpectrumFit& truth,
                                       double noise_sigma, std::uint64_t seed,
                                       const std::vector<double>& grid_ghz) {
  if (noise_sigma < 0.0)
    throw std::invalid_argument("noise level must be >= 0");
  SpectrumTrace trace;
  trace.frequency_ghz = grid_ghz;
  trace.transmission = model_transmission(cell_template, truth, grid_ghz);
  trace.noise_sigma = noise_sigma;
  Rng rng(seed);
  if (noise_sigma > 0.0)
    for (double& t : trace.transmission)
      t = std::max(t + noise_sigma * rng.normal(), 0.0);
  return trace;
}

SpectrumFit fit_scan(const VaporCell& cell_template, const SpectrumTrace& trace,
                     const SpectrumFit& guess) {
  trace.validate();
  const ShapeModel model(cell_template);
  check_span(model, trace.frequency_ghz);

  const size_t n = trace.frequency_ghz.size();
  const std::vector<double>& nu = trace.frequency_ghz;
  const std::vector<double>& y = trace.transmission;

  LevMarModel fill = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& res,
                         Eigen::MatrixXd& jac) {
    const double d = theta(0), pol = theta(1), temp = theta(2);
    const double slope = theta(3), offset = theta(4);
    const double sigma_t = model.sigma(temp);
    const double dsigma_dtemp = sigma_t / (2.0 * temp);
    const double ratio = 1.0 / pol - 1.0;
    const VoigtDerivatives v0 =
        voigt_profile_derivatives(0.0, sigma_t, model.gamma);

    res.resize(long(n));
    jac.resize(long(n), k_n_params);
    for (size_t i = 0; i < n; ++i) {
      const VoigtDerivatives v4 =
          voigt_profile_derivatives(nu[i] - model.c4, sigma_t, model.gamma);
      const VoigtDerivatives v3 =
          voigt_profile_derivatives(nu[i] - model.c3, sigma_t, model.gamma);
      const double shape = (v4.value + ratio * v3.value) / v0.value;
      const double dshape_dsigma =
          (v4.d_sigma + ratio * v3.d_sigma - shape * v0.d_sigma) / v0.value;
      const double dshape_dpol = -v3.value / (pol * pol * v0.value);

      const double attn = std::exp(-d * shape);
      const double m = (offset + slope * nu[i]) * attn;
      res(long(i)) = m - y[i];
      jac(long(i), 0) = -m * shape;
      jac(long(i), 1) = -m * d * dshape_dpol;
      jac(long(i), 2) = -m * d * dshape_dsigma * dsigma_dtemp;
      jac(long(i), 3) = nu[i] * attn;
      jac(long(i), 4) = attn;
    }
  };

  Eigen::VectorXd lower(k_n_params), upper(k_n_params);
  lower << 1e-3, 0.05, 280.0, -10.0, 1e-3;
  upper << 1e3, 0.99999, 430.0, 10.0, 10.0;

  // Restarts bracket the shallow local minimum that appears at high
  // polarization, where the F=3 dip nearly vanishes.
  const SpectrumFit& g = guess;
  std::vector<Eigen::VectorXd> starts;
  starts.push_back(pack(g));
  SpectrumFit j1 = g;
  j1.optical_depth = g.optical_depth * 0.5;
  j1.polarization = std::min(g.polarization + 0.04, 0.9995);
  j1.temperature_k = g.temperature_k - 10.0;
  starts.push_back(pack(j1));
  SpectrumFit j2 = g;
  j2.optical_depth = g.optical_depth * 2.0;
  j2.polarization = std::max(g.polarization - 0.1, 0.3);
  j2.temperature_k = g.temperature_k + 10.0;
  starts.push_back(pack(j2));
  SpectrumFit j3 = g;
  j3.polarization = 0.995;
  starts.push_back(pack(j3));

  LevMarResult best;
  bool have_best = false;
  std::ostringstream attempts;
  for (const Eigen::VectorXd& start : starts) {
    LevMarResult run = levmar_fit(fill, start, lower, upper);
    attempts << " [iters=" << run.iterations << " ssr=" << run.ssr
             << (run.converged ? "" : " not-converged") << "]";
    if (run.converged && (!have_best || run.ssr < best.ssr)) {
      best = run;
      have_best = true;
    }
  }
  if (!have_best)
    throw NumericError("spectrum fit did not converge; restarts:" +
                       attempts.str());

  SpectrumFit out;
  out.optical_depth = best.params(0);
  out.polarization = best.params(1);
  out.temperature_k = best.params(2);
  out.baseline_slope_per_ghz = best.params(3);
  out.baseline_offset = best.params(4);
  out.residual_rms = std::sqrt(best.ssr / double(n));
  out.at_bound = best.at_bound;
  out.iterations = best.iterations;

  const double dof = double(n) - double(k_n_params);
  const double variance = dof > 0.0 ? best.ssr / dof : 0.0;
  Eigen::MatrixXd inv =
      best.jtj.completeOrthogonalDecomposition().pseudoInverse();
  out.covariance = variance * 0.5 * (inv + inv.transpose());
  return out;
}

FrequencyCalibration calibrate_frequency_axis(
    const std::vector<double>& sample_indices,
    const std::vector<double>& known_ghz) {
  if (sample_indices.size() != known_ghz.size())
    throw std::invalid_argument("reference arrays must have equal length");
  if (sample_indices.size() < 2)
    throw std::invalid_argument("need at least two reference peaks");

  const size_t n = sample_indices.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sx += sample_indices[i];
    sy += known_ghz[i];
    sxx += sample_indices[i] * sample_indices[i];
    sxy += sample_indices[i] * known_ghz[i];
  }
  const double det = double(n) * sxx - sx * sx;
  const double scale = std::abs(det) /
                       (double(n) * (sxx + 1.0));
  if (scale < 1e-12)
    throw NumericError("reference peaks are degenerate in sample index");

  FrequencyCalibration cal;
  cal.ghz_per_sample = (double(n) * sxy - sx * sy) / det;
  cal.offset_ghz = (sy - cal.ghz_per_sample * sx) / double(n);
  double ssr = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = known_ghz[i] - cal.apply(sample_indices[i]);
    ssr += r * r;
  }
  cal.residual_rms_ghz = std::sqrt(ssr / double(n));
  return cal;
}

}  // namespace vaporsim
