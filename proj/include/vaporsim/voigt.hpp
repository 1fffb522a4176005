#pragma once

#include <complex>

#include "vaporsim/constants.hpp"
#include "vaporsim/faddeeva.hpp"

namespace vaporsim {

// Area-normalized Voigt profile: the convolution of a Gaussian with standard
// deviation sigma and a Lorentzian with half width at half maximum gamma,
// evaluated at detuning nu from line center. Frequencies, sigma and gamma
// all share one unit (GHz here); the result carries the inverse unit.
//
// V(nu) = Re w((nu + i gamma) / (sigma sqrt(2))) / (sigma sqrt(2 pi))
//
// Zero-width limits dispatch to the pure Lorentzian and pure Gaussian so
// callers can sweep either width to zero without loss of accuracy.
inline double voigt_profile(double nu, double sigma, double gamma) {
  if (sigma < 0.0 || gamma < 0.0) {
    return 0.0;
  }
  if (sigma == 0.0 && gamma == 0.0) {
    return 0.0;
  }
  if (sigma == 0.0) {
    return gamma / (k_pi * (nu * nu + gamma * gamma));
  }
  if (gamma == 0.0) {
    const double u = nu / sigma;
    return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * k_pi));
  }
  const double s = sigma * std::sqrt(2.0);
  const std::complex<double> z(nu / s, gamma / s);
  return faddeeva(z).real() / (s * k_sqrt_pi);
}

// Partial derivatives of the Voigt profile with respect to nu, sigma and
// gamma, from dw/dz = -2 z w + 2i/sqrt(pi) and the chain rule. Used by the
// spectral fitter's analytic Jacobian. Requires sigma > 0 and gamma >= 0.
struct VoigtDerivatives {
  double value;
  double d_nu;
  double d_sigma;
  double d_gamma;
};

inline VoigtDerivatives voigt_profile_derivatives(double nu, double sigma,
                                                  double gamma) {
  const double s = sigma * std::sqrt(2.0);
  const std::complex<double> z(nu / s, gamma / s);
  const std::complex<double> w = faddeeva(z);
  const std::complex<double> dw = faddeeva_derivative(z, w);
  const double norm = 1.0 / (s * k_sqrt_pi);

  VoigtDerivatives out;
  out.value = w.real() * norm;
  // z depends on nu, gamma, sigma: dz/dnu = 1/s, dz/dgamma = i/s,
  // dz/dsigma = -z/sigma; the prefactor adds -value/sigma for sigma.
  out.d_nu = dw.real() * norm / s;
  out.d_gamma = -dw.imag() * norm / s;
  out.d_sigma =
      (-(dw * z).real() * norm - w.real() * norm) / sigma;
  return out;
}

// Conversions between the full width at half maximum of each component and
// the (sigma, gamma) parameters used above.
inline double gaussian_sigma_from_fwhm(double fwhm) {
  return fwhm / (2.0 * std::sqrt(2.0 * k_ln2));
}

inline double lorentzian_gamma_from_fwhm(double fwhm) { return 0.5 * fwhm; }

}  // namespace vaporsim
