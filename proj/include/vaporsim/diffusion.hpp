#pragma once

#include <cstdint>
#include <vector>

#include "vaporsim/atoms.hpp"

namespace vaporsim {

// Time series of optical-depth perturbation images, row-major ny x nx per
// frame.
struct ImageSeries {
  int nx = 0;
  int ny = 0;
  double pixel_pitch_mm = 0.0;
  std::vector<double> timestamps_ms;
  std::vector<std::vector<double>> frames;
  void validate() const;  // nt >= 4, ascending times, positive pitch
};

struct ImageGrid {
  int nx = 64;
  int ny = 64;
  double pixel_pitch_mm = 0.2;
};

// Gaussian hole of 1/e^2 radius radius_mm, depth in optical-depth units.
struct HoleProfile {
  double depth = 0.2;
  double radius_mm = 1.5;
  double center_x_mm = 0.0;
  double center_y_mm = 0.0;
};

// One transverse spatial frequency: all FFT cells sharing a wavenumber
// magnitude, which decay identically under isotropic diffusion. amplitude
// is the root of the summed mode power per frame, so squared amplitudes
// obey Parseval against the image energy. k_perp is the angular wavenumber
// in 1/mm.
struct ModeDecay {
  double k_perp_per_mm = 0.0;
  std::vector<double> amplitude_series;
  double fitted_gamma_per_ms = 0.0;
  double fit_r2 = 0.0;
  bool log_fit = true;  // false when the direct exponential fallback ran
};

struct DiffusionFit {
  double gamma0_per_ms = 0.0;
  double d_cm2_per_s = 0.0;
  double d0_cm2_per_s = 0.0;  // (pressure/760) * D, exact arithmetic
  double pressure_torr = 0.0;
  double d_lo_cm2_per_s = 0.0;  // 95% confidence bounds on D
  double d_hi_cm2_per_s = 0.0;
};

// gamma(k) = gamma0 + D k^2 with D in cm^2/s, k in 1/mm, gamma in 1/ms:
// the unit bridge is 1 cm^2/s = 0.1 mm^2/ms.
inline constexpr double k_cm2_per_s_in_mm2_per_ms = 0.1;

inline constexpr double k_default_k_min_per_mm = 0.1;     // probe size 10 mm
inline constexpr double k_default_k_max_per_mm = 1.0 / 0.0259;  // pixel size

// Exact Fourier-domain evolution of the hole under d phi/dt = D lap phi -
// gamma0 phi, plus seeded Gaussian noise per pixel and frame. The hole must
// stay bandlimited: radius >= 2 pixel pitches.
ImageSeries synthesize_hole_series(double d_cm2_per_s, double gamma0_per_ms,
                                   const HoleProfile& hole,
                                   const ImageGrid& grid,
                                   const std::vector<double>& timestamps_ms,
                                   double noise_sigma, std::uint64_t seed);

// Per-frame 2-D FFT magnitudes grouped by equal |k|, sorted ascending.
// Returns amplitude series only; decay rates are fitted by fit_mode_decays.
std::vector<ModeDecay> transverse_fft(const ImageSeries& series);

// Exponential decay rate per mode inside [k_min, k_max]. Log-domain linear
// regression when every amplitude exceeds 3x the noise floor, otherwise a
// direct fit of sqrt(a0^2 exp(-2 gamma t) + pedestal^2) with the noise
// pedestal free (flagged via log_fit = false).
std::vector<ModeDecay> fit_mode_decays(const std::vector<ModeDecay>& modes,
                                       const std::vector<double>& times_ms,
                                       double k_min_per_mm,
                                       double k_max_per_mm,
                                       double noise_floor = 0.0);

// Weighted quadratic fit gamma(k) = gamma0 + D k^2 over the fitted modes,
// weighted by initial mode power. Confidence bounds are the 95% normal
// interval from the weighted regression covariance.
DiffusionFit fit_diffusion(const std::vector<ModeDecay>& decays,
                           double pressure_torr);

// Full pipeline per image quadrant; D and gamma0 are quadrant means and the
// confidence bounds come from the quadrant spread.
DiffusionFit quadrant_error_estimate(const ImageSeries& series,
                                     double k_min_per_mm, double k_max_per_mm,
                                     double pressure_torr,
                                     double noise_floor = 0.0);

// D(p, T) = D0 * (760/p) * (T/293.15)^{3/2}; at the 293.15 K reference this
// inverts d0_cm2_per_s = (p/760) D(p) exactly.
double buffer_diffusion_cm2_per_s(const BufferGas& buffer,
                                  double temperature_k = 293.15);

// Through-origin regression of D against 1/p across pressures, constrained
// to vanish at infinite pressure: D(p) = D0 * 760/p.
double fit_d0_through_origin(const std::vector<double>& pressures_torr,
                             const std::vector<double>& d_cm2_per_s);

}  // namespace vaporsim
