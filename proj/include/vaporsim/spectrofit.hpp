#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "vaporsim/atoms.hpp"

namespace vaporsim {

// One probe transmission scan. Frequencies are in GHz relative to the line
// centroid, matching the atoms-module spectral grid convention.
struct SpectrumTrace {
  std::vector<double> frequency_ghz;
  std::vector<double> transmission;
  double noise_sigma = 0.0;
  void validate() const;  // equal lengths >= 64, transmission >= 0
};

// Fit parameters of a scan. The optical depth is quoted at the F=4 manifold
// centroid (the peak of that absorption dip up to hyperfine substructure),
// which stays identifiable from a scan regardless of the vapour density the
// cell model would predict.
struct SpectrumFit {
  double optical_depth = 1.0;
  double polarization = 0.5625;
  double temperature_k = 343.15;
  double baseline_slope_per_ghz = 0.0;
  double baseline_offset = 1.0;
  double residual_rms = 0.0;
  Eigen::MatrixXd covariance;  // order: (d, P, T, slope, offset)
  bool at_bound = false;
  int iterations = 0;
};

// P = n1/(n1+n3). Both zero is rejected.
double polarization_from_ratio(double n1, double n3);

// Optical depth at the F=4 centroid for a physical cell, the quantity
// SpectrumFit.optical_depth estimates.
double centroid_optical_depth(const VaporCell& cell,
                              const GroundPopulations& pops);

// Forward model used by the fitter: transmission = (offset + slope nu) *
// exp(-OD(nu; d, P, T)). The cell supplies the line data, the buffer
// broadening and the geometry; its temperature field is ignored in favour of
// the parameter.
std::vector<double> model_transmission(const VaporCell& cell_template,
                                       const SpectrumFit& params,
                                       const std::vector<double>& grid_ghz);

// Scan of a physical cell: baseline times the cell transmission spectrum
// plus seeded Gaussian noise.
SpectrumTrace synthesize_scan(const VaporCell& cell,
                              const GroundPopulations& pops,
                              double baseline_slope_per_ghz,
                              double baseline_offset, double noise_sigma,
                              std::uint64_t seed,
                              const std::vector<double>& grid_ghz);

// Scan with the depth decoupled from the cell density: the forward model of
// fit_scan evaluated at the given parameters, plus seeded noise. This is the
// round-trip generator.
SpectrumTrace synthesize_scan_from_fit(const VaporCell& cell_template,
                                       const SpectrumFit& truth,
                                       double noise_sigma, std::uint64_t seed,
                                       const std::vector<double>& grid_ghz);

// Weighted least squares over (d, P, T, slope, offset) with an analytic
// Jacobian (the temperature column enters through the Doppler width) and
// four jittered restarts. Throws NumericError with the iteration trace if no
// restart converges; a parameter that ends on a box bound is flagged.
SpectrumFit fit_scan(const VaporCell& cell_template, const SpectrumTrace& trace,
                     const SpectrumFit& guess);

// Affine index -> GHz axis calibration from reference peaks.
struct FrequencyCalibration {
  double ghz_per_sample = 0.0;
  double offset_ghz = 0.0;
  double residual_rms_ghz = 0.0;
  double apply(double sample_index) const {
    return offset_ghz + ghz_per_sample * sample_index;
  }
};

FrequencyCalibration calibrate_frequency_axis(
    const std::vector<double>& sample_indices,
    const std::vector<double>& known_ghz);

}  // namespace vaporsim
