#pragma once

#include <string>
#include <vector>

namespace vaporsim {

enum class LineLabel { D1, D2 };
enum class BufferKind { Ne, N2 };

std::string to_string(LineLabel label);
std::string to_string(BufferKind kind);
LineLabel line_label_from_string(const std::string& name);
BufferKind buffer_kind_from_string(const std::string& name);

struct HyperfineComponent {
  double offset_ghz;
  double relative_strength;
};

// One D line of the alkali atom. Detunings are measured from the midpoint
// of the two ground-manifold absorption centroids, so the F=4 manifold sits
// at negative offsets and F=3 at positive ones. All frequencies ordinary
// (not angular); the natural linewidth is 1/(2 pi lifetime).
struct OpticalLine {
  LineLabel label = LineLabel::D2;
  double wavelength_nm = 0.0;
  double excited_lifetime_ns = 0.0;
  double ground_hyperfine_splitting_ghz = 0.0;
  double atom_mass_amu = 0.0;
  // (2J'+1)/(2J+1) of the transition, fixing the absorption oscillator
  // strength relative to the radiative decay rate.
  double excited_degeneracy_ratio = 0.0;
  std::vector<HyperfineComponent> components_f4;
  std::vector<HyperfineComponent> components_f3;

  double natural_fwhm_ghz() const;
  double radiative_rate_per_ns() const;
  double oscillator_strength() const;
  double centroid_f4_ghz() const;
  double centroid_f3_ghz() const;
  void validate() const;
};

struct BufferGas {
  BufferKind kind = BufferKind::N2;
  double pressure_torr = 0.0;
  double mass_amu = 0.0;
  double broadening_mhz_per_torr = 0.0;
  double quench_cross_section_d1_a2 = 0.0;
  double quench_cross_section_d2_a2 = 0.0;
  double d0_cm2_per_s = 0.0;

  double quench_cross_section_a2(LineLabel line) const;
  void validate() const;
};

struct VaporCell {
  OpticalLine line;
  BufferGas buffer;
  double temperature_k = 0.0;
  double length_cm = 0.0;
  double radius_cm = 0.0;
  void validate() const;
};

struct GroundPopulations {
  double n1_fraction = 0.0;  // F=4, the pumping target state
  double n3_fraction = 0.0;  // F=3

  static GroundPopulations thermal();
  static GroundPopulations polarized(double p);
  void validate() const;
};

// Atomic and buffer-gas constants loaded from the versioned key-value data
// file (see data/cesium.cfg for the schema).
struct AtomData {
  std::string species_name;
  double mass_amu = 0.0;
  double ground_splitting_ghz = 0.0;
  OpticalLine d1;
  OpticalLine d2;
  std::vector<BufferGas> buffers;

  static AtomData load_file(const std::string& path);
  const OpticalLine& line(LineLabel label) const;
  BufferGas buffer(BufferKind kind, double pressure_torr) const;
};

// Resolves the data file path: $VAPORSIM_DATA if set, else the compiled-in
// location. Throws std::runtime_error if neither resolves.
std::string default_data_file();

// Saturated-vapour pressure of Cs over the liquid, Taylor-Langmuir form
// log10(P/Torr) = 11.0531 - 1.35 log10(T) - 4041/T, and the ideal-gas
// number density derived from it. Valid inside (273, 500) K; outside that
// window both throw std::domain_error.
double vapor_pressure_torr(double temperature_k);
double vapor_number_density(double temperature_k);  // per m^3

double doppler_fwhm(const OpticalLine& line, double temperature_k);  // GHz
double pressure_broadened_fwhm(const BufferGas& buffer);             // MHz

// Total Lorentzian FWHM of the cell's line: natural plus pressure.
double lorentzian_fwhm_ghz(const VaporCell& cell);

// Absorption coefficient per cm at a detuning from the line's frequency
// origin. Each ground manifold contributes one area-normalized Voigt at its
// strength-weighted centroid, weighted by its population fraction.
double absorption_coefficient_per_cm(const VaporCell& cell,
                                     const GroundPopulations& pops,
                                     double detuning_ghz);

std::vector<double> optical_depth_profile(const VaporCell& cell,
                                          const GroundPopulations& pops,
                                          const std::vector<double>& detunings_ghz);

// T(nu) = exp(-OD(nu)). The grid must be non-empty and span both ground
// manifolds; violations throw std::invalid_argument.
std::vector<double> transmission_spectrum(const VaporCell& cell,
                                          const GroundPopulations& pops,
                                          const std::vector<double>& detunings_ghz);

// Resonant optical depth of the pumped |1>-manifold transition: the peak
// single-pass intensity OD a stationary column would present at exact
// resonance, i.e. the column density times the natural-linewidth-peak cross
// section pi r_e c f * 2/(pi gamma_nat). The Doppler-broadened profile peak
// is lower by roughly gamma_nat/doppler_fwhm; this definition matches the
// Raman-coupling convention and is the calibration used throughout.
double resonant_optical_depth(const VaporCell& cell,
                              const GroundPopulations& pops);

}  // namespace vaporsim
