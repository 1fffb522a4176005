#include "vaporsim/atoms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "vaporsim/constants.hpp"
#include "vaporsim/kvfile.hpp"
#include "vaporsim/voigt.hpp"

#ifndef VAPORSIM_DATA_FILE
#define VAPORSIM_DATA_FILE ""
#endif

namespace vaporsim {

namespace {

double weighted_centroid(const std::vector<HyperfineComponent>& comps) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& c : comps) {
    num += c.relative_strength * c.offset_ghz;
    den += c.relative_strength;
  }
  return num / den;
}

std::vector<HyperfineComponent> parse_components(const std::string& text,
                                                 const std::string& key) {
  std::vector<HyperfineComponent> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    auto colon = tok.find(':');
    if (colon == std::string::npos) {
      throw std::runtime_error("data key '" + key +
                               "': expected offset:strength, got '" + tok + "'");
    }
    HyperfineComponent c;
    c.offset_ghz = std::stod(tok.substr(0, colon));
    c.relative_strength = std::stod(tok.substr(colon + 1));
    out.push_back(c);
  }
  if (out.empty()) {
    throw std::runtime_error("data key '" + key + "' has no components");
  }
  return out;
}

void check_strength_sum(const std::vector<HyperfineComponent>& comps,
                        const std::string& key) {
  double sum = 0.0;
  for (const auto& c : comps) sum += c.relative_strength;
  if (std::abs(sum - 1.0) > 1e-6) {
    throw std::runtime_error("data key '" + key +
                             "': relative strengths must sum to 1");
  }
}

OpticalLine load_line(KvFile& kv, LineLabel label, double mass_amu,
                      double splitting_ghz) {
  const std::string prefix = "line." + to_string(label) + ".";
  OpticalLine line;
  line.label = label;
  line.wavelength_nm = kv.require_double(prefix + "wavelength_nm");
  line.excited_lifetime_ns = kv.require_double(prefix + "excited_lifetime_ns");
  line.excited_degeneracy_ratio =
      kv.require_double(prefix + "excited_degeneracy_ratio");
  line.ground_hyperfine_splitting_ghz = splitting_ghz;
  line.atom_mass_amu = mass_amu;
  line.components_f4 =
      parse_components(kv.require_string(prefix + "components_f4"),
                       prefix + "components_f4");
  line.components_f3 =
      parse_components(kv.require_string(prefix + "components_f3"),
                       prefix + "components_f3");
  check_strength_sum(line.components_f4, prefix + "components_f4");
  check_strength_sum(line.components_f3, prefix + "components_f3");
  line.validate();
  return line;
}

BufferGas load_buffer(KvFile& kv, BufferKind kind) {
  const std::string prefix = "buffer." + to_string(kind) + ".";
  BufferGas gas;
  gas.kind = kind;
  gas.pressure_torr = 0.0;
  gas.mass_amu = kv.require_double(prefix + "mass_amu");
  gas.broadening_mhz_per_torr =
      kv.require_double(prefix + "broadening_MHz_per_torr");
  gas.quench_cross_section_d1_a2 =
      kv.require_double(prefix + "quench_cross_section_A2_D1");
  gas.quench_cross_section_d2_a2 =
      kv.require_double(prefix + "quench_cross_section_A2_D2");
  gas.d0_cm2_per_s = kv.require_double(prefix + "diffusion_D0_cm2s");
  gas.validate();
  return gas;
}

// pi r_e c f in m^2 GHz: the frequency-integrated absorption cross section
// of the line, to be multiplied by an area-normalized profile in 1/GHz.
double integrated_cross_section_m2_ghz(const OpticalLine& line) {
  return k_pi * k_electron_radius * k_speed_of_light *
         line.oscillator_strength() * 1e-9;
}

// Column density n*L in 1/m^2.
double column_density_per_m2(const VaporCell& cell) {
  return vapor_number_density(cell.temperature_k) * cell.length_cm * 1e-2;
}

}  // namespace

std::string to_string(LineLabel label) {
  return label == LineLabel::D1 ? "D1" : "D2";
}

std::string to_string(BufferKind kind) {
  return kind == BufferKind::Ne ? "Ne" : "N2";
}

LineLabel line_label_from_string(const std::string& name) {
  if (name == "D1") return LineLabel::D1;
  if (name == "D2") return LineLabel::D2;
  throw std::invalid_argument("unknown line label: " + name);
}

BufferKind buffer_kind_from_string(const std::string& name) {
  if (name == "Ne") return BufferKind::Ne;
  if (name == "N2") return BufferKind::N2;
  throw std::invalid_argument("unknown buffer gas: " + name);
}

double OpticalLine::natural_fwhm_ghz() const {
  return 1.0 / (2.0 * k_pi * excited_lifetime_ns);
}

double OpticalLine::radiative_rate_per_ns() const {
  return 1.0 / excited_lifetime_ns;
}

double OpticalLine::oscillator_strength() const {
  const double lambda_m = wavelength_nm * 1e-9;
  const double decay_per_s = 1e9 / excited_lifetime_ns;
  const double classical =
      k_vacuum_permittivity * k_electron_mass * k_speed_of_light /
      (2.0 * k_pi * k_elementary_charge * k_elementary_charge);
  return classical * excited_degeneracy_ratio * lambda_m * lambda_m *
         decay_per_s;
}

double OpticalLine::centroid_f4_ghz() const {
  return weighted_centroid(components_f4);
}

double OpticalLine::centroid_f3_ghz() const {
  return weighted_centroid(components_f3);
}

void OpticalLine::validate() const {
  if (excited_lifetime_ns <= 0.0) {
    throw std::invalid_argument("excited lifetime must be positive");
  }
  if (wavelength_nm <= 0.0) {
    throw std::invalid_argument("wavelength must be positive");
  }
  if (atom_mass_amu <= 0.0) {
    throw std::invalid_argument("atom mass must be positive");
  }
  if (excited_degeneracy_ratio <= 0.0) {
    throw std::invalid_argument("degeneracy ratio must be positive");
  }
  if (components_f4.empty() || components_f3.empty()) {
    throw std::invalid_argument("hyperfine component lists must be non-empty");
  }
}

double BufferGas::quench_cross_section_a2(LineLabel line) const {
  return line == LineLabel::D1 ? quench_cross_section_d1_a2
                               : quench_cross_section_d2_a2;
}

void BufferGas::validate() const {
  if (pressure_torr < 0.0) {
    throw std::invalid_argument("buffer pressure must be non-negative");
  }
  if (mass_amu <= 0.0 || broadening_mhz_per_torr <= 0.0 ||
      d0_cm2_per_s <= 0.0) {
    throw std::invalid_argument("buffer gas constants must be positive");
  }
  if (quench_cross_section_d1_a2 < 0.0 || quench_cross_section_d2_a2 < 0.0) {
    throw std::invalid_argument("quench cross sections must be non-negative");
  }
}

void VaporCell::validate() const {
  line.validate();
  buffer.validate();
  if (!(temperature_k > 273.0 && temperature_k < 500.0)) {
    throw std::domain_error("cell temperature outside (273, 500) K");
  }
  if (length_cm <= 0.0 || radius_cm <= 0.0) {
    throw std::invalid_argument("cell dimensions must be positive");
  }
}

GroundPopulations GroundPopulations::thermal() {
  return GroundPopulations{9.0 / 16.0, 7.0 / 16.0};
}

GroundPopulations GroundPopulations::polarized(double p) {
  GroundPopulations pops{p, 1.0 - p};
  pops.validate();
  return pops;
}

void GroundPopulations::validate() const {
  if (n1_fraction < 0.0 || n1_fraction > 1.0 || n3_fraction < 0.0 ||
      n3_fraction > 1.0) {
    throw std::invalid_argument("population fractions must lie in [0, 1]");
  }
  if (std::abs(n1_fraction + n3_fraction - 1.0) > 1e-9) {
    throw std::invalid_argument("population fractions must sum to 1");
  }
}

AtomData AtomData::load_file(const std::string& path) {
  KvFile kv = KvFile::parse_file(path);
  const long version = kv.require_int("schema_version");
  if (version != 1) {
    throw std::runtime_error(path + ": unsupported schema_version " +
                             std::to_string(version));
  }
  AtomData data;
  data.species_name = kv.require_string("species.name");
  data.mass_amu = kv.require_double("species.mass_amu");
  data.ground_splitting_ghz =
      kv.require_double("species.ground_hyperfine_splitting_GHz");
  data.d1 = load_line(kv, LineLabel::D1, data.mass_amu, data.ground_splitting_ghz);
  data.d2 = load_line(kv, LineLabel::D2, data.mass_amu, data.ground_splitting_ghz);
  data.buffers.push_back(load_buffer(kv, BufferKind::N2));
  data.buffers.push_back(load_buffer(kv, BufferKind::Ne));
  const auto leftover = kv.unconsumed_keys();
  if (!leftover.empty()) {
    throw std::runtime_error(path + ": unknown key '" + leftover.front() + "'");
  }
  return data;
}

const OpticalLine& AtomData::line(LineLabel label) const {
  return label == LineLabel::D1 ? d1 : d2;
}

BufferGas AtomData::buffer(BufferKind kind, double pressure_torr) const {
  for (const auto& gas : buffers) {
    if (gas.kind == kind) {
      BufferGas out = gas;
      out.pressure_torr = pressure_torr;
      out.validate();
      return out;
    }
  }
  throw std::invalid_argument("buffer gas not in data file: " + to_string(kind));
}

std::string default_data_file() {
  if (const char* env = std::getenv("VAPORSIM_DATA"); env && *env) {
    return env;
  }
  const std::string compiled = VAPORSIM_DATA_FILE;
  if (!compiled.empty()) {
    return compiled;
  }
  throw std::runtime_error(
      "no data file: set VAPORSIM_DATA or pass a path explicitly");
}

double vapor_pressure_torr(double temperature_k) {
  if (!(temperature_k > 273.0 && temperature_k < 500.0)) {
    throw std::domain_error("vapour pressure correlation valid in (273, 500) K");
  }
  const double log10_p = 11.0531 - 1.35 * std::log10(temperature_k) -
                         4041.0 / temperature_k;
  return std::pow(10.0, log10_p);
}

double vapor_number_density(double temperature_k) {
  const double pressure_pa =
      vapor_pressure_torr(temperature_k) * k_torr_to_pascal;
  return pressure_pa / (k_boltzmann * temperature_k);
}

double doppler_fwhm(const OpticalLine& line, double temperature_k) {
  if (temperature_k <= 0.0) {
    throw std::domain_error("temperature must be positive");
  }
  const double mass_kg = line.atom_mass_amu * k_amu;
  const double speed =
      std::sqrt(8.0 * k_ln2 * k_boltzmann * temperature_k / mass_kg);
  return speed / (line.wavelength_nm * 1e-9) * 1e-9;
}

double pressure_broadened_fwhm(const BufferGas& buffer) {
  return buffer.broadening_mhz_per_torr * buffer.pressure_torr;
}

double lorentzian_fwhm_ghz(const VaporCell& cell) {
  return cell.line.natural_fwhm_ghz() +
         pressure_broadened_fwhm(cell.buffer) * 1e-3;
}

double absorption_coefficient_per_cm(const VaporCell& cell,
                                     const GroundPopulations& pops,
                                     double detuning_ghz) {
  const double sigma =
      gaussian_sigma_from_fwhm(doppler_fwhm(cell.line, cell.temperature_k));
  const double gamma = lorentzian_gamma_from_fwhm(lorentzian_fwhm_ghz(cell));
  const double prefactor = vapor_number_density(cell.temperature_k) * 1e-2 *
                           integrated_cross_section_m2_ghz(cell.line);
  const double c4 = cell.line.centroid_f4_ghz();
  const double c3 = cell.line.centroid_f3_ghz();
  return prefactor *
         (pops.n1_fraction * voigt_profile(detuning_ghz - c4, sigma, gamma) +
          pops.n3_fraction * voigt_profile(detuning_ghz - c3, sigma, gamma));
}

std::vector<double> optical_depth_profile(
    const VaporCell& cell, const GroundPopulations& pops,
    const std::vector<double>& detunings_ghz) {
  cell.validate();
  pops.validate();
  std::vector<double> out(detunings_ghz.size());
  for (size_t i = 0; i < detunings_ghz.size(); ++i) {
    out[i] =
        absorption_coefficient_per_cm(cell, pops, detunings_ghz[i]) *
        cell.length_cm;
  }
  return out;
}

std::vector<double> transmission_spectrum(
    const VaporCell& cell, const GroundPopulations& pops,
    const std::vector<double>& detunings_ghz) {
  if (detunings_ghz.empty()) {
    throw std::invalid_argument("detuning grid is empty");
  }
  const double lo = *std::min_element(detunings_ghz.begin(), detunings_ghz.end());
  const double hi = *std::max_element(detunings_ghz.begin(), detunings_ghz.end());
  if (lo > cell.line.centroid_f4_ghz() || hi < cell.line.centroid_f3_ghz()) {
    throw std::invalid_argument(
        "detuning grid must span both ground-state manifolds");
  }
  std::vector<double> out = optical_depth_profile(cell, pops, detunings_ghz);
  for (double& od : out) {
    od = std::exp(-od);
  }
  return out;
}

double resonant_optical_depth(const VaporCell& cell,
                              const GroundPopulations& pops) {
  cell.validate();
  pops.validate();
  const double natural_peak =
      2.0 / (k_pi * cell.line.natural_fwhm_ghz());
  return column_density_per_m2(cell) *
         integrated_cross_section_m2_ghz(cell.line) * pops.n1_fraction *
         natural_peak;
}

}  // namespace vaporsim
