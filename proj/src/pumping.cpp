#include "vaporsim/pumping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "vaporsim/constants.hpp"
#include "vaporsim/errors.hpp"
#include "vaporsim/rng.hpp"
#include "vaporsim/voigt.hpp"

namespace vaporsim {

namespace {

// Population-weighted two-manifold Voigt mixture and the absorption
// coefficient it induces at a given vapour density.
struct MixProfile {
  double sigma = 0.0;
  double gamma = 0.0;  // Lorentzian HWHM
  double c4 = 0.0;
  double c3 = 0.0;
  double p1 = 0.0;
  double p3 = 0.0;
  double prefactor_per_cm = 0.0;  // density * integrated cross section

  static MixProfile make(const VaporCell& cell, const GroundPopulations& pops,
                         double density_per_m3) {
    MixProfile m;
    m.sigma = gaussian_sigma_from_fwhm(
        doppler_fwhm(cell.line, cell.temperature_k));
    m.gamma = lorentzian_gamma_from_fwhm(lorentzian_fwhm_ghz(cell));
    m.c4 = cell.line.centroid_f4_ghz();
    m.c3 = cell.line.centroid_f3_ghz();
    m.p1 = pops.n1_fraction;
    m.p3 = pops.n3_fraction;
    m.prefactor_per_cm = density_per_m3 * 1e-2 * k_pi * k_electron_radius *
                         k_speed_of_light *
                         cell.line.oscillator_strength() * 1e-9;
    return m;
  }

  // Area-normalized emission/absorption profile, 1/GHz.
  double mix(double nu) const {
    return p1 * voigt_profile(nu - c4, sigma, gamma) +
           p3 * voigt_profile(nu - c3, sigma, gamma);
  }

  double k_per_cm(double nu) const { return prefactor_per_cm * mix(nu); }
};

void check_quench_fraction(double q) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("quench fraction must lie in [0, 1]");
  }
}

// Distance from an interior point to the cylinder wall along a unit
// direction. Cylinder axis z in [0, length], radius about the origin.
double wall_distance(double x, double y, double z, double dx, double dy,
                     double dz, double radius, double length) {
  double t_side = std::numeric_limits<double>::infinity();
  const double a = dx * dx + dy * dy;
  if (a > 1e-300) {
    const double b = x * dx + y * dy;
    const double c = x * x + y * y - radius * radius;
    const double disc = b * b - a * c;
    t_side = (-b + std::sqrt(std::max(disc, 0.0))) / a;
  }
  double t_cap = std::numeric_limits<double>::infinity();
  if (dz > 1e-300) {
    t_cap = (length - z) / dz;
  } else if (dz < -1e-300) {
    t_cap = -z / dz;
  }
  return std::min(t_side, t_cap);
}

}  // namespace

double quenching_rate_per_ns(const BufferGas& buffer, double temperature_k,
                             const OpticalLine& line) {
  buffer.validate();
  if (temperature_k <= 0.0) {
    throw std::domain_error("temperature must be positive");
  }
  const double sigma_m2 = buffer.quench_cross_section_a2(line.label) * 1e-20;
  if (sigma_m2 == 0.0) return 0.0;
  const double n_buffer = buffer.pressure_torr * k_torr_to_pascal /
                          (k_boltzmann * temperature_k);
  const double mu_kg = line.atom_mass_amu * buffer.mass_amu /
                       (line.atom_mass_amu + buffer.mass_amu) * k_amu;
  const double v_rel =
      std::sqrt(8.0 * k_boltzmann * temperature_k / (k_pi * mu_kg));
  return n_buffer * sigma_m2 * v_rel * 1e-9;
}

double quench_branching(const OpticalLine& line, double gamma_q_per_ns) {
  if (gamma_q_per_ns < 0.0) {
    throw std::invalid_argument("quenching rate must be non-negative");
  }
  return gamma_q_per_ns / (gamma_q_per_ns + line.radiative_rate_per_ns());
}

ChordQuadrature ChordQuadrature::build(double radius_cm, double length_cm) {
  if (radius_cm <= 0.0 || length_cm <= 0.0) {
    throw std::invalid_argument("cylinder dimensions must be positive");
  }
  constexpr int nr = 16, nz = 16, nct = 24, nph = 16;
  // Midpoint grids; z and cos(theta) restricted to half ranges by the
  // reflection symmetry of the chord-length distribution.
  const double w0 = 1.0 / (double(nr) * nz * nct * nph);
  const double s_max = std::sqrt(length_cm * length_cm +
                                 4.0 * radius_cm * radius_cm);
  constexpr int nbin = 96;
  const double s_floor = 1e-4 * s_max;
  const double log_lo = std::log(s_floor);
  const double log_hi = std::log(s_max * (1.0 + 1e-12));
  std::vector<double> bin_w(nbin + 1, 0.0), bin_ws(nbin + 1, 0.0);
  for (int ir = 0; ir < nr; ++ir) {
    const double r = radius_cm * std::sqrt((ir + 0.5) / nr);
    for (int iz = 0; iz < nz; ++iz) {
      const double z = length_cm * (iz + 0.5) / nz;
      for (int ic = 0; ic < nct; ++ic) {
        const double ct = (ic + 0.5) / nct;
        const double st = std::sqrt(1.0 - ct * ct);
        for (int ip = 0; ip < nph; ++ip) {
          const double phi = k_pi * (ip + 0.5) / nph;
          const double s =
              wall_distance(r, 0.0, z, st * std::cos(phi), st * std::sin(phi),
                            ct, radius_cm, length_cm);
          int b;
          if (s <= s_floor) {
            b = 0;
          } else {
            b = 1 + int((nbin - 1) * (std::log(s) - log_lo) /
                        (log_hi - log_lo));
            b = std::clamp(b, 1, nbin);
          }
          bin_w[b] += w0;
          bin_ws[b] += w0 * s;
        }
      }
    }
  }
  ChordQuadrature out;
  for (int b = 0; b <= nbin; ++b) {
    if (bin_w[b] > 0.0) {
      out.weight.push_back(bin_w[b]);
      out.length_cm.push_back(bin_ws[b] / bin_w[b]);
    }
  }
  return out;
}

namespace {

TrappingModelResult analytic_result_from_escape(double p_escape, double q) {
  if (!(p_escape > 0.0)) {
    throw NumericError("photon escape probability underflowed to zero");
  }
  p_escape = std::min(p_escape, 1.0);
  TrappingModelResult res;
  res.method = TrappingMethod::Analytic;
  res.multiplicity = (1.0 - q) * (1.0 - p_escape) / p_escape;
  res.escape_probability = 1.0 / (1.0 + res.multiplicity);
  return res;
}

}  // namespace

TrappingModelResult multiplicity_analytic_at_density(
    const VaporCell& cell, const GroundPopulations& pops, double q,
    double density_per_m3) {
  cell.validate();
  pops.validate();
  check_quench_fraction(q);
  if (density_per_m3 < 0.0) {
    throw std::invalid_argument("density must be non-negative");
  }
  const MixProfile prof = MixProfile::make(cell, pops, density_per_m3);
  const ChordQuadrature chords =
      ChordQuadrature::build(cell.radius_cm, cell.length_cm);

  constexpr double window_ghz = 60.0;
  constexpr int n_grid = 16001;
  const double lo = prof.c4 - window_ghz;
  const double hi = prof.c3 + window_ghz;
  const double step = (hi - lo) / (n_grid - 1);
  double p_window = 0.0;
  double norm_window = 0.0;
  for (int i = 0; i < n_grid; ++i) {
    const double nu = lo + step * i;
    const double mix = prof.mix(nu);
    const double k = prof.prefactor_per_cm * mix;
    double esc = 0.0;
    for (size_t b = 0; b < chords.weight.size(); ++b) {
      esc += chords.weight[b] * std::exp(-k * chords.length_cm[b]);
    }
    const double w_trap = (i == 0 || i == n_grid - 1) ? 0.5 : 1.0;
    p_window += w_trap * mix * esc;
    norm_window += w_trap * mix;
  }
  p_window *= step;
  norm_window *= step;
  // Mass outside the window sits in far Lorentzian wings where the vapour is
  // transparent; count it as escaping.
  const double p_escape = p_window + std::max(0.0, 1.0 - norm_window);
  return analytic_result_from_escape(p_escape, q);
}

TrappingModelResult multiplicity_analytic(const VaporCell& cell,
                                          const GroundPopulations& pops,
                                          double q) {
  return multiplicity_analytic_at_density(
      cell, pops, q, vapor_number_density(cell.temperature_k));
}

TrappingModelResult multiplicity_monte_carlo_at_density(
    const VaporCell& cell, const GroundPopulations& pops, double q,
    int n_photons, std::uint64_t seed, double density_per_m3) {
  cell.validate();
  pops.validate();
  check_quench_fraction(q);
  if (n_photons < 1000) {
    throw std::invalid_argument("Monte Carlo needs at least 1000 photons");
  }
  const MixProfile prof = MixProfile::make(cell, pops, density_per_m3);
  const double R = cell.radius_cm;
  const double L = cell.length_cm;
  constexpr long event_cap = 1000000;

  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n_photons; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    const double r0 = R * std::sqrt(rng.uniform());
    const double a0 = 2.0 * k_pi * rng.uniform();
    double x = r0 * std::cos(a0);
    double y = r0 * std::sin(a0);
    double z = L * rng.uniform();
    long emissions = 0;
    for (;;) {
      if (emissions > event_cap) {
        throw NumericError(
            "Monte Carlo photon exceeded the scattering cap; the vapour is "
            "effectively opaque at these conditions");
      }
      const double center = rng.uniform() < prof.p1 ? prof.c4 : prof.c3;
      const double nu =
          center + prof.sigma * rng.normal() + prof.gamma * rng.cauchy();
      const double k = prof.k_per_cm(nu);
      const double ct = 2.0 * rng.uniform() - 1.0;
      const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
      const double ph = 2.0 * k_pi * rng.uniform();
      const double dx = st * std::cos(ph), dy = st * std::sin(ph), dz = ct;
      if (k < 1e-30) break;
      const double t_wall = wall_distance(x, y, z, dx, dy, dz, R, L);
      const double flight = rng.exponential() / k;
      if (flight >= t_wall) break;
      x += flight * dx;
      y += flight * dy;
      z += flight * dz;
      if (rng.uniform() < q) break;  // quenched, no re-emission
      ++emissions;
    }
    sum += double(emissions);
    sum_sq += double(emissions) * double(emissions);
  }
  const double mean = sum / n_photons;
  const double var =
      std::max(0.0, (sum_sq - sum * sum / n_photons) / (n_photons - 1));
  TrappingModelResult res;
  res.method = TrappingMethod::MonteCarlo;
  res.multiplicity = mean;
  res.escape_probability = 1.0 / (1.0 + mean);
  res.mc_stderr = std::sqrt(var / n_photons);
  return res;
}

TrappingModelResult multiplicity_monte_carlo(const VaporCell& cell,
                                             const GroundPopulations& pops,
                                             double q, int n_photons,
                                             std::uint64_t seed) {
  return multiplicity_monte_carlo_at_density(
      cell, pops, q, n_photons, seed,
      vapor_number_density(cell.temperature_k));
}

void PumpConfig::validate() const {
  if (pump_rate_per_ns < 0.0 || ground_relaxation_per_ns < 0.0) {
    throw std::invalid_argument("pump rates must be non-negative");
  }
  if (branching_to_target < 0.0 || branching_to_target > 1.0) {
    throw std::invalid_argument("branching ratio must lie in [0, 1]");
  }
}

SteadyStatePopulations steady_state_populations(
    const VaporCell& cell, const PumpConfig& pump,
    const TrappingModelResult& trapping, double q) {
  pump.validate();
  check_quench_fraction(q);
  if (trapping.multiplicity < 0.0) {
    throw std::invalid_argument("multiplicity must be non-negative");
  }
  const double gamma_r = cell.line.radiative_rate_per_ns();
  const double a = trapping.multiplicity / (trapping.multiplicity + 1.0);
  const double beta = pump.branching_to_target;
  const double rate = pump.pump_rate_per_ns;
  const double gg = pump.ground_relaxation_per_ns;
  const double w1 = pump.degeneracy_weighted ? 9.0 / 16.0 : 0.5;

  // Unknowns (n1, phi2, n3) with phi2 = Gamma_total * n2 the excited-state
  // throughput, which stays finite even in the fully quenched limit:
  //   pump balance:    R n3 + (a beta (1-q) - 1) phi2 = 0
  //   target balance:  beta (1 - a(1-q)) phi2 + gg (w1 (n1+n3) - n1) = 0
  //   normalization:   n1 + (1-q)/Gamma_rad phi2 + n3 = 1
  const double m[3][3] = {
      {0.0, a * beta * (1.0 - q) - 1.0, rate},
      {gg * (w1 - 1.0), beta * (1.0 - a * (1.0 - q)), gg * w1},
      {1.0, (1.0 - q) / gamma_r, 1.0},
  };
  const double rhs[3] = {0.0, 0.0, 1.0};
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  if (!(std::abs(det) > 1e-300)) {
    throw NumericError("steady-state rate equations are singular");
  }
  auto solve_col = [&](int col) {
    double a2[3][3];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) a2[i][j] = m[i][j];
      a2[i][col] = rhs[i];
    }
    const double d = a2[0][0] * (a2[1][1] * a2[2][2] - a2[1][2] * a2[2][1]) -
                     a2[0][1] * (a2[1][0] * a2[2][2] - a2[1][2] * a2[2][0]) +
                     a2[0][2] * (a2[1][0] * a2[2][1] - a2[1][1] * a2[2][0]);
    return d / det;
  };
  const double n1 = solve_col(0);
  const double phi2 = solve_col(1);
  const double n3 = solve_col(2);
  SteadyStatePopulations out;
  out.n1 = n1;
  out.n2 = phi2 * (1.0 - q) / gamma_r;
  out.n3 = n3;
  if (!(std::isfinite(out.n1) && std::isfinite(out.n2) &&
        std::isfinite(out.n3))) {
    throw NumericError("steady-state solve produced non-finite populations");
  }
  return out;
}

double steady_state_polarization(const VaporCell& cell, const PumpConfig& pump,
                                 const TrappingModelResult& trapping,
                                 double q) {
  return steady_state_populations(cell, pump, trapping, q).polarization();
}

double self_consistent_polarization(const VaporCell& cell,
                                    const PumpConfig& pump) {
  const double gamma_q =
      quenching_rate_per_ns(cell.buffer, cell.temperature_k, cell.line);
  const double q = quench_branching(cell.line, gamma_q);
  double p = 0.9;
  for (int iter = 0; iter < 300; ++iter) {
    const auto trapping =
        multiplicity_analytic(cell, GroundPopulations::polarized(p), q);
    const double p_new = steady_state_polarization(cell, pump, trapping, q);
    const double next = p + 0.5 * (p_new - p);
    if (std::abs(next - p) < 1e-12) {
      return next;
    }
    p = next;
  }
  std::ostringstream msg;
  msg << "polarization fixed point did not converge at T = "
      << cell.temperature_k << " K";
  throw NumericError(msg.str());
}

PolarizationCurve polarization_curve(const AtomData& data,
                                     const std::vector<double>& temperatures_k,
                                     const BufferGas& buffer,
                                     const PumpConfig& pump,
                                     double cell_length_cm,
                                     double cell_radius_cm) {
  if (temperatures_k.empty()) {
    throw std::invalid_argument("temperature grid is empty");
  }
  for (size_t i = 1; i < temperatures_k.size(); ++i) {
    if (temperatures_k[i] <= temperatures_k[i - 1]) {
      throw std::invalid_argument("temperature grid must be ascending");
    }
  }
  PolarizationCurve curve;
  curve.buffer = buffer;
  curve.pump_line = pump.pump_line;
  for (const double t : temperatures_k) {
    VaporCell cell{data.line(pump.pump_line), buffer, t, cell_length_cm,
                   cell_radius_cm};
    const double gamma_q = quenching_rate_per_ns(buffer, t, cell.line);
    const double q = quench_branching(cell.line, gamma_q);
    const double p = self_consistent_polarization(cell, pump);
    const auto trapping =
        multiplicity_analytic(cell, GroundPopulations::polarized(p), q);
    curve.temperatures_k.push_back(t);
    curve.polarization.push_back(p);
    curve.multiplicity.push_back(trapping.multiplicity);
    curve.quench.push_back(q);
  }
  return curve;
}

double calibrate_pump_rate(const AtomData& data, double target_polarization) {
  if (!(target_polarization > 0.5 && target_polarization < 1.0)) {
    throw std::invalid_argument("target polarization must lie in (0.5, 1)");
  }
  const VaporCell cell{data.line(LineLabel::D1),
                       data.buffer(BufferKind::N2, 10.0), 343.15, 7.5, 1.0};
  PumpConfig pump;
  pump.pump_line = LineLabel::D1;
  auto residual = [&](double rate) {
    pump.pump_rate_per_ns = rate;
    return self_consistent_polarization(cell, pump) - target_polarization;
  };
  double lo = 1e-5, hi = 1.0;
  if (residual(lo) > 0.0 || residual(hi) < 0.0) {
    throw NumericError("pump-rate calibration target is out of bracket");
  }
  for (int i = 0; i < 64; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (residual(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if ((hi - lo) / mid < 1e-13) break;
  }
  return std::sqrt(lo * hi);
}

}  // namespace vaporsim
