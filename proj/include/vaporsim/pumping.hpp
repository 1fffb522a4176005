#pragma once

#include <cstdint>
#include <vector>

#include "vaporsim/atoms.hpp"

namespace vaporsim {

// Excited-state quenching rate by buffer-gas collisions, Gamma_Q =
// n_buffer(p, T) * sigma_Q * v_rel with the kinetic-theory mean relative
// speed. Zero for gases with no quench channel.
double quenching_rate_per_ns(const BufferGas& buffer, double temperature_k,
                             const OpticalLine& line);

// Probability q that an absorbed photon is lost to a quenching collision
// instead of being re-emitted: q = Gamma_Q / (Gamma_Q + Gamma_rad).
double quench_branching(const OpticalLine& line, double gamma_q_per_ns);

enum class TrappingMethod { Analytic, MonteCarlo };

struct TrappingModelResult {
  double multiplicity = 0.0;        // mean re-emissions per injected photon
  double escape_probability = 1.0;  // per-emission, so M = (1-p)/p holds
  TrappingMethod method = TrappingMethod::Analytic;
  double mc_stderr = 0.0;
};

// Weighted path-length quadrature over a cylinder: survival of a photon born
// at a uniform interior point with isotropic direction is represented as
// sum_b weight_b * exp(-k * length_b) for an absorption coefficient k. Built
// from a deterministic product grid over birth position and direction, then
// compressed onto logarithmic path-length bins.
struct ChordQuadrature {
  std::vector<double> weight;
  std::vector<double> length_cm;
  static ChordQuadrature build(double radius_cm, double length_cm);
};

// Radiation-trapping multiplicity from the frequency-averaged escape
// probability: a photon is emitted with the population-weighted Voigt
// spectrum of the cell and survives a flight with probability
// exp(-k(nu) * s), averaged over the chord quadrature and the emission
// profile. M = (1-q) * (1-p) / p counts re-emitted generations, each thinned
// by the radiative branching (1-q). The stored escape_probability is
// rescaled so the identity M = (1-p_esc)/p_esc holds for the result.
TrappingModelResult multiplicity_analytic(const VaporCell& cell,
                                          const GroundPopulations& pops,
                                          double q);

// Same, with the vapour density overridden (the public entry derives it from
// the cell temperature). Exposed so the zero-density limit is testable.
TrappingModelResult multiplicity_analytic_at_density(
    const VaporCell& cell, const GroundPopulations& pops, double q,
    double density_per_m3);

// Monte Carlo reference model: photons random-walk through the cylinder with
// complete frequency redistribution per scattering; each absorption either
// quenches (probability q, flight ends) or re-emits. Counts completed
// re-emission events. Deterministic for a fixed seed and independent of any
// work partitioning (one counter-based stream per photon).
TrappingModelResult multiplicity_monte_carlo(const VaporCell& cell,
                                             const GroundPopulations& pops,
                                             double q, int n_photons,
                                             std::uint64_t seed);

TrappingModelResult multiplicity_monte_carlo_at_density(
    const VaporCell& cell, const GroundPopulations& pops, double q,
    int n_photons, std::uint64_t seed, double density_per_m3);

struct PumpConfig {
  LineLabel pump_line = LineLabel::D1;
  double pump_rate_per_ns = 0.0;         // ground-state excitation rate R
  double ground_relaxation_per_ns = 1e-5;
  double branching_to_target = 0.5;      // |2> -> |1> branching
  // Thermal ground-state weights 9:7 when true, 1:1 when false.
  bool degeneracy_weighted = true;
  void validate() const;
};

struct SteadyStatePopulations {
  double n1 = 0.0;
  double n2 = 0.0;
  double n3 = 0.0;
  double polarization() const { return n1 / (n1 + n3); }
};

// Three-level steady state: pump R out of |3>, total excited decay
// Gamma_rad + Gamma_Q split by the branching ratio, trapping re-excitation
// out of |1> with per-emission capture probability a = M/(M+1), and
// symmetric ground-state relaxation toward the thermal weights. Solved as an
// exact linear system; populations sum to 1 at machine precision.
SteadyStatePopulations steady_state_populations(
    const VaporCell& cell, const PumpConfig& pump,
    const TrappingModelResult& trapping, double q);

// P = n1/(n1+n3) of the steady state.
double steady_state_polarization(const VaporCell& cell, const PumpConfig& pump,
                                 const TrappingModelResult& trapping, double q);

struct PolarizationCurve {
  std::vector<double> temperatures_k;
  std::vector<double> polarization;
  std::vector<double> multiplicity;
  std::vector<double> quench;
  BufferGas buffer;
  LineLabel pump_line = LineLabel::D1;
};

// Per temperature: density -> trapping multiplicity -> quench -> steady
// state, iterated to self-consistency because the trapping depends on the
// ground populations the steady state produces. Damped fixed point; throws
// NumericError if it fails to settle.
PolarizationCurve polarization_curve(const AtomData& data,
                                     const std::vector<double>& temperatures_k,
                                     const BufferGas& buffer,
                                     const PumpConfig& pump,
                                     double cell_length_cm = 7.5,
                                     double cell_radius_cm = 1.0);

// Self-consistent polarization at a single temperature (the curve's kernel).
double self_consistent_polarization(const VaporCell& cell,
                                    const PumpConfig& pump);

// Pump rate frozen by requiring P = 0.999 for N2 at 10 Torr on D1 at
// 343.15 K in the standard 7.5 cm x 1 cm cell.
inline constexpr double k_default_pump_rate_per_ns = 0.0093160100635422;

// Re-derives the frozen pump rate by bisection against the reference
// condition above. Used by tests to pin the constant.
double calibrate_pump_rate(const AtomData& data, double target_polarization);

}  // namespace vaporsim
