#include "vaporsim/memory.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "vaporsim/constants.hpp"
#include "vaporsim/errors.hpp"

namespace vaporsim {

namespace {

constexpr double k_tau_half = 3.0;

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

double envelope(double tau) { return std::exp(-2.0 * k_ln2 * tau * tau); }

// 1 / sqrt of the envelope intensity integral over the solver window,
// converting the physical coupling C/delta to the unit-normalized one.
double envelope_norm() {
  static const double value = [] {
    double a = 4.0 * k_ln2;
    double integral = std::sqrt(k_pi / a) * std::erf(std::sqrt(a) * k_tau_half);
    return 1.0 / std::sqrt(integral);
  }();
  return value;
}

// Collision-model propagator. The z direction is discretized on nz trapezoid
// nodes with the coupling metric absorbed into the field amplitudes, so the
// cumulative-integral matrix KA below is exactly antisymmetric and each tau
// slice factors into exactly J-unitary maps: a kernel rotation on the spin
// wave and a rank-3 coupling rotation between the slice photon modes and the
// collective spin-wave component. Composing exact group elements keeps the
// io_map symplectic to rounding on any grid; the slice width only controls
// physics accuracy (first order in 1/ntau).
struct Solver {
  int nz;
  int ntau;
  double dtau;
  VectorXd v;        // sqrt of trapezoid weights, |v| = 1
  VectorXd lam;      // KA = U diag(i lam) U+
  MatrixXcd U;
  std::vector<double> tmid;

  Solver(int nz_, int ntau_) : nz(nz_), ntau(ntau_) {
    dtau = 2.0 * k_tau_half / ntau;
    tmid.resize(ntau);
    for (int n = 0; n < ntau; ++n) tmid[n] = -k_tau_half + (n + 0.5) * dtau;

    double dz = 1.0 / (nz - 1);
    VectorXd wz = VectorXd::Constant(nz, dz);
    wz(0) = wz(nz - 1) = dz / 2.0;
    v = wz.cwiseSqrt();
    Eigen::MatrixXd ka(nz, nz);
    for (int i = 0; i < nz; ++i)
      for (int j = 0; j < nz; ++j) {
        double k = j < i ? wz(j) : (j == i ? 0.5 * wz(i) : 0.0);
        ka(i, j) = v(i) * k / v(j) - 0.5 * v(i) * v(j);
      }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(cplx(0, -1) * ka);
    lam = eig.eigenvalues();
    U = eig.eigenvectors();
  }

  struct SliceFactors {
    VectorXcd half_phase;  // kernel half-step in the KA eigenbasis
    Eigen::Matrix3cd e3;   // coupling rotation on span {s_n, d_n, v}
  };

  SliceFactors factors(int n, double cs, double ca, double s_hat,
                       double g_hat) const {
    double ft = envelope(tmid[n]);
    double f2 = ft * ft;
    double g = ft / std::sqrt(dtau);

    SliceFactors out;
    double beta = (ca * ca - cs * cs) * f2 * dtau / 2.0;
    cplx scal = std::exp(cplx(-g_hat, s_hat * f2) * (dtau / 2.0));
    out.half_phase = (cplx(0, beta) * lam.array()).exp().matrix() * scal;

    Eigen::Matrix3cd m3 = Eigen::Matrix3cd::Zero();
    m3(0, 2) = cplx(0, cs * g);
    m3(1, 2) = cplx(0, ca * g);
    m3(2, 0) = cplx(0, cs * g);
    m3(2, 1) = cplx(0, -ca * g);
    cplx mu2 = (cs * cs - ca * ca) * g * g;
    cplx mu = std::sqrt(mu2);
    double x = dtau;
    cplx sinc, vers;
    if (std::abs(mu) * x < 1e-6) {
      cplx mx2 = mu2 * x * x;
      sinc = x * (1.0 - mx2 / 6.0);
      vers = x * x / 2.0 * (1.0 - mx2 / 12.0);
    } else {
      sinc = std::sin(mu * x) / mu;
      vers = (1.0 - std::cos(mu * x)) / mu2;
    }
    out.e3 = Eigen::Matrix3cd::Identity() + sinc * m3 + vers * (m3 * m3);
    return out;
  }

  void run_pass(double cs, double ca, double s_hat, double g_hat,
                const VectorXcd& s_in, VectorXcd& s_out, VectorXcd& d_out,
                VectorXcd& b) const {
    s_out.resize(ntau);
    d_out.resize(ntau);
    VectorXcd vc = v.cast<cplx>();
    for (int n = 0; n < ntau; ++n) {
      SliceFactors sf = factors(n, cs, ca, s_hat, g_hat);
      b = U * sf.half_phase.cwiseProduct(U.adjoint() * b);
      Eigen::Vector3cd y(s_in(n), cplx(0, 0), vc.dot(b));
      Eigen::Vector3cd yp = sf.e3 * y;
      b += vc * (yp(2) - y(2));
      b = U * sf.half_phase.cwiseProduct(U.adjoint() * b);
      s_out(n) = yp(0);
      d_out(n) = yp(1);
    }
  }

  // Full two-pass map over [S_write, S_read, A+_write, A+_read, B].
  MatrixXcd compose_map(double cs, double ca, double s_hat, double g_hat,
                        double decay_amp, bool backward, bool readout) const {
    int dim = 4 * ntau + nz;
    MatrixXcd m = MatrixXcd::Identity(dim, dim);
    auto bblk = m.bottomRows(nz);
    VectorXcd vc = v.cast<cplx>();
    auto pass = [&](int s_base, int d_base) {
      for (int n = 0; n < ntau; ++n) {
        SliceFactors sf = factors(n, cs, ca, s_hat, g_hat);
        bblk = U * sf.half_phase.asDiagonal() * (U.adjoint() * bblk);
        Eigen::RowVectorXcd bv = vc.adjoint() * bblk;
        Eigen::Matrix<cplx, 3, Eigen::Dynamic> rows(3, dim);
        rows.row(0) = m.row(s_base + n);
        rows.row(1) = m.row(d_base + n);
        rows.row(2) = bv;
        rows = (sf.e3 * rows).eval();
        m.row(s_base + n) = rows.row(0);
        m.row(d_base + n) = rows.row(1);
        bblk += vc * (rows.row(2) - bv);
        bblk = U * sf.half_phase.asDiagonal() * (U.adjoint() * bblk);
      }
    };
    pass(0, 2 * ntau);
    bblk *= decay_amp;
    if (backward) bblk = bblk.colwise().reverse().eval();
    if (readout) pass(ntau, 3 * ntau);
    return m;
  }
};

double energy(const VectorXcd& x) { return x.squaredNorm(); }

VectorXcd to_vector(const std::vector<cplx>& x) {
  return Eigen::Map<const VectorXcd>(x.data(), static_cast<long>(x.size()));
}

// Linear interpolation of the slice amplitude density onto a finer midpoint
// grid, used only for the grid-doubling check.
VectorXcd resample_slices(const VectorXcd& s, int nt_old, int nt_new) {
  double dt_old = 2.0 * k_tau_half / nt_old;
  double dt_new = 2.0 * k_tau_half / nt_new;
  VectorXcd out(nt_new);
  for (int k = 0; k < nt_new; ++k) {
    double t = -k_tau_half + (k + 0.5) * dt_new;
    double pos = (t + k_tau_half) / dt_old - 0.5;
    int i = std::clamp(static_cast<int>(std::floor(pos)), 0, nt_old - 2);
    double w = std::clamp(pos - i, 0.0, 1.0);
    cplx dens = (1.0 - w) * s(i) + w * s(i + 1);
    out(k) = dens * std::sqrt(dt_new / dt_old);
  }
  return out;
}

struct InternalCouplings {
  double cs = 0.0;
  double ca = 0.0;
  double s_hat = 0.0;
  double g_hat = 0.0;
  double decay_amp = 1.0;
};

InternalCouplings internal_couplings(const CouplingConstants& coupling,
                                     const ControlPulseTrain& ctrl,
                                     const SolveOptions& opts) {
  double delta_bw = coupling.bandwidth_ghz;
  InternalCouplings ic;
  ic.cs = envelope_norm() * coupling.c_s_ghz / delta_bw;
  ic.ca = opts.fwm_on ? envelope_norm() * coupling.c_a_ghz / delta_bw : 0.0;
  if (opts.stark_on && coupling.detuning_ghz > 0.0) {
    double de = ac_stark_shift_ghz(ctrl.peak_rabi_ghz, coupling.detuning_ghz,
                                   opts.stark_cal);
    ic.s_hat = k_stark_phase * de / delta_bw;
  }
  ic.g_hat = opts.spinwave_decay_per_ns / delta_bw;
  ic.decay_amp = std::exp(-opts.spinwave_decay_per_ns *
                          ctrl.effective_readout_delay_ns());
  return ic;
}

MemoryResult solve_on_grid(const Solver& solver, const InternalCouplings& ic,
                           const VectorXcd& s_in, const SolveOptions& opts) {
  MemoryResult res;
  double e_in = energy(s_in);

  VectorXcd b = VectorXcd::Zero(solver.nz);
  VectorXcd s1, d1;
  solver.run_pass(ic.cs, ic.ca, ic.s_hat, ic.g_hat, s_in, s1, d1, b);
  if (!std::isfinite(b.squaredNorm()) || !std::isfinite(s1.squaredNorm()))
    throw NumericError("memory solve diverged during the write pass");

  res.readin_efficiency = energy(b) / e_in;
  res.transmitted_energy = energy(s1) / e_in;
  res.anti_stokes_energy = energy(d1) / e_in;

  b *= ic.decay_amp;
  if (opts.backward_retrieval) b.reverseInPlace();

  if (opts.readout) {
    VectorXcd zero = VectorXcd::Zero(solver.ntau);
    VectorXcd s2, d2;
    solver.run_pass(ic.cs, ic.ca, ic.s_hat, ic.g_hat, zero, s2, d2, b);
    if (!std::isfinite(b.squaredNorm()) || !std::isfinite(s2.squaredNorm()))
      throw NumericError("memory solve diverged during the read pass");
    res.efficiency = energy(s2) / e_in;
    res.anti_stokes_energy += energy(d2) / e_in;
    res.retrieved_waveform.assign(s2.data(), s2.data() + s2.size());
  }
  res.spinwave_remainder = energy(b) / e_in;
  return res;
}

}  // namespace

double ControlPulseTrain::pulse_duration_ns() const {
  return 1.0 / bandwidth_ghz;
}

double ControlPulseTrain::effective_readout_delay_ns() const {
  return readout_delay_ns == 0.0 ? pulse_duration_ns() : readout_delay_ns;
}

void ControlPulseTrain::validate() const {
  if (!(peak_rabi_ghz >= 0.0))
    throw std::invalid_argument("peak Rabi frequency must be >= 0");
  if (!(bandwidth_ghz > 0.0))
    throw std::invalid_argument("pulse bandwidth must be positive");
  if (readout_delay_ns != 0.0 && readout_delay_ns < pulse_duration_ns())
    throw std::invalid_argument(
        "readout delay must be at least one pulse duration");
}

CouplingConstants coupling_constants(const VaporCell& cell,
                                     const GroundPopulations& pops,
                                     const ControlPulseTrain& ctrl,
                                     double kappa_cal) {
  ctrl.validate();
  double dhf = cell.line.ground_hyperfine_splitting_ghz;
  double delta = ctrl.detuning_ghz;
  if (delta + dhf == 0.0)
    throw std::domain_error(
        "control detuning sits on the anti-Stokes pole at -Delta_hf");
  if (!(delta > 0.0))
    throw std::invalid_argument("control detuning must be blue (positive)");

  CouplingConstants out;
  out.optical_depth = resonant_optical_depth(cell, pops);
  out.bandwidth_ghz = ctrl.bandwidth_ghz;
  out.detuning_ghz = delta;
  double gamma = cell.line.natural_fwhm_ghz();
  out.c_s_ghz = kappa_cal *
                std::sqrt(out.optical_depth * gamma * ctrl.bandwidth_ghz) *
                ctrl.peak_rabi_ghz / delta;
  out.c_a_ghz = out.c_s_ghz * delta / (delta + dhf);
  return out;
}

double ac_stark_shift_ghz(double omega_ghz, double delta_ghz,
                          double stark_cal) {
  if (!(delta_ghz > 0.0))
    throw std::invalid_argument("light-shift detuning must be positive");
  return stark_cal * omega_ghz * omega_ghz / delta_ghz;
}

std::vector<cplx> control_matched_waveform(int ntau) {
  if (ntau < 16) throw std::invalid_argument("ntau must be at least 16");
  double dtau = 2.0 * k_tau_half / ntau;
  std::vector<cplx> s(ntau);
  double norm = 0.0;
  for (int n = 0; n < ntau; ++n) {
    double t = -k_tau_half + (n + 0.5) * dtau;
    double a = envelope(t) * std::sqrt(dtau);
    s[n] = a;
    norm += a * a;
  }
  norm = std::sqrt(norm);
  for (auto& a : s) a /= norm;
  return s;
}

MemoryResult solve_memory(const CouplingConstants& coupling,
                          const ControlPulseTrain& ctrl,
                          const std::vector<cplx>& signal_in,
                          const SolveOptions& opts) {
  ctrl.validate();
  if (opts.nz < 16 || opts.ntau < 16)
    throw std::invalid_argument("memory grid sizes must be at least 16");
  if (static_cast<int>(signal_in.size()) != opts.ntau)
    throw std::invalid_argument("signal waveform length must equal ntau");
  VectorXcd s_in = to_vector(signal_in);
  double e_in = energy(s_in);
  if (std::abs(e_in - 1.0) > 1e-6)
    throw std::invalid_argument(
        "signal waveform must be normalized to unit energy");

  InternalCouplings ic = internal_couplings(coupling, ctrl, opts);
  Solver solver(opts.nz, opts.ntau);
  MemoryResult res = solve_on_grid(solver, ic, s_in, opts);

  res.grid_report.nz = opts.nz;
  res.grid_report.ntau = opts.ntau;
  res.grid_report.eta = res.efficiency;
  if (opts.grid_check) {
    Solver fine(2 * opts.nz, 2 * opts.ntau);
    SolveOptions fine_opts = opts;
    fine_opts.grid_check = false;
    MemoryResult fine_res = solve_on_grid(
        fine, ic, resample_slices(s_in, opts.ntau, 2 * opts.ntau), fine_opts);
    double base = opts.readout ? res.efficiency : res.readin_efficiency;
    double fine_eta = opts.readout ? fine_res.efficiency
                                   : fine_res.readin_efficiency;
    res.grid_report.checked = true;
    res.grid_report.eta_doubled = fine_eta;
    res.grid_report.richardson = 2.0 * fine_eta - base;
    res.grid_report.converged =
        std::abs(fine_eta - base) < 0.005 * std::max(std::abs(base), 1e-12);
  }
  if (opts.want_io_map)
    res.io_map = solver.compose_map(ic.cs, ic.ca, ic.s_hat, ic.g_hat,
                                    ic.decay_amp, opts.backward_retrieval,
                                    opts.readout);
  return res;
}

double memory_efficiency(const MemoryResult& result,
                         const std::vector<cplx>& input) {
  double e_in = 0.0;
  for (const auto& a : input) e_in += std::norm(a);
  if (!(e_in > 0.0))
    throw std::invalid_argument("input waveform has zero energy");
  double e_out = 0.0;
  for (const auto& a : result.retrieved_waveform) e_out += std::norm(a);
  return e_out / e_in;
}

RabiSweepCurve sweep_rabi(const VaporCell& cell, const GroundPopulations& pops,
                          const ControlPulseTrain& ctrl_template,
                          const std::vector<double>& omega_grid_ghz,
                          const SolveOptions& opts) {
  if (omega_grid_ghz.empty())
    throw std::invalid_argument("Rabi grid must be non-empty");
  for (size_t i = 1; i < omega_grid_ghz.size(); ++i)
    if (!(omega_grid_ghz[i] > omega_grid_ghz[i - 1]))
      throw std::invalid_argument("Rabi grid must be strictly ascending");

  RabiSweepCurve curve;
  curve.detuning_ghz = ctrl_template.detuning_ghz;
  curve.temperature_k = cell.temperature_k;
  auto signal = control_matched_waveform(opts.ntau);
  for (double omega : omega_grid_ghz) {
    ControlPulseTrain ctrl = ctrl_template;
    ctrl.peak_rabi_ghz = omega;
    CouplingConstants coupling =
        coupling_constants(cell, pops, ctrl, opts.kappa_cal);
    curve.optical_depth = coupling.optical_depth;
    MemoryResult res = solve_memory(coupling, ctrl, signal, opts);
    RabiSweepRow row;
    row.omega_ghz = omega;
    row.eta = res.efficiency;
    row.eta_readin = res.readin_efficiency;
    row.anti_stokes_energy = res.anti_stokes_energy;
    row.converged = !res.grid_report.checked || res.grid_report.converged;
    curve.rows.push_back(row);
  }
  return curve;
}

std::vector<RabiSweepCurve> detuning_comparison(
    const VaporCell& cell, const GroundPopulations& pops,
    const ControlPulseTrain& ctrl_template,
    const std::vector<double>& detunings_ghz,
    const std::vector<double>& omega_grid_ghz, const SolveOptions& opts) {
  if (detunings_ghz.empty())
    throw std::invalid_argument("detuning list must be non-empty");
  std::vector<RabiSweepCurve> curves;
  for (double delta : detunings_ghz) {
    if (!(delta > 0.0))
      throw std::invalid_argument("detunings must be positive");
    ControlPulseTrain ctrl = ctrl_template;
    ctrl.detuning_ghz = delta;
    curves.push_back(sweep_rabi(cell, pops, ctrl, omega_grid_ghz, opts));
  }
  return curves;
}

double storage_lifetime_ns(double waist_um, double diffusion_cm2_per_s) {
  if (!(waist_um > 0.0)) throw std::invalid_argument("waist must be positive");
  if (!(diffusion_cm2_per_s > 0.0))
    throw std::invalid_argument("diffusion coefficient must be positive");
  double w_cm = waist_um * 1e-4;
  return w_cm * w_cm / (4.0 * diffusion_cm2_per_s) * 1e9;
}

LifetimeCurve lifetime_curve(double eta0, double waist_um,
                             double diffusion_cm2_per_s,
                             const std::vector<double>& storage_times_ns) {
  if (!(eta0 > 0.0))
    throw std::invalid_argument("reference efficiency must be positive");
  if (storage_times_ns.size() < 2)
    throw std::invalid_argument("need at least two storage times");

  LifetimeCurve out;
  out.eta0 = eta0;
  out.tau_model_ns = storage_lifetime_ns(waist_um, diffusion_cm2_per_s);
  out.storage_times_ns = storage_times_ns;
  out.eta.reserve(storage_times_ns.size());
  for (double t : storage_times_ns) {
    if (t < 0.0) throw std::invalid_argument("storage times must be >= 0");
    out.eta.push_back(eta0 * std::exp(-t / out.tau_model_ns));
  }

  double n = static_cast<double>(storage_times_ns.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < storage_times_ns.size(); ++i) {
    double x = storage_times_ns[i];
    double y = std::log(out.eta[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  out.tau_fit_ns = -1.0 / slope;
  return out;
}

double symplectic_defect(const MatrixXcd& io_map, int ntau, int nz) {
  int dim = 4 * ntau + nz;
  if (io_map.rows() != dim || io_map.cols() != dim)
    throw std::invalid_argument("io_map dimension does not match the grid");
  VectorXd j(dim);
  j.segment(0, 2 * ntau).setOnes();
  j.segment(2 * ntau, 2 * ntau).setConstant(-1.0);
  j.segment(4 * ntau, nz).setOnes();
  MatrixXcd mjm = io_map * j.asDiagonal() * io_map.adjoint();
  mjm.diagonal() -= j.cast<cplx>();
  return mjm.norm() / j.norm();
}

}  // namespace vaporsim
