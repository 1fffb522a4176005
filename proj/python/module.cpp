#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vaporsim/atoms.hpp"
#include "vaporsim/diffusion.hpp"
#include "vaporsim/memory.hpp"
#include "vaporsim/pumping.hpp"
#include "vaporsim/spectrofit.hpp"

namespace py = pybind11;
using namespace vaporsim;

PYBIND11_MODULE(_core, m) {
  m.doc() = "vapour-cell memory simulation and analysis core";

  py::enum_<LineLabel>(m, "LineLabel")
      .value("D1", LineLabel::D1)
      .value("D2", LineLabel::D2);
  py::enum_<BufferKind>(m, "BufferKind")
      .value("Ne", BufferKind::Ne)
      .value("N2", BufferKind::N2);

  py::class_<OpticalLine>(m, "OpticalLine")
      .def_readonly("label", &OpticalLine::label)
      .def_readonly("wavelength_nm", &OpticalLine::wavelength_nm)
      .def_readonly("excited_lifetime_ns", &OpticalLine::excited_lifetime_ns)
      .def("radiative_rate_per_ns", &OpticalLine::radiative_rate_per_ns)
      .def("centroid_f4_ghz", &OpticalLine::centroid_f4_ghz)
      .def("centroid_f3_ghz", &OpticalLine::centroid_f3_ghz);

  py::class_<BufferGas>(m, "BufferGas")
      .def_readonly("kind", &BufferGas::kind)
      .def_readonly("pressure_torr", &BufferGas::pressure_torr)
      .def_readonly("d0_cm2_per_s", &BufferGas::d0_cm2_per_s);

  py::class_<GroundPopulations>(m, "GroundPopulations")
      .def_static("thermal", &GroundPopulations::thermal)
      .def_static("polarized", &GroundPopulations::polarized, py::arg("p"))
      .def_readwrite("n1_fraction", &GroundPopulations::n1_fraction)
      .def_readwrite("n3_fraction", &GroundPopulations::n3_fraction);

  py::class_<VaporCell>(m, "VaporCell")
      .def(py::init<>())
      .def_readwrite("line", &VaporCell::line)
      .def_readwrite("buffer", &VaporCell::buffer)
      .def_readwrite("temperature_k", &VaporCell::temperature_k)
      .def_readwrite("length_cm", &VaporCell::length_cm)
      .def_readwrite("radius_cm", &VaporCell::radius_cm);

  py::class_<AtomData>(m, "AtomData")
      .def_static("load_file", &AtomData::load_file, py::arg("path"))
      .def("line", &AtomData::line, py::arg("label"))
      .def("buffer", &AtomData::buffer, py::arg("kind"),
           py::arg("pressure_torr"));

  m.def("default_data_file", &default_data_file);
  m.def("transmission_spectrum", &transmission_spectrum, py::arg("cell"),
        py::arg("pops"), py::arg("detunings_ghz"));

  py::class_<TrappingModelResult>(m, "TrappingModelResult")
      .def_readonly("multiplicity", &TrappingModelResult::multiplicity)
      .def_readonly("escape_probability",
                    &TrappingModelResult::escape_probability)
      .def_readonly("mc_stderr", &TrappingModelResult::mc_stderr);

  m.def("multiplicity_analytic", &multiplicity_analytic, py::arg("cell"),
        py::arg("pops"), py::arg("q"));
  m.def("multiplicity_monte_carlo", &multiplicity_monte_carlo,
        py::arg("cell"), py::arg("pops"), py::arg("q"), py::arg("n_photons"),
        py::arg("seed"));

  py::class_<PumpConfig>(m, "PumpConfig")
      .def(py::init<>())
      .def_readwrite("pump_line", &PumpConfig::pump_line)
      .def_readwrite("pump_rate_per_ns", &PumpConfig::pump_rate_per_ns)
      .def_readwrite("ground_relaxation_per_ns",
                     &PumpConfig::ground_relaxation_per_ns)
      .def_readwrite("branching_to_target", &PumpConfig::branching_to_target)
      .def_readwrite("degeneracy_weighted", &PumpConfig::degeneracy_weighted);

  py::class_<PolarizationCurve>(m, "PolarizationCurve")
      .def_readonly("temperatures_k", &PolarizationCurve::temperatures_k)
      .def_readonly("polarization", &PolarizationCurve::polarization)
      .def_readonly("multiplicity", &PolarizationCurve::multiplicity)
      .def_readonly("quench", &PolarizationCurve::quench);

  m.def("polarization_curve", &polarization_curve, py::arg("data"),
        py::arg("temperatures_k"), py::arg("buffer"), py::arg("pump"),
        py::arg("cell_length_cm") = 7.5, py::arg("cell_radius_cm") = 1.0);
  m.def("self_consistent_polarization", &self_consistent_polarization,
        py::arg("cell"), py::arg("pump"));
  m.attr("k_default_pump_rate_per_ns") = k_default_pump_rate_per_ns;

  py::class_<ControlPulseTrain>(m, "ControlPulseTrain")
      .def(py::init<>())
      .def_readwrite("peak_rabi_ghz", &ControlPulseTrain::peak_rabi_ghz)
      .def_readwrite("bandwidth_ghz", &ControlPulseTrain::bandwidth_ghz)
      .def_readwrite("detuning_ghz", &ControlPulseTrain::detuning_ghz)
      .def_readwrite("readout_delay_ns", &ControlPulseTrain::readout_delay_ns);

  py::class_<SolveOptions>(m, "SolveOptions")
      .def(py::init<>())
      .def_readwrite("fwm_on", &SolveOptions::fwm_on)
      .def_readwrite("stark_on", &SolveOptions::stark_on)
      .def_readwrite("kappa_cal", &SolveOptions::kappa_cal)
      .def_readwrite("stark_cal", &SolveOptions::stark_cal)
      .def_readwrite("spinwave_decay_per_ns",
                     &SolveOptions::spinwave_decay_per_ns)
      .def_readwrite("nz", &SolveOptions::nz)
      .def_readwrite("ntau", &SolveOptions::ntau)
      .def_readwrite("backward_retrieval", &SolveOptions::backward_retrieval)
      .def_readwrite("grid_check", &SolveOptions::grid_check);

  py::class_<RabiSweepRow>(m, "RabiSweepRow")
      .def_readonly("omega_ghz", &RabiSweepRow::omega_ghz)
      .def_readonly("eta", &RabiSweepRow::eta)
      .def_readonly("eta_readin", &RabiSweepRow::eta_readin)
      .def_readonly("anti_stokes_energy", &RabiSweepRow::anti_stokes_energy)
      .def_readonly("converged", &RabiSweepRow::converged);

  py::class_<RabiSweepCurve>(m, "RabiSweepCurve")
      .def_readonly("detuning_ghz", &RabiSweepCurve::detuning_ghz)
      .def_readonly("temperature_k", &RabiSweepCurve::temperature_k)
      .def_readonly("optical_depth", &RabiSweepCurve::optical_depth)
      .def_readonly("rows", &RabiSweepCurve::rows);

  m.def("sweep_rabi", &sweep_rabi, py::arg("cell"), py::arg("pops"),
        py::arg("ctrl"), py::arg("omega_grid_ghz"),
        py::arg("opts") = SolveOptions{});
  m.def("detuning_comparison", &detuning_comparison, py::arg("cell"),
        py::arg("pops"), py::arg("ctrl"), py::arg("detunings_ghz"),
        py::arg("omega_grid_ghz"), py::arg("opts") = SolveOptions{});
  m.def("storage_lifetime_ns", &storage_lifetime_ns, py::arg("waist_um"),
        py::arg("d_cm2_per_s"));

  py::class_<SpectrumTrace>(m, "SpectrumTrace")
      .def(py::init<>())
      .def_readwrite("frequency_ghz", &SpectrumTrace::frequency_ghz)
      .def_readwrite("transmission", &SpectrumTrace::transmission)
      .def_readwrite("noise_sigma", &SpectrumTrace::noise_sigma);

  py::class_<SpectrumFit>(m, "SpectrumFit")
      .def(py::init<>())
      .def_readwrite("optical_depth", &SpectrumFit::optical_depth)
      .def_readwrite("polarization", &SpectrumFit::polarization)
      .def_readwrite("temperature_k", &SpectrumFit::temperature_k)
      .def_readwrite("baseline_slope_per_ghz",
                     &SpectrumFit::baseline_slope_per_ghz)
      .def_readwrite("baseline_offset", &SpectrumFit::baseline_offset)
      .def_readonly("residual_rms", &SpectrumFit::residual_rms)
      .def_readonly("covariance", &SpectrumFit::covariance)
      .def_readonly("at_bound", &SpectrumFit::at_bound)
      .def_readonly("iterations", &SpectrumFit::iterations);

  m.def("polarization_from_ratio", &polarization_from_ratio, py::arg("n1"),
        py::arg("n3"));
  m.def("centroid_optical_depth", &centroid_optical_depth, py::arg("cell"),
        py::arg("pops"));
  m.def("model_transmission", &model_transmission, py::arg("cell_template"),
        py::arg("params"), py::arg("grid_ghz"));
  m.def("synthesize_scan", &synthesize_scan, py::arg("cell"), py::arg("pops"),
        py::arg("baseline_slope_per_ghz"), py::arg("baseline_offset"),
        py::arg("noise_sigma"), py::arg("seed"), py::arg("grid_ghz"));
  m.def("synthesize_scan_from_fit", &synthesize_scan_from_fit,
        py::arg("cell_template"), py::arg("truth"), py::arg("noise_sigma"),
        py::arg("seed"), py::arg("grid_ghz"));
  m.def("fit_scan", &fit_scan, py::arg("cell_template"), py::arg("trace"),
        py::arg("guess"));

  py::class_<ImageSeries>(m, "ImageSeries")
      .def(py::init<>())
      .def_readwrite("nx", &ImageSeries::nx)
      .def_readwrite("ny", &ImageSeries::ny)
      .def_readwrite("pixel_pitch_mm", &ImageSeries::pixel_pitch_mm)
      .def_readwrite("timestamps_ms", &ImageSeries::timestamps_ms)
      .def_readwrite("frames", &ImageSeries::frames);

  py::class_<ImageGrid>(m, "ImageGrid")
      .def(py::init<>())
      .def_readwrite("nx", &ImageGrid::nx)
      .def_readwrite("ny", &ImageGrid::ny)
      .def_readwrite("pixel_pitch_mm", &ImageGrid::pixel_pitch_mm);

  py::class_<HoleProfile>(m, "HoleProfile")
      .def(py::init<>())
      .def_readwrite("depth", &HoleProfile::depth)
      .def_readwrite("radius_mm", &HoleProfile::radius_mm)
      .def_readwrite("center_x_mm", &HoleProfile::center_x_mm)
      .def_readwrite("center_y_mm", &HoleProfile::center_y_mm);

  py::class_<ModeDecay>(m, "ModeDecay")
      .def_readonly("k_perp_per_mm", &ModeDecay::k_perp_per_mm)
      .def_readonly("amplitude_series", &ModeDecay::amplitude_series)
      .def_readonly("fitted_gamma_per_ms", &ModeDecay::fitted_gamma_per_ms)
      .def_readonly("fit_r2", &ModeDecay::fit_r2)
      .def_readonly("log_fit", &ModeDecay::log_fit);

  py::class_<DiffusionFit>(m, "DiffusionFit")
      .def_readonly("gamma0_per_ms", &DiffusionFit::gamma0_per_ms)
      .def_readonly("d_cm2_per_s", &DiffusionFit::d_cm2_per_s)
      .def_readonly("d0_cm2_per_s", &DiffusionFit::d0_cm2_per_s)
      .def_readonly("pressure_torr", &DiffusionFit::pressure_torr)
      .def_readonly("d_lo_cm2_per_s", &DiffusionFit::d_lo_cm2_per_s)
      .def_readonly("d_hi_cm2_per_s", &DiffusionFit::d_hi_cm2_per_s);

  m.def("synthesize_hole_series", &synthesize_hole_series,
        py::arg("d_cm2_per_s"), py::arg("gamma0_per_ms"), py::arg("hole"),
        py::arg("grid"), py::arg("timestamps_ms"), py::arg("noise_sigma"),
        py::arg("seed"));
  m.def("transverse_fft", &transverse_fft, py::arg("series"));
  m.def("fit_mode_decays", &fit_mode_decays, py::arg("modes"),
        py::arg("times_ms"), py::arg("k_min_per_mm"), py::arg("k_max_per_mm"),
        py::arg("noise_floor") = 0.0);
  m.def("fit_diffusion", &fit_diffusion, py::arg("decays"),
        py::arg("pressure_torr"));
  m.def("quadrant_error_estimate", &quadrant_error_estimate,
        py::arg("series"), py::arg("k_min_per_mm"), py::arg("k_max_per_mm"),
        py::arg("pressure_torr"), py::arg("noise_floor") = 0.0);
  m.def("buffer_diffusion_cm2_per_s", &buffer_diffusion_cm2_per_s,
        py::arg("buffer"), py::arg("temperature_k"));
}
