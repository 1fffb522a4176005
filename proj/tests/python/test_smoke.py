import math

import pytest

import vaporsim as vs


@pytest.fixture(scope="module")
def data():
    return vs.AtomData.load_file(vs.default_data_file())


@pytest.fixture(scope="module")
def cell(data):
    c = vs.VaporCell()
    c.line = data.line(vs.LineLabel.D2)
    c.buffer = data.buffer(vs.BufferKind.N2, 10.0)
    c.temperature_k = 343.15
    c.length_cm = 7.5
    c.radius_cm = 1.0
    return c


def test_transmission_spectrum_has_two_hyperfine_dips(data):
    c = vs.VaporCell()
    c.line = data.line(vs.LineLabel.D2)
    c.buffer = data.buffer(vs.BufferKind.N2, 10.0)
    c.temperature_k = 313.15
    c.length_cm = 7.5
    c.radius_cm = 1.0
    grid = [-8.0 + 16.0 * i / 800 for i in range(801)]
    spec = vs.transmission_spectrum(c, vs.GroundPopulations.thermal(), grid)
    assert all(0.0 <= t <= 1.0 for t in spec)
    f4 = c.line.centroid_f4_ghz()
    f3 = c.line.centroid_f3_ghz()
    near_f4 = min(t for f, t in zip(grid, spec) if abs(f - f4) < 1.0)
    near_f3 = min(t for f, t in zip(grid, spec) if abs(f - f3) < 1.0)
    assert near_f4 < 0.5
    assert near_f3 < 0.5


def test_polarization_from_ratio_matches_thermal_weights():
    assert vs.polarization_from_ratio(9.0, 7.0) == pytest.approx(0.5625)
    assert vs.polarization_from_ratio(1.0, 0.0) == 1.0


def test_trapping_multiplicity_identity(cell):
    r = vs.multiplicity_analytic(cell, vs.GroundPopulations.thermal(), 0.0)
    assert r.multiplicity > 0.0
    identity = (1.0 - r.escape_probability) / r.escape_probability
    assert r.multiplicity == pytest.approx(identity, rel=1e-12)


def test_monte_carlo_agrees_with_analytic_model(cell):
    pops = vs.GroundPopulations.thermal()
    analytic = vs.multiplicity_analytic(cell, pops, 0.0)
    mc = vs.multiplicity_monte_carlo(cell, pops, 0.0, 2000, 12345)
    assert mc.multiplicity == pytest.approx(analytic.multiplicity, rel=0.35)
    assert mc.mc_stderr > 0.0


def test_self_consistent_polarization_is_high_for_nitrogen(cell):
    pump = vs.PumpConfig()
    pump.pump_line = vs.LineLabel.D1
    pump.pump_rate_per_ns = vs.k_default_pump_rate_per_ns
    assert vs.self_consistent_polarization(cell, pump) > 0.99


def test_memory_sweep_reproduces_the_coupling_anchor(cell):
    ctrl = vs.ControlPulseTrain()
    ctrl.detuning_ghz = 15.2
    opts = vs.SolveOptions()
    opts.fwm_on = False
    opts.stark_on = False
    pops = vs.GroundPopulations.polarized(0.999)
    curve = vs.sweep_rabi(cell, pops, ctrl, [4.0], opts)
    assert len(curve.rows) == 1
    assert curve.rows[0].eta == pytest.approx(0.25, rel=1e-6)
    assert curve.rows[0].converged


def test_spectrum_fit_round_trip(cell):
    truth = vs.SpectrumFit()
    truth.optical_depth = 5.0
    truth.polarization = 0.9
    truth.temperature_k = 343.15
    grid = [-8.0 + 16.0 * i / 1200 for i in range(1201)]
    trace = vs.synthesize_scan_from_fit(cell, truth, 0.0, 1, grid)
    guess = vs.SpectrumFit()
    guess.optical_depth = 2.0
    guess.polarization = 0.7
    guess.temperature_k = 330.0
    fit = vs.fit_scan(cell, trace, guess)
    assert fit.optical_depth == pytest.approx(5.0, abs=1e-6)
    assert fit.polarization == pytest.approx(0.9, abs=1e-6)
    assert fit.temperature_k == pytest.approx(343.15, abs=1e-4)
    assert fit.covariance.shape == (5, 5)


def test_diffusion_round_trip():
    hole = vs.HoleProfile()
    hole.depth = 0.8
    hole.radius_mm = 6.0
    grid = vs.ImageGrid()
    grid.nx = 64
    grid.ny = 64
    grid.pixel_pitch_mm = 1.0
    times = [0.5 * i for i in range(32)]
    series = vs.synthesize_hole_series(15.0, 0.1, hole, grid, times, 0.0, 1)
    decays = vs.fit_mode_decays(vs.transverse_fft(series), times, 0.09, 0.6)
    fit = vs.fit_diffusion(decays, 10.0)
    assert fit.d_cm2_per_s == pytest.approx(15.0, rel=1e-6)
    assert fit.gamma0_per_ms == pytest.approx(0.1, rel=1e-6)
    assert fit.d0_cm2_per_s == pytest.approx(15.0 * 10.0 / 760.0, rel=1e-12)


def test_storage_lifetime_scales_with_waist_squared(data):
    buffer = data.buffer(vs.BufferKind.N2, 10.0)
    d = vs.buffer_diffusion_cm2_per_s(buffer, 358.0)
    tau = vs.storage_lifetime_ns(140.0, d)
    assert vs.storage_lifetime_ns(280.0, d) == pytest.approx(4.0 * tau)
    assert 1000.0 < tau < 4000.0
