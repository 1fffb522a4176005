#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "vaporsim/atoms.hpp"
#include "vaporsim/diffusion.hpp"
#include "vaporsim/errors.hpp"
#include "vaporsim/memory.hpp"
#include "vaporsim/rng.hpp"

using namespace vaporsim;

namespace {

const AtomData& data() {
  static const AtomData d = AtomData::load_file(VAPORSIM_DATA_FILE);
  return d;
}

ImageGrid unit_grid() {
  ImageGrid grid;
  grid.nx = 64;
  grid.ny = 64;
  grid.pixel_pitch_mm = 1.0;
  return grid;
}

std::vector<double> frame_times(int n = 32, double step_ms = 0.5) {
  std::vector<double> times(n);
  for (int i = 0; i < n; ++i) times[i] = step_ms * i;
  return times;
}

HoleProfile deep_hole() {
  HoleProfile hole;
  hole.depth = 0.8;
  hole.radius_mm = 6.0;
  return hole;
}

constexpr double k_window_min = 0.09;
constexpr double k_window_max = 0.6;

// Four identical holes, one per quadrant centre, so that each image quadrant
// is a complete periodic copy of a single-hole field. Built by superposing
// single-hole syntheses and removing the triple-counted background.
ImageSeries lattice_series(double d_cm2, double gamma0, const HoleProfile& hole,
                           const ImageGrid& grid,
                           const std::vector<double>& times, double noise,
                           std::uint64_t seed) {
  const double qx = grid.nx / 4.0 * grid.pixel_pitch_mm;
  const double qy = grid.ny / 4.0 * grid.pixel_pitch_mm;
  ImageSeries out;
  bool first = true;
  for (double cx : {-qx, qx}) {
    for (double cy : {-qy, qy}) {
      HoleProfile shifted = hole;
      shifted.center_x_mm = cx;
      shifted.center_y_mm = cy;
      ImageSeries one =
          synthesize_hole_series(d_cm2, gamma0, shifted, grid, times, 0.0, 1);
      if (first) {
        out = one;
        first = false;
      } else {
        for (size_t t = 0; t < out.frames.size(); ++t) {
          for (size_t i = 0; i < out.frames[t].size(); ++i) {
            out.frames[t][i] += one.frames[t][i];
          }
        }
      }
    }
  }
  Rng rng(seed);
  for (size_t t = 0; t < out.frames.size(); ++t) {
    const double base = 3.0 * std::exp(-gamma0 * out.timestamps_ms[t]);
    for (size_t i = 0; i < out.frames[t].size(); ++i) {
      out.frames[t][i] -= base;
      if (noise > 0.0) out.frames[t][i] += noise * rng.normal();
    }
  }
  return out;
}

DiffusionFit full_fit(const ImageSeries& series, double noise_floor = 0.0) {
  return fit_diffusion(
      fit_mode_decays(transverse_fft(series), series.timestamps_ms,
                      k_window_min, k_window_max, noise_floor),
      10.0);
}

}  // namespace

TEST_CASE("image series validation rejects malformed input") {
  ImageSeries s;
  s.nx = 8;
  s.ny = 8;
  s.pixel_pitch_mm = 1.0;
  s.timestamps_ms = {0.0, 1.0, 2.0, 3.0};
  s.frames.assign(4, std::vector<double>(64, 0.0));
  CHECK_NOTHROW(s.validate());

  ImageSeries bad = s;
  bad.nx = 3;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = s;
  bad.pixel_pitch_mm = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = s;
  bad.timestamps_ms = {0.0, 1.0, 2.0};
  bad.frames.resize(3);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = s;
  bad.timestamps_ms = {0.0, 2.0, 1.0, 3.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = s;
  bad.frames.pop_back();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = s;
  bad.frames[2].pop_back();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("hole synthesis validates its parameters") {
  const ImageGrid grid = unit_grid();
  const std::vector<double> times = frame_times(4);
  HoleProfile hole = deep_hole();

  CHECK_THROWS_AS(
      synthesize_hole_series(-1.0, 0.1, hole, grid, times, 0.0, 1),
      std::invalid_argument);
  CHECK_THROWS_AS(
      synthesize_hole_series(15.0, -0.1, hole, grid, times, 0.0, 1),
      std::invalid_argument);
  CHECK_THROWS_AS(
      synthesize_hole_series(15.0, 0.1, hole, grid, times, -0.01, 1),
      std::invalid_argument);
  CHECK_THROWS_AS(
      synthesize_hole_series(15.0, 0.1, hole, grid, {-1.0, 0.0, 1.0, 2.0}, 0.0, 1),
      std::invalid_argument);

  HoleProfile bad = hole;
  bad.depth = 0.0;
  CHECK_THROWS_AS(synthesize_hole_series(15.0, 0.1, bad, grid, times, 0.0, 1),
                  std::invalid_argument);
  bad.depth = 1.2;
  CHECK_THROWS_AS(synthesize_hole_series(15.0, 0.1, bad, grid, times, 0.0, 1),
                  std::invalid_argument);
  bad = hole;
  bad.radius_mm = 1.5;  // below two pixel pitches, no longer bandlimited
  CHECK_THROWS_AS(synthesize_hole_series(15.0, 0.1, bad, grid, times, 0.0, 1),
                  std::invalid_argument);
}

TEST_CASE("seeded hole synthesis is deterministic") {
  const ImageGrid grid = unit_grid();
  const std::vector<double> times = frame_times(4);
  ImageSeries a =
      synthesize_hole_series(15.0, 0.1, deep_hole(), grid, times, 0.01, 5);
  ImageSeries b =
      synthesize_hole_series(15.0, 0.1, deep_hole(), grid, times, 0.01, 5);
  ImageSeries c =
      synthesize_hole_series(15.0, 0.1, deep_hole(), grid, times, 0.01, 6);
  CHECK(a.frames == b.frames);
  CHECK(a.frames != c.frames);
}

TEST_CASE("transverse FFT satisfies Parseval against the image energy") {
  const ImageGrid grid = unit_grid();
  ImageSeries s;
  s.nx = grid.nx;
  s.ny = grid.ny;
  s.pixel_pitch_mm = grid.pixel_pitch_mm;
  s.timestamps_ms = {0.0, 1.0, 2.0, 3.0};
  Rng rng(11);
  for (int t = 0; t < 4; ++t) {
    std::vector<double> frame(s.nx * s.ny);
    for (double& v : frame) v = rng.normal();
    s.frames.push_back(frame);
  }

  const std::vector<ModeDecay> modes = transverse_fft(s);
  for (int t = 0; t < 4; ++t) {
    double spectral = 0.0;
    for (const ModeDecay& m : modes) {
      spectral += m.amplitude_series[t] * m.amplitude_series[t];
    }
    double direct = 0.0;
    for (double v : s.frames[t]) direct += v * v;
    CHECK(spectral == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("a static field yields zero decay rates") {
  const ImageGrid grid = unit_grid();
  ImageSeries s = synthesize_hole_series(0.0, 0.0, deep_hole(), grid,
                                         frame_times(4), 0.0, 1);
  for (int t = 1; t < 4; ++t) CHECK(s.frames[t] == s.frames[0]);

  const std::vector<ModeDecay> fitted =
      fit_mode_decays(transverse_fft(s), s.timestamps_ms, k_window_min,
                      k_window_max);
  CHECK(fitted.size() >= 5);
  for (const ModeDecay& m : fitted) {
    CHECK(std::fabs(m.fitted_gamma_per_ms) < 1e-12);
    CHECK(m.fit_r2 == 1.0);
    CHECK(m.log_fit);
  }
  DiffusionFit fit = fit_diffusion(fitted, 10.0);
  CHECK(std::fabs(fit.d_cm2_per_s) < 1e-12);
  CHECK(std::fabs(fit.gamma0_per_ms) < 1e-12);
}

TEST_CASE("a single cosine mode is grouped at its wavenumber and fitted exactly") {
  const int nx = 64, ny = 64;
  const double pitch = 1.0;
  const double k0 = 2.0 * M_PI * 3.0 / (nx * pitch);
  const double gamma = 0.45;

  ImageSeries s;
  s.nx = nx;
  s.ny = ny;
  s.pixel_pitch_mm = pitch;
  s.timestamps_ms = {0.0, 1.0, 2.0, 3.0, 4.0};
  for (double t : s.timestamps_ms) {
    std::vector<double> frame(nx * ny);
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const double x = (ix - 0.5 * (nx - 1)) * pitch;
        frame[iy * nx + ix] = 0.3 * std::cos(k0 * x) * std::exp(-gamma * t);
      }
    }
    s.frames.push_back(frame);
  }

  const std::vector<ModeDecay> modes = transverse_fft(s);
  double total = 0.0, in_group = 0.0;
  for (const ModeDecay& m : modes) {
    const double p = m.amplitude_series[0] * m.amplitude_series[0];
    if (m.k_perp_per_mm > 0.0) total += p;
    if (std::fabs(m.k_perp_per_mm - k0) < 1e-9) in_group += p;
  }
  CHECK(in_group > 0.99 * total);

  // The narrow window also catches neighbouring wavenumber groups, but they
  // carry no power; only the cosine's own group matters.
  const std::vector<ModeDecay> fitted =
      fit_mode_decays(modes, s.timestamps_ms, 0.9 * k0, 1.1 * k0);
  const ModeDecay* hit = nullptr;
  for (const ModeDecay& m : fitted) {
    if (std::fabs(m.k_perp_per_mm - k0) < 1e-9) {
      hit = &m;
    } else {
      CHECK(m.amplitude_series[0] == 0.0);
    }
  }
  REQUIRE(hit != nullptr);
  CHECK(hit->k_perp_per_mm == doctest::Approx(k0).epsilon(1e-12));
  CHECK(hit->fitted_gamma_per_ms == doctest::Approx(gamma).epsilon(1e-12));
  CHECK(hit->fit_r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(hit->log_fit);
}

TEST_CASE("noiseless hole series recovers the generating coefficients exactly") {
  const ImageGrid grid = unit_grid();
  const std::vector<double> times = frame_times();
  ImageSeries s =
      synthesize_hole_series(15.0, 0.1, deep_hole(), grid, times, 0.0, 42);

  const std::vector<ModeDecay> fitted = fit_mode_decays(
      transverse_fft(s), times, k_window_min, k_window_max);
  CHECK(fitted.size() == 19);
  for (size_t i = 0; i < fitted.size(); ++i) {
    const ModeDecay& m = fitted[i];
    CHECK(m.k_perp_per_mm >= k_window_min);
    CHECK(m.k_perp_per_mm <= k_window_max);
    CHECK(m.log_fit);
    CHECK(m.fit_r2 > 1.0 - 1e-12);
    const double expected =
        0.1 + 15.0 * k_cm2_per_s_in_mm2_per_ms * m.k_perp_per_mm *
                  m.k_perp_per_mm;
    CHECK(m.fitted_gamma_per_ms == doctest::Approx(expected).epsilon(1e-9));
    if (i > 0) CHECK(m.fitted_gamma_per_ms > fitted[i - 1].fitted_gamma_per_ms);
  }

  DiffusionFit fit = fit_diffusion(fitted, 10.0);
  CHECK(fit.d_cm2_per_s == doctest::Approx(15.0).epsilon(1e-9));
  CHECK(fit.gamma0_per_ms == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(fit.pressure_torr == 10.0);
  CHECK(fit.d0_cm2_per_s ==
        doctest::Approx(fit.d_cm2_per_s * 10.0 / 760.0).epsilon(1e-14));
  CHECK(fit.d_lo_cm2_per_s <= fit.d_cm2_per_s);
  CHECK(fit.d_hi_cm2_per_s >= fit.d_cm2_per_s);
  CHECK(fit.d_hi_cm2_per_s - fit.d_lo_cm2_per_s < 1e-6);
}

TEST_CASE("hole recovery is invariant under hole translation") {
  const ImageGrid grid = unit_grid();
  const std::vector<double> times = frame_times();
  HoleProfile shifted = deep_hole();
  shifted.center_x_mm = 3.0;
  shifted.center_y_mm = -2.0;

  DiffusionFit centred = full_fit(
      synthesize_hole_series(15.0, 0.1, deep_hole(), grid, times, 0.0, 1));
  DiffusionFit moved = full_fit(
      synthesize_hole_series(15.0, 0.1, shifted, grid, times, 0.0, 1));
  CHECK(moved.d_cm2_per_s ==
        doctest::Approx(centred.d_cm2_per_s).epsilon(1e-6));
  CHECK(moved.gamma0_per_ms ==
        doctest::Approx(centred.gamma0_per_ms).epsilon(1e-6));
}

TEST_CASE("noisy hole series recover the coefficients within tolerance") {
  const ImageGrid grid = unit_grid();
  const std::vector<double> times = frame_times();
  for (std::uint64_t seed : {100, 117, 133}) {
    ImageSeries s = synthesize_hole_series(15.0, 0.1, deep_hole(), grid, times,
                                           0.01, seed);
    DiffusionFit fit = full_fit(s, 0.04);
    CHECK(fit.d_cm2_per_s == doctest::Approx(15.0).epsilon(0.05));
    CHECK(fit.gamma0_per_ms == doctest::Approx(0.1).epsilon(0.10));
  }
}

TEST_CASE("modes drowned by the noise floor switch to the direct fit") {
  ModeDecay mode;
  mode.k_perp_per_mm = 0.3;
  mode.amplitude_series = {1.0, 0.1, 0.01, 0.001};
  const std::vector<double> times = {0.0, 1.0, 2.0, 3.0};

  const std::vector<ModeDecay> fitted =
      fit_mode_decays({mode}, times, 0.1, 0.6, 0.05);
  REQUIRE(fitted.size() == 1);
  CHECK(!fitted[0].log_fit);
  CHECK(fitted[0].fitted_gamma_per_ms ==
        doctest::Approx(std::log(10.0)).epsilon(1e-6));

  // Without a declared floor the same series is fitted in the log domain.
  const std::vector<ModeDecay> logged = fit_mode_decays({mode}, times, 0.1, 0.6);
  REQUIRE(logged.size() == 1);
  CHECK(logged[0].log_fit);
  CHECK(logged[0].fitted_gamma_per_ms ==
        doctest::Approx(std::log(10.0)).epsilon(1e-12));

  // A zero amplitude forces the direct branch regardless of the floor.
  mode.amplitude_series = {1.0, 0.5, 0.25, 0.0};
  const std::vector<ModeDecay> zeroed = fit_mode_decays({mode}, times, 0.1, 0.6);
  REQUIRE(zeroed.size() == 1);
  CHECK(!zeroed[0].log_fit);
  CHECK(std::isfinite(zeroed[0].fitted_gamma_per_ms));
}

TEST_CASE("decay fitting validates its inputs") {
  ModeDecay mode;
  mode.k_perp_per_mm = 0.3;
  mode.amplitude_series = {1.0, 0.5};

  CHECK_THROWS_AS(fit_mode_decays({mode}, {0.0}, 0.1, 0.6),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_mode_decays({mode}, {1.0, 0.5}, 0.1, 0.6),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_mode_decays({mode}, {0.0, 1.0}, -0.1, 0.6),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_mode_decays({mode}, {0.0, 1.0}, 0.6, 0.6),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_mode_decays({mode}, {0.0, 1.0}, 0.1, 0.6, -1.0),
                  std::invalid_argument);

  mode.amplitude_series = {1.0, 0.5, 0.25};
  CHECK_THROWS_AS(fit_mode_decays({mode}, {0.0, 1.0}, 0.1, 0.6),
                  std::invalid_argument);
}

TEST_CASE("diffusion fitting needs five distinct well-spread wavenumbers") {
  std::vector<ModeDecay> modes;
  for (int i = 0; i < 4; ++i) {
    ModeDecay m;
    m.k_perp_per_mm = 0.1 + 0.1 * i;
    m.fitted_gamma_per_ms = 0.1;
    m.amplitude_series = {1.0};
    modes.push_back(m);
  }
  CHECK_THROWS_AS(fit_diffusion(modes, 10.0), std::invalid_argument);

  // Five distinct but nearly coincident wavenumbers cannot separate the
  // intercept from the slope.
  modes.clear();
  for (int i = 0; i < 5; ++i) {
    ModeDecay m;
    m.k_perp_per_mm = 1.0 + 1e-7 * i;
    m.fitted_gamma_per_ms = 0.2;
    m.amplitude_series = {1.0};
    modes.push_back(m);
  }
  CHECK_THROWS_AS(fit_diffusion(modes, 10.0), NumericError);

  modes[0].k_perp_per_mm = 0.5;
  CHECK_THROWS_AS(fit_diffusion(modes, 0.0), std::invalid_argument);
}

TEST_CASE("quadrant spread brackets the global fit on lattice data") {
  const ImageGrid grid = unit_grid();
  const std::vector<double> times = frame_times();

  SUBCASE("noiseless quadrants agree with the global fit exactly") {
    ImageSeries s =
        lattice_series(15.0, 0.1, deep_hole(), grid, times, 0.0, 1);
    DiffusionFit global = full_fit(s);
    DiffusionFit quad = quadrant_error_estimate(s, k_window_min, k_window_max,
                                                10.0);
    CHECK(quad.d_cm2_per_s ==
          doctest::Approx(global.d_cm2_per_s).epsilon(1e-9));
    CHECK(quad.gamma0_per_ms ==
          doctest::Approx(global.gamma0_per_ms).epsilon(1e-9));
    CHECK(quad.d_hi_cm2_per_s - quad.d_lo_cm2_per_s < 1e-9);
  }

  SUBCASE("noisy quadrant bounds bracket the global fit in most trials") {
    int bracket = 0;
    for (int seed = 0; seed < 50; ++seed) {
      ImageSeries s = lattice_series(15.0, 0.1, deep_hole(), grid, times, 0.01,
                                     500 + seed);
      DiffusionFit global = full_fit(s, 0.04);
      DiffusionFit quad = quadrant_error_estimate(s, k_window_min,
                                                  k_window_max, 10.0, 0.04);
      if (global.d_cm2_per_s >= quad.d_lo_cm2_per_s &&
          global.d_cm2_per_s <= quad.d_hi_cm2_per_s) {
        ++bracket;
      }
    }
    CHECK(bracket >= 45);
  }

  SUBCASE("small images are rejected") {
    ImageGrid small;
    small.nx = 16;
    small.ny = 16;
    small.pixel_pitch_mm = 1.0;
    HoleProfile hole = deep_hole();
    hole.radius_mm = 3.0;
    ImageSeries s = synthesize_hole_series(15.0, 0.1, hole, small,
                                           frame_times(4), 0.0, 1);
    CHECK_THROWS_AS(
        quadrant_error_estimate(s, k_window_min, k_window_max, 10.0),
        std::invalid_argument);
  }
}

TEST_CASE("buffer diffusion normalization and temperature scaling") {
  const BufferGas n2 = data().buffer(BufferKind::N2, 10.0);
  const BufferGas ne = data().buffer(BufferKind::Ne, 20.0);

  CHECK(buffer_diffusion_cm2_per_s(n2) == doctest::Approx(18.24).epsilon(1e-12));
  CHECK(buffer_diffusion_cm2_per_s(ne) == doctest::Approx(13.3).epsilon(1e-12));
  CHECK(buffer_diffusion_cm2_per_s(n2, 358.0) ==
        doctest::Approx(24.6158323930).epsilon(1e-9));
  CHECK(buffer_diffusion_cm2_per_s(n2, 293.15) * 10.0 / 760.0 ==
        doctest::Approx(n2.d0_cm2_per_s).epsilon(1e-12));

  BufferGas bad = n2;
  bad.pressure_torr = 0.0;
  CHECK_THROWS_AS(buffer_diffusion_cm2_per_s(bad), std::invalid_argument);
  bad = n2;
  bad.d0_cm2_per_s = 0.0;
  CHECK_THROWS_AS(buffer_diffusion_cm2_per_s(bad), std::invalid_argument);
  CHECK_THROWS_AS(buffer_diffusion_cm2_per_s(n2, 0.0), std::invalid_argument);
}

TEST_CASE("storage lifetime bridges to the diffusion model") {
  const BufferGas n2 = data().buffer(BufferKind::N2, 10.0);
  const double d358 = buffer_diffusion_cm2_per_s(n2, 358.0);
  const double tau = storage_lifetime_ns(140.0, d358);
  CHECK(tau == doctest::Approx(1990.5887892688).epsilon(1e-9));
  // tau scales exactly as the beam waist squared.
  CHECK(storage_lifetime_ns(280.0, d358) == doctest::Approx(4.0 * tau).epsilon(1e-12));
}

TEST_CASE("through-origin normalization of diffusion against pressure") {
  const std::vector<double> pressures = {5.0, 10.0, 20.0};
  std::vector<double> ds;
  for (double p : pressures) ds.push_back(0.24 * 760.0 / p);
  CHECK(fit_d0_through_origin(pressures, ds) ==
        doctest::Approx(0.24).epsilon(1e-12));

  CHECK_THROWS_AS(fit_d0_through_origin({1.0, 2.0}, {1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_d0_through_origin({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(fit_d0_through_origin({-1.0}, {1.0}), std::invalid_argument);
}
