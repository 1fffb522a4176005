#include "vaporsim/diffusion.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

#include "vaporsim/constants.hpp"
#include "vaporsim/errors.hpp"
#include "vaporsim/levmar.hpp"
#include "vaporsim/rng.hpp"

namespace vaporsim {

namespace {

// Signed FFT frequency index of array position i out of n.
int signed_frequency(int i, int n) { return i < (n + 1) / 2 ? i : i - n; }

// Wavenumber magnitude per FFT cell plus the assignment of cells to groups
// of equal |k|, groups sorted by ascending k.
struct ModeGroups {
  std::vector<double> k_per_group;
  std::vector<int> group_of_cell;

  ModeGroups(int nx, int ny, double pitch_mm) {
    const int n = nx * ny;
    std::vector<std::pair<double, int>> cells(n);
    for (int iy = 0; iy < ny; ++iy) {
      const double ky =
          2.0 * k_pi * signed_frequency(iy, ny) / (double(ny) * pitch_mm);
      for (int ix = 0; ix < nx; ++ix) {
        const double kx =
            2.0 * k_pi * signed_frequency(ix, nx) / (double(nx) * pitch_mm);
        cells[size_t(iy) * nx + ix] = {std::hypot(kx, ky), iy * nx + ix};
      }
    }
    std::sort(cells.begin(), cells.end());
    group_of_cell.resize(n);
    for (const auto& [k, idx] : cells) {
      if (k_per_group.empty() ||
          k - k_per_group.back() > 1e-9 * (1.0 + k_per_group.back()))
        k_per_group.push_back(k);
      group_of_cell[idx] = int(k_per_group.size()) - 1;
    }
  }
};

struct LinearFit {
  double slope;
  double intercept;
  double r2;
};

LinearFit regress(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ssr = 0.0, sst = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ssr += r * r;
    const double d = y[i] - sy / n;
    sst += d * d;
  }
  fit.r2 = sst > 0.0 ? 1.0 - ssr / sst : (ssr > 0.0 ? 0.0 : 1.0);
  return fit;
}

void check_window(double k_min, double k_max) {
  if (!(k_min >= 0.0) || !(k_max > k_min))
    throw std::invalid_argument("wavenumber window must satisfy 0 <= min < max");
}

}  // namespace

void ImageSeries::validate() const {
  if (nx < 4 || ny < 4)
    throw std::invalid_argument("image must be at least 4x4 pixels");
  if (!(pixel_pitch_mm > 0.0))
    throw std::invalid_argument("pixel pitch must be positive");
  if (timestamps_ms.size() < 4)
    throw std::invalid_argument("need at least four frames");
  for (size_t i = 1; i < timestamps_ms.size(); ++i)
    if (!(timestamps_ms[i] > timestamps_ms[i - 1]))
      throw std::invalid_argument("timestamps must be strictly increasing");
  if (frames.size() != timestamps_ms.size())
    throw std::invalid_argument("frame count must match timestamp count");
  for (const auto& frame : frames)
    if (frame.size() != size_t(nx) * size_t(ny))
      throw std::invalid_argument("frame size must equal nx * ny");
}

ImageSeries synthesize_hole_series(double d_cm2_per_s, double gamma0_per_ms,
                                   const HoleProfile& hole,
                                   const ImageGrid& grid,
                                   const std::vector<double>& timestamps_ms,
                                   double noise_sigma, std::uint64_t seed) {
  if (grid.nx < 4 || grid.ny < 4)
    throw std::invalid_argument("image must be at least 4x4 pixels");
  if (!(grid.pixel_pitch_mm > 0.0))
    throw std::invalid_argument("pixel pitch must be positive");
  if (timestamps_ms.size() < 4)
    throw std::invalid_argument("need at least four frames");
  for (size_t i = 1; i < timestamps_ms.size(); ++i)
    if (!(timestamps_ms[i] > timestamps_ms[i - 1]))
      throw std::invalid_argument("timestamps must be strictly increasing");
  if (!(timestamps_ms.front() >= 0.0))
    throw std::invalid_argument("timestamps must be >= 0");
  if (d_cm2_per_s < 0.0 || gamma0_per_ms < 0.0)
    throw std::invalid_argument("decay parameters must be >= 0");
  if (noise_sigma < 0.0) throw std::invalid_argument("noise level must be >= 0");
  if (!(hole.depth > 0.0 && hole.depth <= 1.0))
    throw std::invalid_argument("hole depth must lie in (0, 1]");
  if (hole.radius_mm < 2.0 * grid.pixel_pitch_mm)
    throw std::invalid_argument(
        "hole radius must be at least two pixel pitches");

  const int nx = grid.nx, ny = grid.ny;
  const size_t n = size_t(nx) * size_t(ny);
  const double pitch = grid.pixel_pitch_mm;
  const double d_mm2_per_ms = d_cm2_per_s * k_cm2_per_s_in_mm2_per_ms;

  std::vector<std::complex<double>> spectrum(n), work(n);
  fftw_plan forward = fftw_plan_dft_2d(
      ny, nx, reinterpret_cast<fftw_complex*>(spectrum.data()),
      reinterpret_cast<fftw_complex*>(spectrum.data()), FFTW_FORWARD,
      FFTW_ESTIMATE);
  fftw_plan backward = fftw_plan_dft_2d(
      ny, nx, reinterpret_cast<fftw_complex*>(work.data()),
      reinterpret_cast<fftw_complex*>(work.data()), FFTW_BACKWARD,
      FFTW_ESTIMATE);

  for (int iy = 0; iy < ny; ++iy) {
    const double y = (iy - 0.5 * (ny - 1)) * pitch - hole.center_y_mm;
    for (int ix = 0; ix < nx; ++ix) {
      const double x = (ix - 0.5 * (nx - 1)) * pitch - hole.center_x_mm;
      const double rho2 = x * x + y * y;
      spectrum[size_t(iy) * nx + ix] =
          1.0 - hole.depth *
                    std::exp(-2.0 * rho2 / (hole.radius_mm * hole.radius_mm));
    }
  }
  fftw_execute(forward);

  std::vector<double> rate(n);
  for (int iy = 0; iy < ny; ++iy) {
    const double ky = 2.0 * k_pi * signed_frequency(iy, ny) / (ny * pitch);
    for (int ix = 0; ix < nx; ++ix) {
      const double kx = 2.0 * k_pi * signed_frequency(ix, nx) / (nx * pitch);
      rate[size_t(iy) * nx + ix] =
          gamma0_per_ms + d_mm2_per_ms * (kx * kx + ky * ky);
    }
  }

  ImageSeries series;
  series.nx = nx;
  series.ny = ny;
  series.pixel_pitch_mm = pitch;
  series.timestamps_ms = timestamps_ms;
  series.frames.reserve(timestamps_ms.size());
  Rng rng(seed);
  for (double t : timestamps_ms) {
    for (size_t i = 0; i < n; ++i)
      work[i] = spectrum[i] * std::exp(-rate[i] * t);
    fftw_execute(backward);
    std::vector<double> frame(n);
    for (size_t i = 0; i < n; ++i) {
      frame[i] = work[i].real() / double(n);
      if (noise_sigma > 0.0) frame[i] += noise_sigma * rng.normal();
    }
    series.frames.push_back(std::move(frame));
  }

  fftw_destroy_plan(forward);
  fftw_destroy_plan(backward);
  return series;
}

std::vector<ModeDecay> transverse_fft(const ImageSeries& series) {
  series.validate();
  const int nx = series.nx, ny = series.ny;
  const size_t n = size_t(nx) * size_t(ny);
  const ModeGroups groups(nx, ny, series.pixel_pitch_mm);
  const size_t n_groups = groups.k_per_group.size();

  std::vector<std::complex<double>> buf(n);
  fftw_plan plan = fftw_plan_dft_2d(
      ny, nx, reinterpret_cast<fftw_complex*>(buf.data()),
      reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD,
      FFTW_ESTIMATE);

  std::vector<ModeDecay> modes(n_groups);
  for (size_t g = 0; g < n_groups; ++g) {
    modes[g].k_perp_per_mm = groups.k_per_group[g];
    modes[g].amplitude_series.resize(series.frames.size());
  }

  for (size_t t = 0; t < series.frames.size(); ++t) {
    const std::vector<double>& frame = series.frames[t];
    for (size_t i = 0; i < n; ++i) buf[i] = frame[i];
    fftw_execute(plan);
    std::vector<double> power(n_groups, 0.0);
    for (size_t i = 0; i < n; ++i)
      power[size_t(groups.group_of_cell[i])] += std::norm(buf[i]) / double(n);
    for (size_t g = 0; g < n_groups; ++g)
      modes[g].amplitude_series[t] = std::sqrt(power[g]);
  }

  fftw_destroy_plan(plan);
  return modes;
}

std::vector<ModeDecay> fit_mode_decays(const std::vector<ModeDecay>& modes,
                                       const std::vector<double>& times_ms,
                                       double k_min_per_mm,
                                       double k_max_per_mm,
                                       double noise_floor) {
  check_window(k_min_per_mm, k_max_per_mm);
  if (times_ms.size() < 2)
    throw std::invalid_argument("need at least two frame times");
  for (size_t i = 1; i < times_ms.size(); ++i)
    if (!(times_ms[i] > times_ms[i - 1]))
      throw std::invalid_argument("frame times must be strictly increasing");
  if (noise_floor < 0.0)
    throw std::invalid_argument("noise floor must be >= 0");

  std::vector<ModeDecay> out;
  for (const ModeDecay& mode : modes) {
    if (mode.k_perp_per_mm < k_min_per_mm || mode.k_perp_per_mm > k_max_per_mm)
      continue;
    if (mode.amplitude_series.size() != times_ms.size())
      throw std::invalid_argument("amplitude series length must match times");

    ModeDecay fitted = mode;
    const std::vector<double>& a = mode.amplitude_series;
    const bool clean = std::all_of(a.begin(), a.end(), [&](double v) {
      return v > 3.0 * noise_floor && v > 0.0;
    });
    if (clean) {
      std::vector<double> log_a(a.size());
      std::transform(a.begin(), a.end(), log_a.begin(),
                     [](double v) { return std::log(v); });
      const LinearFit fit = regress(times_ms, log_a);
      fitted.fitted_gamma_per_ms = -fit.slope;
      fitted.fit_r2 = fit.r2;
      fitted.log_fit = true;
    } else {
      // Root-power amplitudes sit on a noise pedestal, so the direct model
      // is sqrt(a0^2 exp(-2 gamma t) + floor^2) with the pedestal free.
      LevMarModel model = [&](const Eigen::VectorXd& theta,
                              Eigen::VectorXd& res, Eigen::MatrixXd& jac) {
        res.resize(long(a.size()));
        jac.resize(long(a.size()), 3);
        for (size_t i = 0; i < a.size(); ++i) {
          const double e = std::exp(-theta(1) * times_ms[i]);
          const double m = std::sqrt(theta(0) * theta(0) * e * e +
                                     theta(2) * theta(2));
          const double safe = std::max(m, 1e-300);
          res(long(i)) = m - a[i];
          jac(long(i), 0) = theta(0) * e * e / safe;
          jac(long(i), 1) = -theta(0) * theta(0) * times_ms[i] * e * e / safe;
          jac(long(i), 2) = theta(2) / safe;
        }
      };
      const double peak = *std::max_element(a.begin(), a.end());
      const double floor0 =
          std::max(*std::min_element(a.begin(), a.end()), 1e-12);
      const double span = times_ms.back() - times_ms.front();
      // Rates beyond ~100 decades per window are unresolvable; bounding
      // gamma keeps noise-dominated modes from reporting runaway rates.
      const double gamma_cap = 100.0 / span;
      double gamma0 = 1.0 / span;
      if (a.front() > 3.0 * floor0)
        gamma0 = std::log(a.front() / floor0) / span;
      Eigen::VectorXd start(3), lower(3), upper(3);
      start << std::max(peak, 2.0 * floor0),
          std::clamp(gamma0, -0.5 * gamma_cap, 0.5 * gamma_cap), floor0;
      lower << 0.0, -gamma_cap, 0.0;
      upper << 1e12, gamma_cap, 1e12;
      const LevMarResult run = levmar_fit(model, start, lower, upper);
      fitted.fitted_gamma_per_ms = run.params(1);
      double mean = std::accumulate(a.begin(), a.end(), 0.0) / double(a.size());
      double sst = 0.0;
      for (double v : a) sst += (v - mean) * (v - mean);
      fitted.fit_r2 =
          sst > 0.0 ? 1.0 - run.ssr / sst : (run.ssr > 0.0 ? 0.0 : 1.0);
      fitted.log_fit = false;
    }
    out.push_back(std::move(fitted));
  }
  return out;
}

DiffusionFit fit_diffusion(const std::vector<ModeDecay>& decays,
                           double pressure_torr) {
  if (!(pressure_torr > 0.0))
    throw std::invalid_argument("pressure must be positive");

  std::vector<double> ks;
  for (const ModeDecay& d : decays) ks.push_back(d.k_perp_per_mm);
  std::sort(ks.begin(), ks.end());
  size_t distinct = ks.empty() ? 0 : 1;
  for (size_t i = 1; i < ks.size(); ++i)
    if (ks[i] - ks[i - 1] > 1e-9 * (1.0 + ks[i - 1])) ++distinct;
  if (distinct < 5)
    throw std::invalid_argument(
        "need at least five distinct spatial frequencies");

  double sum_w = 0.0;
  for (const ModeDecay& d : decays)
    if (!d.amplitude_series.empty())
      sum_w += d.amplitude_series.front() * d.amplitude_series.front();
  const bool uniform = sum_w <= 0.0;

  double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
  for (const ModeDecay& d : decays) {
    const double w = uniform || d.amplitude_series.empty()
                         ? 1.0
                         : d.amplitude_series.front() *
                               d.amplitude_series.front();
    const double x = d.k_perp_per_mm * d.k_perp_per_mm;
    const double y = d.fitted_gamma_per_ms;
    sw += w;
    swx += w * x;
    swy += w * y;
    swxx += w * x * x;
    swxy += w * x * y;
  }
  const double det = sw * swxx - swx * swx;
  if (!(det > 1e-12 * sw * swxx))
    throw NumericError("spatial frequency spread too degenerate to fit");

  const double slope = (sw * swxy - swx * swy) / det;
  const double intercept = (swxx * swy - swx * swxy) / det;
  double wssr = 0.0;
  for (const ModeDecay& d : decays) {
    const double w = uniform || d.amplitude_series.empty()
                         ? 1.0
                         : d.amplitude_series.front() *
                               d.amplitude_series.front();
    const double x = d.k_perp_per_mm * d.k_perp_per_mm;
    const double r = d.fitted_gamma_per_ms - (intercept + slope * x);
    wssr += w * r * r;
  }
  const double dof = double(decays.size()) - 2.0;
  const double slope_sd = std::sqrt(std::max(wssr, 0.0) / dof * sw / det);

  DiffusionFit fit;
  fit.gamma0_per_ms = intercept;
  fit.d_cm2_per_s = slope / k_cm2_per_s_in_mm2_per_ms;
  fit.pressure_torr = pressure_torr;
  fit.d0_cm2_per_s = pressure_torr / 760.0 * fit.d_cm2_per_s;
  const double half_width = 1.96 * slope_sd / k_cm2_per_s_in_mm2_per_ms;
  fit.d_lo_cm2_per_s = fit.d_cm2_per_s - half_width;
  fit.d_hi_cm2_per_s = fit.d_cm2_per_s + half_width;
  return fit;
}

DiffusionFit quadrant_error_estimate(const ImageSeries& series,
                                     double k_min_per_mm, double k_max_per_mm,
                                     double pressure_torr,
                                     double noise_floor) {
  series.validate();
  check_window(k_min_per_mm, k_max_per_mm);
  const int nx2 = series.nx / 2, ny2 = series.ny / 2;
  if (nx2 < 16 || ny2 < 16)
    throw std::invalid_argument(
        "quadrant analysis needs at least 32x32 pixels");

  std::vector<double> ds, g0s;
  for (int qy = 0; qy < 2; ++qy)
    for (int qx = 0; qx < 2; ++qx) {
      ImageSeries quad;
      quad.nx = nx2;
      quad.ny = ny2;
      quad.pixel_pitch_mm = series.pixel_pitch_mm;
      quad.timestamps_ms = series.timestamps_ms;
      quad.frames.reserve(series.frames.size());
      for (const std::vector<double>& frame : series.frames) {
        std::vector<double> sub(size_t(nx2) * size_t(ny2));
        for (int iy = 0; iy < ny2; ++iy)
          for (int ix = 0; ix < nx2; ++ix)
            sub[size_t(iy) * nx2 + ix] =
                frame[size_t(iy + qy * ny2) * series.nx + (ix + qx * nx2)];
        quad.frames.push_back(std::move(sub));
      }
      const std::vector<ModeDecay> fitted =
          fit_mode_decays(transverse_fft(quad), quad.timestamps_ms,
                          k_min_per_mm, k_max_per_mm, noise_floor);
      const DiffusionFit fit = fit_diffusion(fitted, pressure_torr);
      ds.push_back(fit.d_cm2_per_s);
      g0s.push_back(fit.gamma0_per_ms);
    }

  const double mean_d = std::accumulate(ds.begin(), ds.end(), 0.0) / 4.0;
  const double mean_g0 = std::accumulate(g0s.begin(), g0s.end(), 0.0) / 4.0;
  double var = 0.0;
  for (double d : ds) var += (d - mean_d) * (d - mean_d);
  const double sd = std::sqrt(var / 3.0);

  DiffusionFit fit;
  fit.gamma0_per_ms = mean_g0;
  fit.d_cm2_per_s = mean_d;
  fit.pressure_torr = pressure_torr;
  fit.d0_cm2_per_s = pressure_torr / 760.0 * mean_d;
  fit.d_lo_cm2_per_s = mean_d - 1.96 * sd;
  fit.d_hi_cm2_per_s = mean_d + 1.96 * sd;
  return fit;
}

double buffer_diffusion_cm2_per_s(const BufferGas& buffer,
                                  double temperature_k) {
  if (!(buffer.pressure_torr > 0.0))
    throw std::invalid_argument("buffer pressure must be positive");
  if (!(buffer.d0_cm2_per_s > 0.0))
    throw std::invalid_argument("buffer has no diffusion constant");
  if (!(temperature_k > 0.0))
    throw std::invalid_argument("temperature must be positive");
  return buffer.d0_cm2_per_s * (760.0 / buffer.pressure_torr) *
         std::pow(temperature_k / 293.15, 1.5);
}

double fit_d0_through_origin(const std::vector<double>& pressures_torr,
                             const std::vector<double>& d_cm2_per_s) {
  if (pressures_torr.size() != d_cm2_per_s.size())
    throw std::invalid_argument("pressure and diffusion arrays differ");
  if (pressures_torr.empty())
    throw std::invalid_argument("need at least one measurement");
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < pressures_torr.size(); ++i) {
    if (!(pressures_torr[i] > 0.0))
      throw std::invalid_argument("pressures must be positive");
    const double x = 760.0 / pressures_torr[i];
    sxx += x * x;
    sxy += x * d_cm2_per_s[i];
  }
  return sxy / sxx;
}

}  // namespace vaporsim
