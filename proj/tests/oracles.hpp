#pragma once

// Brute-force reference implementations used only by tests. These compute
// the same quantities as the library by slower, independent means.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracles {

struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;

  explicit GaussLegendre(int n) : x(n), w(n) {
    for (int i = 0; i < n; ++i) {
      double root = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double deriv = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = root;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * root * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        deriv = n * (root * p1 - p0) / (root * root - 1.0);
        const double step = p1 / deriv;
        root -= step;
        if (std::abs(step) < 1e-15) break;
      }
      x[i] = root;
      w[i] = 2.0 / ((1.0 - root * root) * deriv * deriv);
    }
  }
};

inline const GaussLegendre& gl48() {
  static const GaussLegendre quad(48);
  return quad;
}

// Integrates f over [a, b] split into the given panels (ascending
// breakpoints), 48-point Gauss-Legendre per panel.
template <typename F>
double panel_integrate(const std::vector<double>& breakpoints, F&& f) {
  const GaussLegendre& quad = gl48();
  double total = 0.0;
  for (size_t p = 0; p + 1 < breakpoints.size(); ++p) {
    const double a = breakpoints[p];
    const double b = breakpoints[p + 1];
    if (b <= a) continue;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (size_t i = 0; i < quad.x.size(); ++i) {
      acc += quad.w[i] * f(mid + half * quad.x[i]);
    }
    total += acc * half;
  }
  return total;
}

inline std::vector<double> merged_breakpoints(std::vector<double> pts,
                                              double lo, double hi) {
  pts.push_back(lo);
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double p : pts) {
    if (p < lo || p > hi) continue;
    if (out.empty() || p - out.back() > 1e-300) out.push_back(p);
  }
  return out;
}

// Voigt profile by direct numerical convolution of the Gaussian with the
// Lorentzian. Panels are placed around both the Gaussian bump (near u = nu)
// and the Lorentzian bump (near u = 0) so the quadrature resolves whichever
// factor is narrow.
inline double voigt_convolution(double nu, double sigma, double gamma) {
  if (sigma == 0.0 && gamma == 0.0) return 0.0;
  if (sigma == 0.0) return gamma / (M_PI * (nu * nu + gamma * gamma));
  if (gamma == 0.0) {
    const double u = nu / sigma;
    return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * M_PI));
  }
  const double cut = std::abs(nu) + 14.0 * sigma;
  std::vector<double> pts;
  for (double s : {-14.0, -8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 14.0}) {
    pts.push_back(nu + s * sigma);
  }
  for (double s : {1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0}) {
    pts.push_back(s * gamma);
    pts.push_back(-s * gamma);
  }
  pts.push_back(0.0);
  const auto breakpoints = merged_breakpoints(std::move(pts), -cut, cut);
  const double gauss_norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
  return panel_integrate(breakpoints, [&](double u) {
    const double g = (nu - u) / sigma;
    return gauss_norm * std::exp(-0.5 * g * g) * gamma /
           (M_PI * (u * u + gamma * gamma));
  });
}

// Area under an arbitrary line profile with Lorentzian far wings of half
// width gamma: quadrature out to a cutoff plus the analytic Lorentzian tail
// beyond it.
template <typename F>
double profile_area(F&& profile, double sigma, double gamma) {
  const double cut = 20.0 * sigma + 2e4 * gamma;
  std::vector<double> pts;
  for (double s : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 14.0, 20.0}) {
    pts.push_back(s * sigma);
    pts.push_back(-s * sigma);
  }
  double scale = gamma;
  while (scale < cut) {
    pts.push_back(scale);
    pts.push_back(-scale);
    scale *= 3.0;
  }
  pts.push_back(0.0);
  const auto breakpoints = merged_breakpoints(std::move(pts), -cut, cut);
  const double body = panel_integrate(breakpoints, profile);
  const double tail = gamma > 0.0
                          ? 1.0 - (2.0 / M_PI) * std::atan(cut / gamma)
                          : 0.0;
  return body + tail;
}

}  // namespace oracles
