#include "vaporsim/faddeeva.hpp"

#include <array>
#include <cmath>

#include "vaporsim/constants.hpp"

namespace vaporsim {

namespace {

constexpr int k_weideman_n = 64;

// Weideman's rational approximation: expansion coefficients are the cosine
// transform of f(t) = exp(-t^2)(L^2 + t^2) sampled along t = L tan(theta/2).
// Computed once at startup; the evaluation below is then a Horner loop in
// the Möbius variable Z = (L + iz)/(L - iz).
struct WeidemanTable {
  double L;
  std::array<double, k_weideman_n> a;

  WeidemanTable() {
    L = std::sqrt(k_weideman_n / std::sqrt(2.0));
    const int m = 2 * k_weideman_n;
    std::array<double, 2 * k_weideman_n> f{};
    for (int j = 0; j < m; ++j) {
      const double theta = k_pi * j / m;
      const double t = L * std::tan(0.5 * theta);
      f[j] = std::exp(-t * t) * (L * L + t * t);
    }
    for (int n = 0; n < k_weideman_n; ++n) {
      double acc = 0.0;
      for (int j = 1; j < m; ++j) {
        acc += f[j] * std::cos(k_pi * (n + 1) * j / m);
      }
      a[n] = (f[0] + 2.0 * acc) / (2.0 * m);
    }
  }
};

const WeidemanTable& weideman_table() {
  static const WeidemanTable table;
  return table;
}

std::complex<double> faddeeva_upper(std::complex<double> z) {
  const double r2 = std::norm(z);
  if (r2 >= 256.0) {
    // Laplace continued fraction, accurate far from the origin.
    const std::complex<double> i_sqrt_pi(0.0, 1.0 / k_sqrt_pi);
    std::complex<double> t = z;
    for (int k = 10; k >= 1; --k) {
      t = z - 0.5 * static_cast<double>(k) / t;
    }
    return i_sqrt_pi / t;
  }
  const WeidemanTable& w = weideman_table();
  const std::complex<double> lmiz = w.L - std::complex<double>(0.0, 1.0) * z;
  const std::complex<double> Z =
      (w.L + std::complex<double>(0.0, 1.0) * z) / lmiz;
  std::complex<double> p = 0.0;
  for (int n = k_weideman_n - 1; n >= 0; --n) {
    p = p * Z + w.a[n];
  }
  return 2.0 * p / (lmiz * lmiz) + (1.0 / k_sqrt_pi) / lmiz;
}

}  // namespace

std::complex<double> faddeeva(std::complex<double> z) {
  if (z.imag() >= 0.0) {
    return faddeeva_upper(z);
  }
  const std::complex<double> w = faddeeva_upper(-z);
  return 2.0 * std::exp(-z * z) - w;
}

std::complex<double> faddeeva_derivative(std::complex<double> z,
                                         std::complex<double> w_of_z) {
  return -2.0 * z * w_of_z +
         std::complex<double>(0.0, 2.0 / k_sqrt_pi);
}

}  // namespace vaporsim
