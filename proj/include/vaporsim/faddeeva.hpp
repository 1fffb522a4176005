#pragma once

#include <complex>

namespace vaporsim {

// Faddeeva function w(z) = exp(-z^2) erfc(-iz) for complex z.
// Relative accuracy is better than 1e-10 over the upper half plane; the
// lower half plane is reached through the reflection
// w(-z) = 2 exp(-z^2) - w(z).
std::complex<double> faddeeva(std::complex<double> z);

// dw/dz = -2 z w(z) + 2i/sqrt(pi); handy for analytic Jacobians of
// Voigt-profile fits.
std::complex<double> faddeeva_derivative(std::complex<double> z,
                                         std::complex<double> w_of_z);

}  // namespace vaporsim
