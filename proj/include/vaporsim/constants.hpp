#pragma once

namespace vaporsim {

// CODATA 2018 values, SI units.
inline constexpr double k_boltzmann = 1.380649e-23;              // J/K
inline constexpr double k_amu = 1.66053906660e-27;               // kg
inline constexpr double k_speed_of_light = 2.99792458e8;         // m/s
inline constexpr double k_electron_radius = 2.8179403262e-15;    // m
inline constexpr double k_electron_mass = 9.1093837015e-31;      // kg
inline constexpr double k_elementary_charge = 1.602176634e-19;   // C
inline constexpr double k_vacuum_permittivity = 8.8541878128e-12;// F/m

inline constexpr double k_torr_to_pascal = 133.322368;
inline constexpr double k_pi = 3.14159265358979323846;
inline constexpr double k_sqrt_pi = 1.77245385090551602730;
inline constexpr double k_ln2 = 0.69314718055994530942;

}  // namespace vaporsim
