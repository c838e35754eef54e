#ifndef RB_CONSTANTS_HPP
#define RB_CONSTANTS_HPP

namespace rb::constants {

// CODATA-2018 values. Fixed here so that derived quantities are bit-stable
// across platforms and releases.
inline constexpr double speed_of_light = 299792458.0;            // m/s (exact)
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m
inline constexpr double reduced_planck = 1.054571817e-34;        // J s
inline constexpr double pi = 3.141592653589793238462643383279502884;

// 1 Debye in C m, used by CLI helpers and tests.
inline constexpr double debye = 3.33564e-30;

}  // namespace rb::constants

#endif
