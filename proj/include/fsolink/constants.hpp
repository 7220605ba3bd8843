#pragma once

// Physical constants, CODATA 2018 exact/recommended values. All SI.
namespace fsolink::constants {

inline constexpr double planck = 6.62607015e-34;         // J s
inline constexpr double boltzmann = 1.380649e-23;        // J/K
inline constexpr double electron_charge = 1.602176634e-19; // C
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m
inline constexpr double speed_of_light = 299792458.0;    // m/s
inline constexpr double pi = 3.141592653589793238462643383279502884;

} // namespace fsolink::constants
