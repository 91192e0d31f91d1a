#pragma once

#include <numbers>

namespace phonox::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduced Planck constant, J s (CODATA 2018, exact).
inline constexpr double hbar = 1.054571817e-34;
/// Vacuum permittivity, F/m.
inline constexpr double eps0 = 8.8541878128e-12;
/// Speed of light in vacuum, m/s.
inline constexpr double c0 = 299792458.0;

inline constexpr double nm = 1e-9;
inline constexpr double um = 1e-6;
inline constexpr double GHz = 1e9;
inline constexpr double MHz = 1e6;
inline constexpr double THz = 1e12;
inline constexpr double fF = 1e-15;

/// Angular frequency (rad/s) from an ordinary frequency in Hz.
constexpr double angular(double hz) { return two_pi * hz; }
/// Ordinary frequency in Hz from an angular frequency.
constexpr double hertz(double rad_per_s) { return rad_per_s / two_pi; }

}  // namespace phonox::constants
