#pragma once

#include <complex>
#include <numbers>

namespace msgate {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Angular frequencies (rad/s) everywhere in memory; files store cyclic Hz.
// The serializer is the only place these two ever meet.
inline constexpr double hz_to_rad(double f_hz) { return two_pi * f_hz; }
inline constexpr double rad_to_hz(double w) { return w / two_pi; }

using cplx = std::complex<double>;
inline constexpr cplx iu{0.0, 1.0};

inline const char* version() { return "0.1.0"; }

}  // namespace msgate
