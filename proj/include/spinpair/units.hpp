#pragma once

namespace spinpair {

// All internal energies are angular frequencies in rad/s (hbar = 1); times in
// seconds. Frequencies quoted in Hz (J-couplings, spectrometer frequencies)
// convert on input.

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

inline constexpr double hz_to_rad(double f_hz) { return kTwoPi * f_hz; }
inline constexpr double rad_to_hz(double w) { return w / kTwoPi; }

// Gyromagnetic ratios, rad/(s T).
inline constexpr double kGamma1H = 2.6752218744e8;
inline constexpr double kGamma13C = 6.728284e7;

inline constexpr double kHbar = 1.054571817e-34;  // J s
inline constexpr double kBoltzmann = 1.380649e-23;  // J/K

/// Equilibrium polarization eps_n = hbar*Omega_n / (4 kB T) in the
/// high-temperature limit.
inline constexpr double polarization(double omega_rad, double temperature_k) {
  return kHbar * omega_rad / (4.0 * kBoltzmann * temperature_k);
}

}  // namespace spinpair
