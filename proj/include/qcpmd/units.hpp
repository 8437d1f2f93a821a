#pragma once

// Internal arithmetic is in Hartree atomic units; inputs and outputs use
// Angstrom and femtoseconds.

namespace qcpmd::units {

inline constexpr double bohr_per_angstrom = 1.8897259886;
inline constexpr double au_time_per_fs = 41.341374575751;
inline constexpr double boltzmann_ha_per_kelvin = 3.166811563e-6;
inline constexpr double electron_masses_per_dalton = 1822.888486;
inline constexpr double hydrogen_mass_dalton = 1.00784;
inline constexpr double hydrogen_mass = hydrogen_mass_dalton * electron_masses_per_dalton;
/// Reduced mass of H2 along the bond coordinate, electron masses.
inline constexpr double h2_reduced_mass = hydrogen_mass / 2.0;

constexpr double inverse_temperature(double kelvin) { return 1.0 / (boltzmann_ha_per_kelvin * kelvin); }

/// Acceleration in Angstrom/fs^2 for a force in Ha/Angstrom acting on `mass` electron masses.
constexpr double acceleration(double force_ha_per_angstrom, double mass) {
  const double force_au = force_ha_per_angstrom / bohr_per_angstrom;
  const double accel_au = force_au / mass;  // bohr / t_au^2
  return accel_au / bohr_per_angstrom * au_time_per_fs * au_time_per_fs;
}

}  // namespace qcpmd::units
