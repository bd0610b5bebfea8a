#pragma once

#include <string_view>

namespace qtunnel {

enum class Preset { natural, paper };

/// Planck constant and particle mass in a consistent unit system.
///
/// natural: hbar = 1, mass = 1/2, so hbar^2/2m = 1 and E = k^2.
/// paper:   the electron values hbar = 6.5821220e-16 eV s and m = 0.5109906 MeV/c^2,
///          expressed in meV, angstrom and picoseconds.
struct PhysicalConstants {
  double hbar = 1.0;
  double mass = 0.5;

  static PhysicalConstants natural() { return {1.0, 0.5}; }
  static PhysicalConstants paper();
  static PhysicalConstants from_preset(Preset preset);

  /// hbar^2 / 2m, the energy of a unit wavenumber.
  double kinetic_scale() const { return hbar * hbar / (2.0 * mass); }
  /// Wavenumber for a kinetic energy (may be negative: returns sqrt(|e|)/scale).
  double wavenumber(double kinetic_energy) const;
  /// Energy for a wavenumber.
  double energy(double wavenumber) const { return kinetic_scale() * wavenumber * wavenumber; }

  void validate() const;
};

namespace units {
inline constexpr double hbar_eV_s = 6.5821220e-16;
inline constexpr double electron_mass_MeV = 0.5109906;
inline constexpr double speed_of_light_A_per_ps = 2.99792458e6;
}  // namespace units

std::string_view to_string(Preset preset);
Preset preset_from_string(std::string_view name);
/// Unit labels for (energy, length, time).
struct UnitLabels {
  std::string_view energy, length, time;
};
UnitLabels unit_labels(Preset preset);

}  // namespace qtunnel
