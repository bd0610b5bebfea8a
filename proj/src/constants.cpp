#include "qtunnel/constants.hpp"

#include <cmath>
#include <string>

#include "qtunnel/error.hpp"

namespace qtunnel {

PhysicalConstants PhysicalConstants::paper() {
  // eV s -> meV ps: *1e3 (eV->meV) *1e12 (s->ps)
  const double hbar = units::hbar_eV_s * 1e15;
  // m = (m c^2) / c^2 with m c^2 in meV and c in angstrom/ps.
  const double c = units::speed_of_light_A_per_ps;
  const double mass = units::electron_mass_MeV * 1e9 / (c * c);
  return {hbar, mass};
}

PhysicalConstants PhysicalConstants::from_preset(Preset preset) {
  return preset == Preset::paper ? paper() : natural();
}

double PhysicalConstants::wavenumber(double kinetic_energy) const {
  return std::sqrt(std::fabs(kinetic_energy) / kinetic_scale());
}

void PhysicalConstants::validate() const {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw DomainError("hbar must be positive", "hbar");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw DomainError("mass must be positive", "mass");
}

std::string_view to_string(Preset preset) {
  return preset == Preset::paper ? "paper" : "natural";
}

Preset preset_from_string(std::string_view name) {
  if (name == "natural") return Preset::natural;
  if (name == "paper") return Preset::paper;
  throw DomainError("unknown preset '" + std::string(name) + "' (expected natural or paper)",
                    "preset");
}

UnitLabels unit_labels(Preset preset) {
  if (preset == Preset::paper) return {"meV", "angstrom", "ps"};
  return {"energy units", "length units", "time units"};
}

}  // namespace qtunnel
