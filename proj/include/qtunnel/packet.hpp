#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qtunnel/spectrum.hpp"

namespace qtunnel {

/// Initial Gaussian (2 pi sigma^2)^(-1/4) exp(-(x - x0)^2 / 4 sigma^2) exp(i k0 (x - x0)).
struct PacketSpec {
  double center = 11.0;
  double width = 3.0;
  double momentum_wavenumber = 0.0;

  std::complex<double> operator()(double x) const;
  /// Throws DomainError for sigma <= 0 or a centre outside (0, L).
  void validate(const WellGeometry& geometry) const;
  /// Non-fatal notes, e.g. the packet reaching within 3 sigma of a wall.
  std::vector<std::string> warnings(const WellGeometry& geometry) const;
};

struct PacketExpansion {
  std::vector<std::complex<double>> coefficients;
  double captured_norm = 0.0;
  std::uint64_t spectrum_id = 0;
  std::optional<PacketSpec> source;
  std::vector<std::string> warnings;
};

/// Captured norm below this is a hard error; below `kTruncationWarning` only a warning.
inline constexpr double kMinimumCapturedNorm = 0.9;
inline constexpr double kTruncationWarning = 0.999;

/// A_n = <psi_n | f> by region-wise quadrature. `oscillation` is the largest wavenumber f
/// carries, so the rule resolves it as well as the basis.
std::vector<std::complex<double>> project_function(
    const Spectrum& spectrum, const std::function<std::complex<double>(double)>& f,
    double oscillation = 0.0);

PacketExpansion project_packet(const PacketSpec& spec, const Spectrum& spectrum);

/// Expansion with prescribed coefficients (stationary states, synthetic tests).
PacketExpansion make_expansion(const Spectrum& spectrum,
                               std::vector<std::complex<double>> coefficients);

/// Psi(x, t) = sum_n A_n psi_n(x) exp(-i E_n t / hbar).
class WaveField {
 public:
  WaveField(std::shared_ptr<const Spectrum> spectrum, PacketExpansion expansion);

  const Spectrum& spectrum() const { return *spectrum_; }
  std::shared_ptr<const Spectrum> spectrum_ptr() const { return spectrum_; }
  const PacketExpansion& expansion() const { return expansion_; }
  const PhysicalConstants& constants() const { return spectrum_->constants; }
  const WellGeometry& geometry() const { return spectrum_->geometry; }
  double captured_norm() const { return expansion_.captured_norm; }

  /// A_n exp(-i E_n t / hbar).
  std::vector<std::complex<double>> coefficients_at(double t) const;
  /// sum |A_n|^2 E_n / captured_norm.
  double energy_expectation() const;

 private:
  std::shared_ptr<const Spectrum> spectrum_;
  PacketExpansion expansion_;
};

/// psi_n(x) for every state of the spectrum.
std::vector<double> basis_values(const Spectrum& spectrum, double x);

std::complex<double> wavefunction_at(const WaveField& field, double x, double t);
std::vector<double> density_profile(const WaveField& field, const std::vector<double>& grid,
                                    double t);

/// Columns x,t,re_psi,im_psi,density.
void write_profile_csv(std::ostream& out, const WaveField& field, const std::vector<double>& grid,
                       const std::vector<double>& times);

}  // namespace qtunnel
