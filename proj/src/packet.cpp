#include "qtunnel/packet.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qtunnel/csv.hpp"
#include "qtunnel/error.hpp"

namespace qtunnel {

std::complex<double> PacketSpec::operator()(double x) const {
  const double u = x - center;
  const double amp =
      std::pow(2.0 * std::numbers::pi * width * width, -0.25) * std::exp(-u * u / (4.0 * width * width));
  return std::polar(amp, momentum_wavenumber * u);
}

void PacketSpec::validate(const WellGeometry& g) const {
  if (!(width > 0.0) || !std::isfinite(width)) throw DomainError("packet width must be positive", "width");
  if (!(center > 0.0 && center < g.total_length()))
    throw DomainError("packet centre must lie inside the box", "center");
  if (!std::isfinite(momentum_wavenumber))
    throw DomainError("packet momentum must be finite", "momentum");
}

std::vector<std::string> PacketSpec::warnings(const WellGeometry& g) const {
  std::vector<std::string> out;
  if (center < 3.0 * width || g.total_length() - center < 3.0 * width) {
    std::ostringstream msg;
    msg << "packet centre " << center << " is within 3 sigma (" << 3.0 * width
        << ") of a wall; the Gaussian is cut by the hard wall";
    out.push_back(msg.str());
  }
  if (center > g.barrier_left() - 3.0 * width && center < g.barrier_right() + 3.0 * width) {
    std::ostringstream msg;
    msg << "packet centre " << center << " is within 3 sigma of the barrier";
    out.push_back(msg.str());
  }
  return out;
}

std::vector<double> basis_values(const Spectrum& sp, double x) {
  std::vector<double> v(sp.size());
  for (std::size_t n = 0; n < sp.size(); ++n) v[n] = eigenfunction_eval(sp.states[n], sp.geometry, x);
  return v;
}

std::vector<std::complex<double>> project_function(
    const Spectrum& sp, const std::function<std::complex<double>(double)>& f, double oscillation) {
  if (sp.states.empty()) throw DomainError("spectrum is empty");
  double k_max = 0.0;
  for (const auto& st : sp.states) k_max = std::max(k_max, st.k);
  const int order_scale =
      std::max(1, static_cast<int>(std::ceil(std::fabs(oscillation) / std::max(k_max, 1e-300))));
  const auto rule = spectrum_quadrature(sp, {0.0, sp.geometry.total_length()}, std::min(order_scale, 64));
  std::vector<std::complex<double>> a(sp.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto fx = f(rule.x[i]) * rule.w[i];
    for (std::size_t n = 0; n < sp.size(); ++n)
      a[n] += eigenfunction_eval(sp.states[n], sp.geometry, rule.x[i]) * fx;
  }
  return a;
}

PacketExpansion make_expansion(const Spectrum& sp, std::vector<std::complex<double>> coefficients) {
  if (coefficients.size() != sp.size())
    throw DomainError("coefficient count does not match the spectrum");
  PacketExpansion e;
  e.coefficients = std::move(coefficients);
  for (const auto& c : e.coefficients) e.captured_norm += std::norm(c);
  e.spectrum_id = sp.fingerprint();
  return e;
}

PacketExpansion project_packet(const PacketSpec& spec, const Spectrum& sp) {
  if (sp.states.empty()) throw DomainError("spectrum is empty");
  spec.validate(sp.geometry);
  const double oscillation = std::fabs(spec.momentum_wavenumber) + 4.0 / spec.width;
  auto e = make_expansion(sp, project_function(sp, spec, oscillation));
  e.source = spec;
  e.warnings = spec.warnings(sp.geometry);
  if (e.captured_norm < kMinimumCapturedNorm) {
    std::ostringstream msg;
    msg << "packet captures only " << e.captured_norm << " of its norm in " << sp.size()
        << " levels; increase the level count (or reduce k0 / increase sigma)";
    throw NumericalError(msg.str());
  }
  if (e.captured_norm < kTruncationWarning) {
    std::ostringstream msg;
    msg << "basis truncation: captured norm " << e.captured_norm << " < " << kTruncationWarning;
    e.warnings.push_back(msg.str());
  }
  return e;
}

WaveField::WaveField(std::shared_ptr<const Spectrum> spectrum, PacketExpansion expansion)
    : spectrum_(std::move(spectrum)), expansion_(std::move(expansion)) {
  if (!spectrum_) throw DomainError("wave field needs a spectrum");
  if (expansion_.coefficients.size() != spectrum_->size())
    throw DomainError("expansion and spectrum sizes differ");
  if (expansion_.spectrum_id != spectrum_->fingerprint())
    throw DomainError("expansion was built from a different spectrum");
}

std::vector<std::complex<double>> WaveField::coefficients_at(double t) const {
  const double hbar = constants().hbar;
  std::vector<std::complex<double>> c(expansion_.coefficients.size());
  for (std::size_t n = 0; n < c.size(); ++n)
    c[n] = expansion_.coefficients[n] * std::polar(1.0, -spectrum_->states[n].energy * t / hbar);
  return c;
}

double WaveField::energy_expectation() const {
  double sum = 0.0;
  for (std::size_t n = 0; n < expansion_.coefficients.size(); ++n)
    sum += std::norm(expansion_.coefficients[n]) * spectrum_->states[n].energy;
  return sum / expansion_.captured_norm;
}

std::complex<double> wavefunction_at(const WaveField& field, double x, double t) {
  const auto phi = basis_values(field.spectrum(), x);
  const auto c = field.coefficients_at(t);
  std::complex<double> psi = 0.0;
  for (std::size_t n = 0; n < c.size(); ++n) psi += c[n] * phi[n];
  return psi;
}

std::vector<double> density_profile(const WaveField& field, const std::vector<double>& grid,
                                    double t) {
  const auto c = field.coefficients_at(t);
  std::vector<double> out;
  out.reserve(grid.size());
  for (double x : grid) {
    const auto phi = basis_values(field.spectrum(), x);
    std::complex<double> psi = 0.0;
    for (std::size_t n = 0; n < c.size(); ++n) psi += c[n] * phi[n];
    out.push_back(std::norm(psi));
  }
  return out;
}

void write_profile_csv(std::ostream& out, const WaveField& field, const std::vector<double>& grid,
                       const std::vector<double>& times) {
  CsvWriter csv(out);
  csv.header({"x", "t", "re_psi", "im_psi", "density"});
  std::vector<std::vector<double>> phi;
  phi.reserve(grid.size());
  for (double x : grid) phi.push_back(basis_values(field.spectrum(), x));
  for (double t : times) {
    const auto c = field.coefficients_at(t);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      std::complex<double> psi = 0.0;
      for (std::size_t n = 0; n < c.size(); ++n) psi += c[n] * phi[i][n];
      csv.row(grid[i], t, psi.real(), psi.imag(), std::norm(psi));
    }
  }
}

}  // namespace qtunnel
