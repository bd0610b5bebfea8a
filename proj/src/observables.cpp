#include "qtunnel/observables.hpp"

#include <cmath>
#include <mutex>
#include <optional>
#include <algorithm>
#include <sstream>

#include "qtunnel/csv.hpp"
#include "qtunnel/error.hpp"

namespace qtunnel {
namespace {

constexpr double kSnap = 1e-12;

Interval snap(const WellGeometry& g, Interval iv) {
  for (double edge : {0.0, g.barrier_left(), g.barrier_right(), g.total_length()}) {
    const double tol = kSnap * std::max(1.0, g.total_length());
    if (std::fabs(iv.lo - edge) <= tol) iv.lo = edge;
    if (std::fabs(iv.hi - edge) <= tol) iv.hi = edge;
  }
  return iv;
}

Eigen::MatrixXd sample_basis(const Spectrum& sp, const QuadratureRule& rule) {
  Eigen::MatrixXd phi(rule.size(), sp.size());
  for (std::size_t i = 0; i < rule.size(); ++i)
    for (std::size_t n = 0; n < sp.size(); ++n)
      phi(i, n) = eigenfunction_eval(sp.states[n], sp.geometry, rule.x[i]);
  return phi;
}

Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& phi, const Eigen::VectorXd& w) {
  Eigen::MatrixXd m = phi.transpose() * w.asDiagonal() * phi;
  // exact symmetry
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) m(j, i) = m(i, j);
  return m;
}

std::complex<double> quadratic_form(const Eigen::MatrixXd& m,
                                    const std::vector<std::complex<double>>& c) {
  std::complex<double> sum = 0.0;
  const auto n = static_cast<Eigen::Index>(c.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    std::complex<double> row = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) row += std::conj(c[i]) * m(i, j);
    sum += row * c[j];
  }
  return sum;
}

}  // namespace

RegionOverlapMatrix region_overlap(const Spectrum& sp, Interval region, int order_scale) {
  const auto& g = sp.geometry;
  region = snap(g, region);
  if (region.hi < region.lo) throw DomainError("inverted overlap region", "region");
  if (region.lo < 0.0 || region.hi > g.total_length())
    throw DomainError("overlap region leaves the box", "region");
  RegionOverlapMatrix out{region, Eigen::MatrixXd::Zero(sp.size(), sp.size()), sp.fingerprint()};
  if (region.hi == region.lo) return out;
  const auto rule = spectrum_quadrature(sp, region, order_scale);
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.w.data(), rule.w.size());
  out.entries = weighted_gram(sample_basis(sp, rule), w);
  return out;
}

double rhs_probability(const WaveField& field, const RegionOverlapMatrix& overlap, double t) {
  if (overlap.spectrum_id != field.spectrum().fingerprint())
    throw DomainError("overlap matrix and wave field come from different spectra");
  const auto value = quadratic_form(overlap.entries, field.coefficients_at(t));
  if (std::fabs(value.imag()) > 1e-8) {
    std::ostringstream msg;
    msg << "region probability has imaginary part " << value.imag() << " at t = " << t;
    throw NumericalError(msg.str());
  }
  return std::clamp(value.real(), 0.0, field.captured_norm());
}

SampledBasis::SampledBasis(const Spectrum& sp, int resolution) {
  if (resolution < 256) throw DomainError("entropy grid resolution must be >= 256", "grid_resolution");
  const auto& g = sp.geometry;
  double q_max = 0.0;
  for (const auto& st : sp.states)
    if (st.z > 0.0) q_max = std::max(q_max, st.q);
  for (const auto& iv : g.regions()) {
    if (!(iv.length() > 0.0)) continue;
    long panels = std::max(1L, std::lround(resolution * iv.length() / g.total_length()));
    if (g.region_of(0.5 * (iv.lo + iv.hi)) == Region::barrier) {
      // keep panels narrower than the decay length in the barrier
      const long decay_panels = static_cast<long>(std::ceil(2.0 * q_max * iv.length()));
      panels = std::max(panels, std::min(decay_panels, 100L * resolution));
    }
    rule_.append(composite_rule(iv, static_cast<int>(panels), 8));
  }
  phi_ = sample_basis(sp, rule_);
}

std::vector<double> SampledBasis::density(const std::vector<std::complex<double>>& c) const {
  const auto n = static_cast<Eigen::Index>(c.size());
  Eigen::VectorXd re(n), im(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    re(i) = c[i].real();
    im(i) = c[i].imag();
  }
  const Eigen::VectorXd pr = phi_ * re;
  const Eigen::VectorXd pi = phi_ * im;
  std::vector<double> rho(pr.size());
  for (Eigen::Index i = 0; i < pr.size(); ++i) rho[i] = pr(i) * pr(i) + pi(i) * pi(i);
  return rho;
}

double density_entropy(const QuadratureRule& rule, const std::vector<double>& rho) {
  if (rho.size() != rule.size()) throw DomainError("density and quadrature sizes differ");
  const auto& w = rule.w;
  double s = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i)
    if (rho[i] > 0.0) s -= w[i] * rho[i] * std::log(rho[i]);
  if (!std::isfinite(s)) throw NumericalError("entropy integrand is not finite");
  return s;
}

double spatial_entropy(const SampledBasis& basis, const std::vector<std::complex<double>>& c) {
  return density_entropy(basis.rule(), basis.density(c));
}

double spatial_entropy(const WaveField& field, double t, int grid_resolution) {
  const SampledBasis basis(field.spectrum(), grid_resolution);
  return spatial_entropy(basis, field.coefficients_at(t));
}

MomentMatrices moment_matrices(const Spectrum& sp) {
  const auto rule = spectrum_quadrature(sp, {0.0, sp.geometry.total_length()});
  const auto phi = sample_basis(sp, rule);
  Eigen::VectorXd wx(rule.size()), wx2(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    wx(i) = rule.w[i] * rule.x[i];
    wx2(i) = wx(i) * rule.x[i];
  }
  return {weighted_gram(phi, wx), weighted_gram(phi, wx2)};
}

PositionMoments position_moments(const MomentMatrices& m, double captured_norm,
                                 const std::vector<std::complex<double>>& c) {
  const double mean = quadratic_form(m.x, c).real() / captured_norm;
  const double second = quadratic_form(m.x2, c).real() / captured_norm;
  return {mean, std::max(0.0, second - mean * mean)};
}

PositionMoments position_moments(const WaveField& field, double t) {
  return position_moments(moment_matrices(field.spectrum()), field.captured_norm(),
                          field.coefficients_at(t));
}

ObservableSeries time_series(const WaveField& field, const std::vector<double>& times,
                             Interval rhs_region, const SeriesOptions& options) {
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw DomainError("time grid must be strictly increasing", "times");
  ObservableSeries out;
  out.times = times;
  out.captured_norm = field.captured_norm();
  const auto overlap = region_overlap(field.spectrum(), rhs_region);
  const auto moments = moment_matrices(field.spectrum());
  std::optional<SampledBasis> basis;
  if (options.compute_entropy) basis.emplace(field.spectrum(), options.entropy_resolution);
  const auto n = times.size();
  out.rhs_prob.resize(n);
  out.entropy.assign(n, std::nan(""));
  out.mean_x.resize(n);
  out.variance.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = times[i];
    try {
      const auto c = field.coefficients_at(t);
      const auto value = quadratic_form(overlap.entries, c);
      if (std::fabs(value.imag()) > 1e-8)
        throw NumericalError("region probability has imaginary part " + format_double(value.imag()));
      out.rhs_prob[i] = std::clamp(value.real(), 0.0, field.captured_norm());
      if (basis) out.entropy[i] = spatial_entropy(*basis, c);
      const auto pm = position_moments(moments, field.captured_norm(), c);
      out.mean_x[i] = pm.mean;
      out.variance[i] = pm.variance;
    } catch (const Error& e) {
      throw NumericalError(std::string(e.what()) + " (at t = " + format_double(t) + ")");
    }
  }
  return out;
}

void write_observables_csv(std::ostream& out, const ObservableSeries& s) {
  CsvWriter csv(out);
  csv.header({"t", "rhs_prob", "entropy", "mean_x", "variance"});
  for (std::size_t i = 0; i < s.times.size(); ++i)
    csv.row(s.times[i], s.rhs_prob[i], s.entropy[i], s.mean_x[i], s.variance[i]);
}

std::shared_ptr<const RegionOverlapMatrix> OverlapCache::get(const Spectrum& sp, Interval region) {
  const Key key{sp.fingerprint(), region.lo, region.hi};
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  auto built = std::make_shared<const RegionOverlapMatrix>(region_overlap(sp, region));
  std::unique_lock lock(mutex_);
  auto [it, inserted] = entries_.emplace(key, std::move(built));
  return it->second;
}

std::size_t OverlapCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::vector<double> uniform_grid(double start, double end, int samples) {
  if (samples < 1) throw DomainError("grid needs at least one sample", "samples");
  if (samples == 1) return {start};
  if (!(end > start)) throw DomainError("grid end must exceed its start", "end");
  std::vector<double> g(samples);
  const double h = (end - start) / (samples - 1);
  for (int i = 0; i < samples; ++i) g[i] = start + i * h;
  g.back() = end;
  return g;
}

}  // namespace qtunnel
