#pragma once

#include <map>
#include <memory>
#include <ostream>
#include <shared_mutex>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "qtunnel/packet.hpp"

namespace qtunnel {

/// M_mn = integral over `region` of psi_m psi_n.
struct RegionOverlapMatrix {
  Interval region;
  Eigen::MatrixXd entries;
  std::uint64_t spectrum_id = 0;
};

/// Bounds within 1e-12 of 0, c, c+b or L are snapped onto them. Inverted or out-of-box
/// bounds throw DomainError; an empty region yields the zero matrix.
RegionOverlapMatrix region_overlap(const Spectrum& spectrum, Interval region, int order_scale = 1);

/// sum_mn conj(c_m) c_n M_mn with c_n = A_n exp(-i E_n t / hbar), clamped to [0, captured_norm].
double rhs_probability(const WaveField& field, const RegionOverlapMatrix& overlap, double t);

inline constexpr int kDefaultEntropyResolution = 1024;

/// Composite 8-point Gauss-Legendre grid over [0, L] with `resolution` panels shared among the
/// three regions by length, plus the basis sampled on it.
class SampledBasis {
 public:
  SampledBasis(const Spectrum& spectrum, int resolution);
  const QuadratureRule& rule() const { return rule_; }
  /// |Psi|^2 at every node.
  std::vector<double> density(const std::vector<std::complex<double>>& coefficients) const;

 private:
  QuadratureRule rule_;
  Eigen::MatrixXd phi_;  // nodes x states
};

/// -sum w_i rho_i ln rho_i over a rule, with 0 ln 0 = 0.
double density_entropy(const QuadratureRule& rule, const std::vector<double>& density);
/// -integral |Psi|^2 ln |Psi|^2 dx with 0 ln 0 = 0.
double spatial_entropy(const WaveField& field, double t,
                       int grid_resolution = kDefaultEntropyResolution);
double spatial_entropy(const SampledBasis& basis, const std::vector<std::complex<double>>& coefficients);

struct PositionMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Integrals of x psi_m psi_n and x^2 psi_m psi_n over the box.
struct MomentMatrices {
  Eigen::MatrixXd x;
  Eigen::MatrixXd x2;
};
MomentMatrices moment_matrices(const Spectrum& spectrum);

/// Mean and variance of |Psi|^2 normalized by the captured norm.
PositionMoments position_moments(const WaveField& field, double t);
PositionMoments position_moments(const MomentMatrices& m, double captured_norm,
                                 const std::vector<std::complex<double>>& coefficients);

struct ObservableSeries {
  std::vector<double> times;
  std::vector<double> rhs_prob;
  std::vector<double> entropy;
  std::vector<double> mean_x;
  std::vector<double> variance;
  double captured_norm = 0.0;
};

struct SeriesOptions {
  int entropy_resolution = kDefaultEntropyResolution;
  bool compute_entropy = true;
};

/// All four observables on a strictly increasing time grid.
ObservableSeries time_series(const WaveField& field, const std::vector<double>& times,
                             Interval rhs_region, const SeriesOptions& options = {});

/// Header t,rhs_prob,entropy,mean_x,variance.
void write_observables_csv(std::ostream& out, const ObservableSeries& series);

/// Overlap matrices keyed by (spectrum fingerprint, region). Concurrent readers, one writer.
class OverlapCache {
 public:
  std::shared_ptr<const RegionOverlapMatrix> get(const Spectrum& spectrum, Interval region);
  std::size_t size() const;

 private:
  using Key = std::tuple<std::uint64_t, double, double>;
  mutable std::shared_mutex mutex_;
  std::map<Key, std::shared_ptr<const RegionOverlapMatrix>> entries_;
};

std::vector<double> uniform_grid(double start, double end, int samples);

}  // namespace qtunnel
