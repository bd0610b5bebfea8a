#pragma once

#include <span>
#include <vector>

#include "qtunnel/geometry.hpp"

namespace qtunnel {

/// Gauss-Legendre nodes and weights on [-1, 1]. Cached per order; thread safe.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int order);

/// A concatenation of quadrature nodes and weights.
struct QuadratureRule {
  std::vector<double> x;
  std::vector<double> w;

  std::size_t size() const { return x.size(); }
  void append(const QuadratureRule& other);

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += w[i] * f(x[i]);
    return sum;
  }
};

/// Composite Gauss-Legendre rule with `panels` equal panels of `order` nodes on [lo, hi].
QuadratureRule composite_rule(Interval interval, int panels, int order);

/// Composite rule resolving oscillations/decay of the given wavenumber scale:
/// at least `order` nodes per 2*pi/scale, and at least one panel.
QuadratureRule wavelength_rule(Interval interval, double scale, int order = 64);

}  // namespace qtunnel
