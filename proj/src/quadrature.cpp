#include "qtunnel/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "qtunnel/error.hpp"

namespace qtunnel {
namespace {

GaussLegendre build_gauss_legendre(int n) {
  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    // recompute derivative at converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.nodes[i] = -x;
    gl.nodes[n - 1 - i] = x;
    gl.weights[i] = w;
    gl.weights[n - 1 - i] = w;
  }
  return gl;
}

}  // namespace

const GaussLegendre& gauss_legendre(int order) {
  if (order < 1) throw DomainError("quadrature order must be >= 1", "order");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendre>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<GaussLegendre>(build_gauss_legendre(order));
  return *slot;
}

void QuadratureRule::append(const QuadratureRule& other) {
  x.insert(x.end(), other.x.begin(), other.x.end());
  w.insert(w.end(), other.w.begin(), other.w.end());
}

QuadratureRule composite_rule(Interval interval, int panels, int order) {
  if (interval.hi < interval.lo) throw DomainError("inverted quadrature interval");
  QuadratureRule rule;
  if (interval.hi == interval.lo || panels <= 0) return rule;
  const auto& gl = gauss_legendre(order);
  const double h = interval.length() / panels;
  rule.x.reserve(static_cast<std::size_t>(panels) * order);
  rule.w.reserve(static_cast<std::size_t>(panels) * order);
  for (int p = 0; p < panels; ++p) {
    const double a = interval.lo + p * h;
    const double mid = a + 0.5 * h;
    for (int i = 0; i < order; ++i) {
      rule.x.push_back(mid + 0.5 * h * gl.nodes[i]);
      rule.w.push_back(0.5 * h * gl.weights[i]);
    }
  }
  return rule;
}

QuadratureRule wavelength_rule(Interval interval, double scale, int order) {
  const double cycles = interval.length() * std::fabs(scale) / (2.0 * std::numbers::pi);
  const int panels = std::max(1, static_cast<int>(std::ceil(cycles)));
  return composite_rule(interval, panels, order);
}

}  // namespace qtunnel
