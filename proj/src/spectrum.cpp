#include "qtunnel/spectrum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "qtunnel/csv.hpp"
#include "qtunnel/error.hpp"

namespace qtunnel {
namespace {

constexpr double kPi = std::numbers::pi;
// Above this q*b the residuals are divided by cosh(q*b).
constexpr double kOverflowGuard = 30.0;
// Above this q*b eigenfunctions use the decaying-exponential barrier basis.
constexpr double kDecayingBasisFrom = 2.0;

/// C(s) and S(s) solving y'' = z y with C(0) = 1, C'(0) = 0, S(0) = 0, S'(0) = 1.
/// With `scaled`, both are divided by cosh(sqrt(z) s) once that exceeds the overflow guard.
template <class R>
struct Fundamental {
  R c;
  R s;
};

template <class R>
Fundamental<R> fundamental(R z, R s, bool scaled = false) {
  using std::cos, std::cosh, std::sin, std::sinh, std::sqrt, std::tanh, std::fabs;
  const R zs2 = z * s * s;
  if (fabs(zs2) < R(1e-8)) {
    return {1 + zs2 / 2 + zs2 * zs2 / 24, s * (1 + zs2 / 6 + zs2 * zs2 / 120)};
  }
  if (z > 0) {
    const R q = sqrt(z);
    if (scaled && q * s > R(kOverflowGuard)) return {R(1), tanh(q * s) / q};
    return {cosh(q * s), sinh(q * s) / q};
  }
  const R kappa = sqrt(-z);
  return {cos(kappa * s), sin(kappa * s) / kappa};
}

void check_energy(double energy) {
  if (std::isnan(energy)) throw DomainError("energy is NaN", "energy");
  if (!(energy > 0.0) || !std::isfinite(energy))
    throw DomainError("energy must be positive and finite", "energy");
}

double reduced_z(const WellGeometry& g, const PhysicalConstants& pc, double energy) {
  return (g.barrier_height() - energy) / pc.kinetic_scale();
}

// ---- zero counting ---------------------------------------------------------------------

struct Shot {
  double psi;
  double dpsi;
  long zeros;
};

void renormalize(Shot& st) {
  const double m = std::max(std::fabs(st.psi), std::fabs(st.dpsi));
  if (m > 0.0 && std::isfinite(m)) {
    st.psi /= m;
    st.dpsi /= m;
  }
}

/// Oscillatory stretch of length len with wavenumber k: exact phase advance.
void advance_oscillatory(Shot& st, double k, double len) {
  if (len <= 0.0) return;
  double alpha = std::atan2(k * st.psi, st.dpsi);
  double sgn = 1.0;
  if (alpha < 0.0) {
    alpha += kPi;
    sgn = -1.0;
  }
  if (alpha >= kPi) {
    alpha -= kPi;
    sgn = -sgn;
  }
  const double phase = alpha + k * len;
  st.zeros += static_cast<long>(std::floor(phase / kPi));
  st.psi = sgn * std::sin(phase);
  st.dpsi = sgn * k * std::cos(phase);
  renormalize(st);
}

/// Stretch with psi'' = z psi, z >= 0: at most one zero, found from the sign of psi.
void advance_barrier(Shot& st, double z, double len) {
  if (len <= 0.0) return;
  if (z < 0.0) {
    advance_oscillatory(st, std::sqrt(-z), len);
    return;
  }
  const double psi0 = st.psi;
  double psi1, dpsi1;
  const double q = std::sqrt(z);
  if (q * len <= 20.0) {
    const auto f = fundamental(z, len);
    psi1 = st.psi * f.c + st.dpsi * f.s;
    dpsi1 = st.psi * z * f.s + st.dpsi * f.c;
  } else {
    // drop the common positive factor exp(q len)/2
    const double g = st.psi + st.dpsi / q;
    const double d = st.psi - st.dpsi / q;
    const double e = std::exp(-2.0 * q * len);
    psi1 = g + d * e;
    dpsi1 = q * (g - d * e);
  }
  if (psi0 != 0.0 && (psi1 == 0.0 || std::signbit(psi1) != std::signbit(psi0))) ++st.zeros;
  st.psi = psi1;
  st.dpsi = dpsi1;
  renormalize(st);
}

Shot shoot_left(const WellGeometry& g, double k) {
  Shot st{0.0, 1.0, 0};
  advance_oscillatory(st, k, g.barrier_left());
  return st;
}

long full_count(const WellGeometry& g, double k, double z) {
  Shot st = shoot_left(g, k);
  advance_barrier(st, z, g.barrier_width());
  advance_oscillatory(st, k, g.right_half());
  return st.zeros;
}

struct HalfCounts {
  long dirichlet;  // odd states
  long neumann;    // even states
};

HalfCounts half_counts(const WellGeometry& g, double k, double z) {
  Shot st = shoot_left(g, k);
  advance_barrier(st, z, 0.5 * g.barrier_width());
  const long extra = (st.psi != 0.0 && st.psi * st.dpsi <= 0.0) ? 1 : 0;
  return {st.zeros, st.zeros + extra};
}

/// Smallest double E in (lo, hi] with count(E) >= n, by bisection to adjacent doubles.
template <class Count>
double bisect_count(Count&& count, long n, double lo, double hi, double& bracket) {
  if (count(hi) < n) return std::nan("");
  while (count(lo) >= n) {
    lo *= 0.5;
    if (lo < 1e-300) break;
  }
  for (int iter = 0; iter < 4000; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    if (count(mid) >= n)
      hi = mid;
    else
      lo = mid;
  }
  bracket = hi - lo;
  return hi;
}

// ---- closed-form factor scan -----------------------------------------------------------

/// psi(mid) (odd states) and psi'(mid) (even states) of the shooting solution sin(kx),
/// scaled by cosh(q b/2) when that would overflow.
template <class R>
struct Factors {
  R odd;
  R even;
};

template <class R>
Factors<R> parity_factors(R k, R a, R half_b, R v_over_scale) {
  using std::cos, std::sin;
  const R z = v_over_scale - k * k;
  const auto f = fundamental<R>(z, half_b, true);
  const R sa = sin(k * a), ca = cos(k * a);
  return {sa * f.c + k * ca * f.s, z * sa * f.s + k * ca * f.c};
}

template <class R, class F>
R bisect_sign(F&& f, R lo, R hi, R flo) {
  for (int iter = 0; iter < 400; ++iter) {
    const R mid = (lo + hi) / 2;
    if (!(mid > lo && mid < hi)) break;
    const R fm = f(mid);
    if (fm == 0) return mid;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2;
}

template <class R>
struct ScanRoot {
  R k;
  int parity;
};

double default_resolution(const WellGeometry& g) { return kPi / (20.0 * g.total_length()); }

double level_upper_bound(const WellGeometry& g, const PhysicalConstants& pc, int n) {
  const double scale = pc.kinetic_scale();
  const double widest = std::max(g.barrier_left(), g.right_half());
  const double free_n = scale * std::pow(n * kPi / g.total_length(), 2);
  const double well_n = scale * std::pow(n * kPi / widest, 2);
  return std::min(free_n + g.barrier_height(), well_n);
}

template <class R>
std::vector<ScanRoot<R>> closed_form_scan(const WellGeometry& g, const PhysicalConstants& pc,
                                          int n_levels, double dk) {
  if (!g.is_symmetric())
    throw DomainError("the closed-form characteristic function needs a symmetric geometry",
                      "barrier_left");
  const R a = g.barrier_left();
  const R half_b = R(g.barrier_width()) / 2;
  const R v = R(g.barrier_height()) / R(pc.kinetic_scale());
  const double k_limit =
      std::sqrt(level_upper_bound(g, pc, n_levels) / pc.kinetic_scale()) * (1 + 1e-6) + 2 * dk;

  std::vector<ScanRoot<R>> roots;
  R k_prev = R(0.5 * kPi / g.total_length());
  auto f_prev = parity_factors<R>(k_prev, a, half_b, v);
  while (double(k_prev) <= k_limit) {
    const R k_cur = k_prev + R(dk);
    const auto f_cur = parity_factors<R>(k_cur, a, half_b, v);
    auto handle = [&](R fp, R fc, int parity, auto pick) {
      if (fc == 0) {
        roots.push_back({k_cur, parity});
      } else if (fp != 0 && ((fp < 0) != (fc < 0))) {
        auto f = [&](R k) { return pick(parity_factors<R>(k, a, half_b, v)); };
        roots.push_back({bisect_sign<R>(f, k_prev, k_cur, fp), parity});
      }
    };
    handle(f_prev.even, f_cur.even, +1, [](const Factors<R>& f) { return f.even; });
    handle(f_prev.odd, f_cur.odd, -1, [](const Factors<R>& f) { return f.odd; });
    k_prev = k_cur;
    f_prev = f_cur;
    if (static_cast<int>(roots.size()) >= n_levels) break;
  }
  std::stable_sort(roots.begin(), roots.end(), [](const auto& x, const auto& y) {
    return x.k < y.k || (x.k == y.k && x.parity > y.parity);
  });
  // Every level at or below the scanned range must have produced a sign change.
  const double e_top = pc.energy(double(k_prev));
  const long expected = count_levels_below(g, pc, e_top);
  const long found = static_cast<long>(roots.size());
  if (found < n_levels && expected <= found)
    throw SpectrumShortfall(n_levels, static_cast<int>(found),
                            "closed-form scan exhausted its wavenumber range after " +
                                std::to_string(found) + " of " + std::to_string(n_levels) +
                                " levels");
  if (expected != found)
    throw NumericalError("closed-form scan found " + std::to_string(found) +
                         " roots where the level count is " + std::to_string(expected) +
                         " (tangent or double root inside one bracket); use a finer "
                         "bracket_resolution");
  roots.resize(n_levels);
  return roots;
}

// ---- eigenfunctions --------------------------------------------------------------------

double barrier_value(const Eigenstate& st, double s, double b, bool derivative) {
  if (st.basis == BarrierBasis::decaying) {
    const double q = st.q;
    const double u = std::exp(-q * s);
    const double w = std::exp(-q * (b - s));
    if (derivative) return q * (-st.barrier_p * u + st.barrier_q * w);
    return st.barrier_p * u + st.barrier_q * w;
  }
  const auto f = fundamental(st.z, s);
  if (derivative) return st.barrier_p * st.z * f.s + st.barrier_q * f.c;
  return st.barrier_p * f.c + st.barrier_q * f.s;
}

double raw_piece(const Eigenstate& st, const WellGeometry& g, Region region, double x,
                 bool derivative) {
  switch (region) {
    case Region::left_well:
      return derivative ? st.left_amp * st.k * std::cos(st.k * x) : st.left_amp * std::sin(st.k * x);
    case Region::right_well: {
      const double y = g.total_length() - x;
      return derivative ? -st.right_amp * st.k * std::cos(st.k * y)
                        : st.right_amp * std::sin(st.k * y);
    }
    case Region::barrier:
      break;
  }
  if (st.parity != 0 && x > g.center()) {
    const double mirrored = g.total_length() - x;
    const double v = barrier_value(st, mirrored - g.barrier_left(), g.barrier_width(), derivative);
    return derivative ? -st.parity * v : st.parity * v;
  }
  return barrier_value(st, x - g.barrier_left(), g.barrier_width(), derivative);
}

void fix_sign(Eigenstate& st) {
  const double lead = std::fabs(st.left_amp) >= std::fabs(st.right_amp) ? st.left_amp : st.right_amp;
  if (lead < 0.0) {
    st.left_amp = -st.left_amp;
    st.right_amp = -st.right_amp;
    st.barrier_p = -st.barrier_p;
    st.barrier_q = -st.barrier_q;
  }
}

void fill_symmetric(Eigenstate& st, const WellGeometry& g) {
  const double c = g.barrier_left();
  const double sc = std::sin(st.k * c);
  const double kc = st.k * std::cos(st.k * c);
  st.left_amp = 1.0;
  st.right_amp = st.parity;
  if (st.basis == BarrierBasis::decaying) {
    const double e = std::exp(-st.q * g.barrier_width());
    const double value_den = st.parity > 0 ? 1.0 + e : 1.0 - e;
    const double slope_den = st.parity > 0 ? 1.0 - e : 1.0 + e;
    if (std::fabs(sc) >= std::fabs(kc) / st.q)
      st.barrier_p = sc / value_den;
    else
      st.barrier_p = -kc / (st.q * slope_den);
    st.barrier_q = st.parity * st.barrier_p;
  } else {
    st.barrier_p = sc;
    st.barrier_q = kc;
  }
}

void fill_general(Eigenstate& st, const WellGeometry& g) {
  const double k = st.k;
  const double c = g.barrier_left();
  const double r = g.right_half();
  const double b = g.barrier_width();
  const double scale = std::max(k, st.q);
  Eigen::Matrix4d m;
  double u0, du0, ub, dub, w0, dw0, wb, dwb;
  if (st.basis == BarrierBasis::decaying) {
    const double q = st.q;
    const double e = std::exp(-q * b);
    u0 = 1.0, du0 = -q, ub = e, dub = -q * e;
    w0 = e, dw0 = q * e, wb = 1.0, dwb = q;
  } else {
    const auto f = fundamental(st.z, b);
    // second column carries scale*S so both columns are O(1)
    u0 = 1.0, du0 = 0.0, ub = f.c, dub = st.z * f.s;
    w0 = 0.0, dw0 = scale, wb = scale * f.s, dwb = scale * f.c;
  }
  const double inv = 1.0 / scale;
  m << std::sin(k * c), 0.0, -u0, -w0,
      k * std::cos(k * c) * inv, 0.0, -du0 * inv, -dw0 * inv,
      0.0, std::sin(k * r), -ub, -wb,
      0.0, -k * std::cos(k * r) * inv, -dub * inv, -dwb * inv;
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(m, Eigen::ComputeFullV);
  const Eigen::Vector4d v = svd.matrixV().col(3);
  st.left_amp = v(0);
  st.right_amp = v(1);
  st.barrier_p = v(2);
  st.barrier_q = st.basis == BarrierBasis::decaying ? v(3) : v(3) * scale;
}

std::uint64_t mix(std::uint64_t h, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    h ^= (bits >> (8 * i)) & 0xffU;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<Interval> split_at_edges(const WellGeometry& g, Interval iv) {
  std::vector<Interval> pieces;
  double lo = iv.lo;
  for (double edge : {g.barrier_left(), g.barrier_right()}) {
    if (edge > lo && edge < iv.hi) {
      pieces.push_back({lo, edge});
      lo = edge;
    }
  }
  if (iv.hi > lo) pieces.push_back({lo, iv.hi});
  return pieces;
}

/// Quadrature on [lo, hi] for functions oscillating at most like `well_scale` in the wells and
/// `barrier_scale` in the barrier. `strip` > 0 restricts the barrier to edge strips of that width.
QuadratureRule build_rule(const WellGeometry& g, Interval iv, double well_scale,
                          double barrier_scale, double strip, int order_scale) {
  if (iv.hi < iv.lo) throw DomainError("inverted integration interval");
  const int order = 64 * std::max(1, order_scale);
  QuadratureRule rule;
  for (const auto& piece : split_at_edges(g, iv)) {
    const double mid = 0.5 * (piece.lo + piece.hi);
    if (g.region_of(mid) != Region::barrier) {
      rule.append(wavelength_rule(piece, well_scale, order));
      continue;
    }
    if (strip > 0.0 && 2.0 * strip < g.barrier_width()) {
      const Interval left{piece.lo, std::min(piece.hi, g.barrier_left() + strip)};
      const Interval right{std::max(piece.lo, g.barrier_right() - strip), piece.hi};
      if (left.hi > left.lo) rule.append(wavelength_rule(left, barrier_scale, order));
      if (right.hi > right.lo && right.lo >= left.hi)
        rule.append(wavelength_rule(right, barrier_scale, order));
      continue;
    }
    rule.append(wavelength_rule(piece, barrier_scale, order));
  }
  return rule;
}

}  // namespace

// ---- residuals -------------------------------------------------------------------------

double closed_form_residual(const WellGeometry& g, const PhysicalConstants& pc, double energy) {
  check_energy(energy);
  if (!g.is_symmetric())
    throw DomainError("the closed-form characteristic function needs a symmetric geometry",
                      "barrier_left");
  const double k = pc.wavenumber(energy);
  const double z = reduced_z(g, pc, energy);
  const double a = g.barrier_left();
  const auto f = fundamental(z, g.barrier_width(), true);
  return f.c * std::sin(2 * k * a) + (k * k - z) / (2 * k) * f.s * std::cos(2 * k * a) +
         (k * k + z) / (2 * k) * f.s;
}

double transfer_matrix_residual(const WellGeometry& g, const PhysicalConstants& pc,
                                double energy) {
  check_energy(energy);
  const double k = pc.wavenumber(energy);
  const double z = reduced_z(g, pc, energy);
  const double c = g.barrier_left();
  const double r = g.right_half();
  const auto f = fundamental(z, g.barrier_width(), true);
  const double psi = std::sin(k * c);
  const double dpsi = k * std::cos(k * c);
  const double psi1 = psi * f.c + dpsi * f.s;
  const double dpsi1 = psi * z * f.s + dpsi * f.c;
  return psi1 * std::cos(k * r) + dpsi1 / k * std::sin(k * r);
}

double characteristic_value(const WellGeometry& g, const PhysicalConstants& pc, double energy) {
  if (g.is_symmetric()) return closed_form_residual(g, pc, energy);
  return transfer_matrix_residual(g, pc, energy);
}

int count_levels_below(const WellGeometry& g, const PhysicalConstants& pc, double energy) {
  if (std::isnan(energy)) throw DomainError("energy is NaN", "energy");
  if (energy <= 0.0) return 0;
  const double k = pc.wavenumber(energy);
  const double z = reduced_z(g, pc, energy);
  if (g.is_symmetric() && !g.is_free_box()) {
    const auto h = half_counts(g, k, z);
    return static_cast<int>(h.dirichlet + h.neumann);
  }
  return static_cast<int>(full_count(g, k, z));
}

std::vector<PreciseLevel> closed_form_levels_precise(const WellGeometry& g,
                                                     const PhysicalConstants& pc, int n_levels,
                                                     double bracket_resolution) {
  if (n_levels < 1) throw DomainError("n_levels must be >= 1", "n_levels");
  const double dk = bracket_resolution > 0.0 ? bracket_resolution : default_resolution(g);
  const auto roots = closed_form_scan<long double>(g, pc, n_levels, dk);
  const long double scale =
      static_cast<long double>(pc.hbar) * pc.hbar / (2.0L * static_cast<long double>(pc.mass));
  std::vector<PreciseLevel> out;
  for (const auto& r : roots) out.push_back({scale * r.k * r.k, r.parity});
  return out;
}

// ---- spectrum ---------------------------------------------------------------------------

Eigenstate make_eigenstate(const WellGeometry& g, const PhysicalConstants& pc, int index,
                           double energy, int parity) {
  check_energy(energy);
  Eigenstate st;
  st.index = index;
  st.energy = energy;
  st.k = pc.wavenumber(energy);
  st.z = reduced_z(g, pc, energy);
  st.q = std::sqrt(std::fabs(st.z));
  st.regime = st.z > 0.0 ? Regime::below_barrier
                         : (st.z < 0.0 ? Regime::above_barrier : Regime::at_barrier);
  st.parity = g.is_symmetric() ? parity : 0;

  if (g.is_free_box()) {
    st.basis = BarrierBasis::trig_hyperbolic;
    st.left_amp = 1.0;
    st.barrier_p = std::sin(st.k * g.barrier_left());
    st.barrier_q = st.k * std::cos(st.k * g.barrier_left());
    // sin(k(L - x)) = -cos(kL) sin(kx) when sin(kL) = 0
    st.right_amp = -std::cos(st.k * g.total_length()) >= 0.0 ? 1.0 : -1.0;
    st.parity = 0;
    return st;
  }

  st.basis = (st.z > 0.0 && st.q * g.barrier_width() > kDecayingBasisFrom)
                 ? BarrierBasis::decaying
                 : BarrierBasis::trig_hyperbolic;
  if (st.parity != 0)
    fill_symmetric(st, g);
  else
    fill_general(st, g);
  fix_sign(st);
  return st;
}

double eigenfunction_piece(const Eigenstate& st, const WellGeometry& g, Region region, double x,
                           bool derivative) {
  return st.norm_const * raw_piece(st, g, region, x, derivative);
}

double eigenfunction_eval(const Eigenstate& st, const WellGeometry& g, double x) {
  if (!(x >= 0.0 && x <= g.total_length()))
    throw DomainError("x = " + std::to_string(x) + " lies outside the box", "x");
  if (x == 0.0 || x == g.total_length()) return 0.0;
  return st.norm_const * raw_piece(st, g, g.region_of(x), x, false);
}

QuadratureRule state_quadrature(const Eigenstate& st, const WellGeometry& g, Interval iv,
                                int order_scale) {
  const double barrier_scale = std::max(st.k, st.q);
  const double strip = (st.z > 0.0 && st.q * g.barrier_width() > 80.0) ? 40.0 / st.q : 0.0;
  return build_rule(g, iv, st.k, barrier_scale, strip, order_scale);
}

QuadratureRule spectrum_quadrature(const Spectrum& sp, Interval iv, int order_scale) {
  double k_max = 0.0, barrier_scale = 0.0;
  double q_min = std::numeric_limits<double>::infinity();
  bool all_below = true;
  for (const auto& st : sp.states) {
    k_max = std::max(k_max, st.k);
    barrier_scale = std::max({barrier_scale, st.k, st.q});
    if (st.z > 0.0)
      q_min = std::min(q_min, st.q);
    else
      all_below = false;
  }
  const auto& g = sp.geometry;
  const double strip =
      (all_below && !sp.states.empty() && q_min * g.barrier_width() > 80.0) ? 40.0 / q_min : 0.0;
  return build_rule(g, iv, k_max, barrier_scale, strip, order_scale);
}

Eigenstate normalize_state(Eigenstate st, const WellGeometry& g, int order_scale) {
  st.norm_const = 1.0;
  const auto rule = state_quadrature(st, g, {0.0, g.total_length()}, order_scale);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double v = raw_piece(st, g, g.region_of(rule.x[i]), rule.x[i], false);
    sum += rule.w[i] * v * v;
  }
  if (!(sum > 1e-300) || !std::isfinite(sum))
    throw NumericalError("eigenstate " + std::to_string(st.index) +
                         " has a vanishing or non-finite norm integral");
  st.norm_const = 1.0 / std::sqrt(sum);
  return st;
}

Spectrum solve_spectrum(const WellGeometry& g, const PhysicalConstants& pc, int n_levels,
                        const SolveOptions& options) {
  if (n_levels < 1) throw DomainError("n_levels must be >= 1", "n_levels");
  pc.validate();
  Spectrum sp{g, pc, {}, 0.0, 0.0, options.method};
  sp.bracket_resolution =
      options.bracket_resolution > 0.0 ? options.bracket_resolution : default_resolution(g);
  SolveMethod method = options.method;
  if (method == SolveMethod::automatic)
    method = g.is_free_box() ? SolveMethod::free_box : SolveMethod::transfer_matrix;
  if (method == SolveMethod::free_box && !g.is_free_box())
    throw DomainError("free-box spectrum requested for a geometry with a barrier", "method");
  sp.method = method;

  std::vector<std::pair<double, int>> levels;  // energy, parity
  const double scale = pc.kinetic_scale();
  const bool symmetric = g.is_symmetric();

  if (method == SolveMethod::free_box) {
    for (int n = 1; n <= n_levels; ++n) {
      const double k = n * kPi / g.total_length();
      levels.push_back({scale * k * k, 0});
    }
  } else if (method == SolveMethod::closed_form_scan) {
    for (const auto& r : closed_form_scan<double>(g, pc, n_levels, sp.bracket_resolution))
      levels.push_back({scale * r.k * r.k, r.parity});
    sp.root_tolerance = 0.0;
    for (const auto& [e, p] : levels)
      sp.root_tolerance = std::max(sp.root_tolerance, 4.0 * e * 1.1e-16);
  } else if (symmetric) {
    const double m = g.center();
    const double c = g.barrier_left();
    const double v0 = g.barrier_height();
    const int n_even = (n_levels + 1) / 2;
    const int n_odd = n_levels / 2;
    auto neumann = [&](double e) {
      if (e <= 0.0) return 0L;
      return half_counts(g, pc.wavenumber(e), reduced_z(g, pc, e)).neumann;
    };
    auto dirichlet = [&](double e) {
      if (e <= 0.0) return 0L;
      return half_counts(g, pc.wavenumber(e), reduced_z(g, pc, e)).dirichlet;
    };
    std::vector<double> even, odd;
    for (int j = 1; j <= std::max(n_even, n_odd); ++j) {
      const double upper = std::min(scale * std::pow(j * kPi / c, 2),
                                    scale * std::pow(j * kPi / m, 2) + v0);
      const double hi = upper * (1.0 + 1e-9) + 1e-300;
      double bracket = 0.0;
      if (j <= n_even) {
        const double lo = 0.5 * scale * std::pow((j - 0.5) * kPi / m, 2);
        const double e = bisect_count(neumann, j, lo, hi, bracket);
        if (std::isnan(e))
          throw SpectrumShortfall(n_levels, static_cast<int>(even.size() + odd.size()),
                                  "level bracket exhausted before even level " + std::to_string(j));
        even.push_back(e);
        sp.root_tolerance = std::max(sp.root_tolerance, bracket);
      }
      if (j <= n_odd) {
        const double lo = 0.5 * scale * std::pow(j * kPi / m, 2);
        const double e = bisect_count(dirichlet, j, lo, hi, bracket);
        if (std::isnan(e))
          throw SpectrumShortfall(n_levels, static_cast<int>(even.size() + odd.size()),
                                  "level bracket exhausted before odd level " + std::to_string(j));
        odd.push_back(e);
        sp.root_tolerance = std::max(sp.root_tolerance, bracket);
      }
    }
    for (int j = 0; j < n_even; ++j) {
      levels.push_back({even[j], +1});
      if (j < n_odd) levels.push_back({std::max(odd[j], even[j]), -1});
    }
  } else {
    auto count = [&](double e) {
      if (e <= 0.0) return 0L;
      return full_count(g, pc.wavenumber(e), reduced_z(g, pc, e));
    };
    for (int n = 1; n <= n_levels; ++n) {
      const double lo = 0.5 * scale * std::pow(n * kPi / g.total_length(), 2);
      const double hi = level_upper_bound(g, pc, n) * (1.0 + 1e-9) + 1e-300;
      double bracket = 0.0;
      double e = bisect_count(count, n, lo, hi, bracket);
      if (std::isnan(e))
        throw SpectrumShortfall(n_levels, n - 1,
                                "level bracket exhausted after " + std::to_string(n - 1) +
                                    " levels");
      if (!levels.empty()) e = std::max(e, levels.back().first);
      levels.push_back({e, 0});
      sp.root_tolerance = std::max(sp.root_tolerance, bracket);
    }
  }

  sp.states.reserve(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    auto st = make_eigenstate(g, pc, static_cast<int>(i + 1), levels[i].first, levels[i].second);
    if (method == SolveMethod::free_box) st.k = (i + 1) * kPi / g.total_length();
    sp.states.push_back(normalize_state(st, g));
  }
  return sp;
}

std::uint64_t Spectrum::fingerprint() const {
  std::uint64_t h = geometry.hash();
  h = mix(h, constants.hbar);
  h = mix(h, constants.mass);
  for (const auto& st : states) {
    h = mix(h, st.energy);
    h = mix(h, st.norm_const);
  }
  return h;
}

void write_spectrum_csv(std::ostream& out, const Spectrum& sp) {
  CsvWriter csv(out);
  csv.header({"n", "E_n", "k_n", "q_or_kappa", "regime", "C_n"});
  for (const auto& st : sp.states)
    csv.row(st.index, st.energy, st.k, st.q, to_string(st.regime), st.norm_const);
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::below_barrier: return "below";
    case Regime::at_barrier: return "at";
    case Regime::above_barrier: return "above";
  }
  return "?";
}

const char* to_string(SolveMethod method) {
  switch (method) {
    case SolveMethod::automatic: return "automatic";
    case SolveMethod::transfer_matrix: return "transfer_matrix";
    case SolveMethod::closed_form_scan: return "closed_form_scan";
    case SolveMethod::free_box: return "free_box";
  }
  return "?";
}

}  // namespace qtunnel
