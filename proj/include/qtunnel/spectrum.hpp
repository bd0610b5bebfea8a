#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <vector>

#include "qtunnel/constants.hpp"
#include "qtunnel/geometry.hpp"
#include "qtunnel/quadrature.hpp"

namespace qtunnel {

enum class Regime { below_barrier, at_barrier, above_barrier };

/// How the barrier piece of an eigenfunction is stored.
///   trig_hyperbolic: P*C(s) + Q*S(s) with C = cosh(qs), S = sinh(qs)/q (cos/sin for E > V0)
///   decaying:        P*exp(-q s) + Q*exp(-q (b - s))
enum class BarrierBasis { trig_hyperbolic, decaying };

struct Eigenstate {
  int index = 0;        // 1-based
  double energy = 0.0;
  double k = 0.0;
  double q = 0.0;       // decay constant below the barrier top, kappa above it
  Regime regime = Regime::below_barrier;
  double norm_const = 1.0;

  // Unnormalized piecewise recipe:
  //   [0, c]      left_amp  * sin(k x)
  //   [c, c+b]    barrier piece in `basis`, s = x - c
  //   [c+b, L]    right_amp * sin(k (L - x))
  double left_amp = 1.0;
  double right_amp = 1.0;
  BarrierBasis basis = BarrierBasis::trig_hyperbolic;
  double barrier_p = 0.0;
  double barrier_q = 0.0;
  /// (V0 - E) / (hbar^2/2m), the signed squared decay constant.
  double z = 0.0;
  /// +1 even, -1 odd about the box centre, 0 when the geometry is not symmetric.
  /// With nonzero parity the right half is evaluated as parity * psi(L - x).
  int parity = 0;
};

enum class SolveMethod {
  automatic,         // free-box closed form when b = 0 or V0 = 0, transfer matrix otherwise
  transfer_matrix,   // zero-counting of the shooting solution + bisection
  closed_form_scan,  // sign-change scan of the factorized symmetric residual + bisection
  free_box,
};

struct SolveOptions {
  SolveMethod method = SolveMethod::automatic;
  /// Wavenumber step of the closed-form scan; <= 0 selects pi / (20 L).
  double bracket_resolution = 0.0;
};

struct Spectrum {
  WellGeometry geometry;
  PhysicalConstants constants;
  std::vector<Eigenstate> states;
  double bracket_resolution = 0.0;
  /// Largest final bisection bracket, in energy.
  double root_tolerance = 0.0;
  SolveMethod method = SolveMethod::automatic;

  std::size_t size() const { return states.size(); }
  const Eigenstate& operator[](std::size_t i) const { return states[i]; }
  /// Stable identifier built from the geometry, constants and energies.
  std::uint64_t fingerprint() const;
};

/// Residual whose zeros are the eigenvalues. Symmetric geometries use the closed form,
/// displaced barriers the hard-wall mismatch psi(L) of the shooting solution sin(kx).
double characteristic_value(const WellGeometry& geometry, const PhysicalConstants& constants,
                            double energy);
/// cosh(qb) sin(2ka) + (k^2-q^2)/(2qk) sinh(qb) cos(2ka) + (k^2+q^2)/(2qk) sinh(qb),
/// continued through E = V0 and divided by cosh(qb) once qb > 30. Requires a symmetric geometry.
double closed_form_residual(const WellGeometry& geometry, const PhysicalConstants& constants,
                            double energy);
/// psi(L) for psi(0) = 0, psi'(0) = k, carried through the three regions.
double transfer_matrix_residual(const WellGeometry& geometry, const PhysicalConstants& constants,
                                double energy);

/// One level of the closed-form scan carried out in extended precision.
struct PreciseLevel {
  long double energy;
  int parity;  // +1 even, -1 odd
};
/// The n lowest levels of a symmetric geometry from the factorized closed form, with the
/// scan and bisection done in long double. Used where pair gaps approach double roundoff.
std::vector<PreciseLevel> closed_form_levels_precise(const WellGeometry& geometry,
                                                     const PhysicalConstants& constants,
                                                     int n_levels, double bracket_resolution = 0.0);

/// Number of eigenvalues <= energy (zeros of the shooting solution in (0, L]).
int count_levels_below(const WellGeometry& geometry, const PhysicalConstants& constants,
                       double energy);

Spectrum solve_spectrum(const WellGeometry& geometry, const PhysicalConstants& constants,
                        int n_levels, const SolveOptions& options = {});

/// Build an unnormalized eigenstate (norm_const = 1) for an energy known to be an eigenvalue.
Eigenstate make_eigenstate(const WellGeometry& geometry, const PhysicalConstants& constants,
                           int index, double energy, int parity = 0);

/// psi_n(x) including norm_const. Exactly 0 at x = 0 and x = L.
double eigenfunction_eval(const Eigenstate& state, const WellGeometry& geometry, double x);
/// The analytic expression of one region evaluated at x (which may lie outside that region),
/// or its derivative. Used for two-sided continuity checks.
double eigenfunction_piece(const Eigenstate& state, const WellGeometry& geometry, Region region,
                           double x, bool derivative = false);

/// Set norm_const so that the integral of psi^2 over [0, L] is 1.
Eigenstate normalize_state(Eigenstate state, const WellGeometry& geometry, int order_scale = 1);

/// Region-wise quadrature resolving every state of the spectrum on [lo, hi]. Pieces are split
/// at the barrier edges; `order_scale` multiplies the node density.
QuadratureRule spectrum_quadrature(const Spectrum& spectrum, Interval interval,
                                   int order_scale = 1);
QuadratureRule state_quadrature(const Eigenstate& state, const WellGeometry& geometry,
                                Interval interval, int order_scale = 1);

/// Columns n,E_n,k_n,q_or_kappa,regime,C_n.
void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum);

const char* to_string(Regime regime);
const char* to_string(SolveMethod method);

}  // namespace qtunnel
