// Eigenvalues, eigenfunctions and normalization of the well-plus-barrier.

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "qtunnel/error.hpp"
#include "qtunnel/spectrum.hpp"

using namespace qtunnel;

namespace {

const auto kNat = PhysicalConstants::natural();
constexpr double kPi = std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("free box energies and eigenfunctions") {
  const WellGeometry g(73.0, 35.0, 3.0, 0.0);
  const auto sp = solve_spectrum(g, kNat, 30);
  REQUIRE(sp.size() == 30);
  CHECK(sp.method == SolveMethod::free_box);
  CHECK(sp[0].energy == doctest::Approx(1.8520e-3).epsilon(1e-4));
  const double c = std::sqrt(2.0 / 73.0);
  for (int n = 1; n <= 30; ++n) {
    const auto& st = sp[n - 1];
    CHECK(rel(st.energy, std::pow(n * kPi / 73.0, 2)) < 1e-9);
    CHECK(st.norm_const * std::abs(st.left_amp) == doctest::Approx(c).epsilon(1e-12));
    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double x = 73.0 * i / 1000.0;
      worst = std::max(worst, std::abs(eigenfunction_eval(st, g, x) - c * std::sin(n * kPi * x / 73.0)));
    }
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("characteristic function limits") {
  // V0 = 0: the closed form collapses to sin(kL)
  const auto g0 = WellGeometry::symmetric(35, 3, 0.0);
  for (double e : {0.01, 0.2, 0.77, 1.3}) {
    const double k = std::sqrt(e);
    CHECK(closed_form_residual(g0, kNat, e) == doctest::Approx(std::sin(k * 73.0)).scale(1.0).epsilon(1e-12));
  }
  // b = 0: sin(2ka)
  const auto gb = WellGeometry::symmetric(35, 0.0, 360);
  for (double e : {0.01, 0.2, 0.77}) {
    const double k = std::sqrt(e);
    CHECK(closed_form_residual(gb, kNat, e) == doctest::Approx(std::sin(2 * k * 35)).scale(1.0).epsilon(1e-12));
  }
  // symmetric barrier: closed form and the shooting residual agree
  const auto g = WellGeometry::symmetric(35, 3, 7);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.001, 12.0);
  for (int i = 0; i < 200; ++i) {
    const double e = u(rng);
    const double cf = closed_form_residual(g, kNat, e), tm = transfer_matrix_residual(g, kNat, e);
    CHECK(std::abs(cf - tm) <= 1e-9 * std::max({1.0, std::abs(cf), std::abs(tm)}));
  }
  CHECK_THROWS_AS(closed_form_residual(g.with_barrier_left(20), kNat, 1.0), DomainError);
  CHECK_THROWS_AS(characteristic_value(g, kNat, std::nan("")), DomainError);
}

TEST_CASE("residual sign changes sit on the dense-scan roots") {
  // At V0 = 360 the pair members coincide in double precision, so the residual only touches
  // zero there; V0 = 7 has resolvable pairs and real sign changes.
  for (double v0 : {360.0, 7.0}) {
    CAPTURE(v0);
    const double a = 35, b = 3;
    const auto g = WellGeometry::symmetric(a, b, v0);
    const auto ref = oracle::symmetric_levels(a, b, v0, 30, 1e-6);
    REQUIRE(ref.size() == 30);
    // every sign change of the library residual on a grid of dk = 1e-5 brackets an oracle root
    const double dk = 1e-5, kmax = std::sqrt(ref.back()) + 1e-3;
    int changes = 0;
    double fp = characteristic_value(g, kNat, dk * dk);
    for (long i = 2; i * dk <= kmax; ++i) {
      const double k0 = (i - 1) * dk, k1 = i * dk;
      const double f = characteristic_value(g, kNat, k1 * k1);
      if ((f < 0) != (fp < 0)) {
        ++changes;
        bool hit = false;
        for (double e : ref) hit = hit || (e >= k0 * k0 * (1 - 1e-12) && e <= k1 * k1 * (1 + 1e-12));
        CHECK_MESSAGE(hit, "sign change at k = " << k0);
      }
      fp = f;
    }
    if (v0 < 10) CHECK(changes >= 20);
    // and the residual is negligible at each oracle root, relative to its size nearby
    for (double e : ref) {
      const double k = std::sqrt(e);
      const double scale = std::abs(characteristic_value(g, kNat, std::pow(k + 0.05, 2))) +
                           std::abs(characteristic_value(g, kNat, std::pow(k - 0.05, 2)));
      CHECK(std::abs(characteristic_value(g, kNat, e)) < 1e-7 * scale);
    }
  }
}

TEST_CASE("symmetric spectrum matches the dense-scan oracle") {
  for (double v0 : {7.0, 360.0, 5760.0}) {
    CAPTURE(v0);
    const auto g = WellGeometry::symmetric(35, 3, v0);
    const auto ref = oracle::symmetric_levels(35, 3, v0, 30, 1e-6);
    REQUIRE(ref.size() == 30);
    for (auto m : {SolveMethod::transfer_matrix, SolveMethod::closed_form_scan}) {
      const auto sp = solve_spectrum(g, kNat, 30, {m, 0.0});
      REQUIRE(sp.size() == 30);
      for (int n = 0; n < 30; ++n) {
        CAPTURE(n);
        CHECK(rel(sp[n].energy, ref[n]) < 1e-10);
      }
    }
  }
}

TEST_CASE("displaced barrier matches a shooting oracle") {
  const double L = 73, c = 20, b = 3, v0 = 7;
  const WellGeometry g(L, c, b, v0);
  const auto sp = solve_spectrum(g, kNat, 30);
  auto roots = oracle::scan_roots([&](double k) { return oracle::shoot_end(k, L, c, b, v0); }, 1e-6,
                                  3.0, 1e-6, 30);
  REQUIRE(roots.size() == 30);
  for (int n = 0; n < 30; ++n) CHECK(rel(sp[n].energy, roots[n] * roots[n]) < 1e-10);
}

TEST_CASE("opaque barrier levels pair up near the single-well values") {
  const auto g = WellGeometry::symmetric(35, 3, 1e9);
  const auto sp = solve_spectrum(g, kNat, 20);
  REQUIRE(sp.size() == 20);
  for (int p = 0; p < 10; ++p) {
    const double lo = sp[2 * p].energy, hi = sp[2 * p + 1].energy;
    const double next = p < 9 ? sp[2 * p + 2].energy : 2 * hi - sp[2 * p].energy;
    CHECK(hi - lo <= 1e-6 * (next - hi));
    CHECK(rel(sp[2 * p].k, (p + 1) * kPi / 35.0) < 1e-5);
    CHECK(sp[2 * p].parity == 1);
    CHECK(sp[2 * p + 1].parity == -1);
  }
}

TEST_CASE("energies ordered, count function consistent") {
  for (double v0 : {0.5, 7.0, 360.0}) {
    for (double c : {35.0, 20.0, 50.0}) {
      const WellGeometry g(73, c, 3, v0);
      const auto sp = solve_spectrum(g, kNat, 30);
      for (std::size_t n = 1; n < sp.size(); ++n) CHECK(sp[n].energy >= sp[n - 1].energy);
      for (std::size_t n = 0; n < sp.size(); ++n) {
        CHECK(sp[n].index == static_cast<int>(n + 1));
        CHECK(count_levels_below(g, kNat, sp[n].energy * (1 + 1e-9)) >= static_cast<int>(n + 1));
        CHECK(count_levels_below(g, kNat, sp[n].energy * (1 - 1e-9)) <= static_cast<int>(n));
      }
      CHECK(sp.root_tolerance > 0.0);
    }
  }
}

TEST_CASE("eigenfunctions vanish at the walls and count their nodes") {
  for (double c : {35.0, 24.0}) {
    const WellGeometry g(73, c, 3, 7);
    const auto sp = solve_spectrum(g, kNat, 12);
    for (const auto& st : sp.states) {
      CHECK(eigenfunction_eval(st, g, 0.0) == 0.0);
      CHECK(eigenfunction_eval(st, g, 73.0) == 0.0);
      int nodes = 0;
      double prev = eigenfunction_eval(st, g, 1e-3);
      for (int i = 1; i < 73000; ++i) {
        const double v = eigenfunction_eval(st, g, 1e-3 * i + 1e-4);
        if ((v < 0) != (prev < 0)) ++nodes;
        prev = v;
      }
      CHECK(nodes == st.index - 1);
    }
  }
  const auto g = WellGeometry::symmetric(35, 3, 360);
  const auto sp = solve_spectrum(g, kNat, 2);
  CHECK_THROWS_AS(eigenfunction_eval(sp[0], g, 73.5), DomainError);
}

TEST_CASE("continuity across the barrier edges") {
  const auto g = WellGeometry::symmetric(35, 3, 360);
  const auto sp = solve_spectrum(g, kNat, 30);
  const double h = 1e-6;
  for (const auto& st : sp.states) {
    CAPTURE(st.index);
    for (double edge : {g.barrier_left(), g.barrier_right()}) {
      const double left = eigenfunction_eval(st, g, std::nextafter(edge, 0.0));
      const double right = eigenfunction_eval(st, g, std::nextafter(edge, 100.0));
      CHECK(std::abs(left - right) <= 1e-10 * std::max(std::abs(left), std::abs(right)));
      // second-order one-sided stencils
      auto f = [&](double x) { return eigenfunction_eval(st, g, x); };
      const double dl = (3 * f(edge) - 4 * f(edge - h) + f(edge - 2 * h)) / (2 * h);
      const double dr = (-3 * f(edge) + 4 * f(edge + h) - f(edge + 2 * h)) / (2 * h);
      CHECK(std::abs(dl - dr) <= 1e-6 * std::max(std::abs(dl), std::abs(dr)));
    }
    // the analytic pieces agree at the edge as well
    const double c = g.barrier_left();
    const double pl = eigenfunction_piece(st, g, Region::left_well, c);
    const double pb = eigenfunction_piece(st, g, Region::barrier, c);
    CHECK(std::abs(pl - pb) <= 1e-10 * std::max(std::abs(pl), std::abs(pb)));
    const double dpl = eigenfunction_piece(st, g, Region::left_well, c, true);
    const double dpb = eigenfunction_piece(st, g, Region::barrier, c, true);
    CHECK(std::abs(dpl - dpb) <= 1e-8 * std::max(std::abs(dpl), std::abs(dpb)));
  }
}

TEST_CASE("normalization against a Simpson oracle") {
  const auto g = WellGeometry::symmetric(35, 3, 360);
  const auto sp = solve_spectrum(g, kNat, 30);
  const auto regions = g.regions();
  for (const auto& st : sp.states) {
    CAPTURE(st.index);
    double total = 0.0;
    for (const auto& iv : regions)
      total += oracle::simpson([&](double x) { return std::pow(eigenfunction_eval(st, g, x), 2); },
                               iv.lo, iv.hi, 100000);
    CHECK(std::abs(total - 1.0) < 1e-9);
    const auto fine = normalize_state(st, g, 2);
    CHECK(rel(fine.norm_const, st.norm_const) < 1e-12);
  }
}

TEST_CASE("free-box normalization constant") {
  const WellGeometry g(73, 35, 0, 360);
  const auto sp = solve_spectrum(g, kNat, 30);
  for (const auto& st : sp.states)
    CHECK(std::abs(st.norm_const * st.left_amp) == doctest::Approx(std::sqrt(2 / 73.0)).epsilon(1e-12));
  CHECK_THROWS_AS(solve_spectrum(WellGeometry::symmetric(35, 3, 7), kNat, 3, {SolveMethod::free_box, 0}),
                  DomainError);
}

TEST_CASE("paper preset matches the natural spectrum after rescaling") {
  const auto pc = PhysicalConstants::paper();
  const double alpha = pc.kinetic_scale();
  const auto gp = WellGeometry::symmetric(35, 3, 360 * alpha / 1000.0);
  const auto gn = WellGeometry::symmetric(35, 3, 360 / 1000.0);
  const auto sp = solve_spectrum(gp, pc, 20), sn = solve_spectrum(gn, kNat, 20);
  for (int n = 0; n < 20; ++n) CHECK(rel(sp[n].energy / alpha, sn[n].energy) < 1e-11);
}

TEST_CASE("coarse closed-form bracketing reports missed roots") {
  const auto g = WellGeometry::symmetric(35, 3, 7);
  CHECK_THROWS_AS(solve_spectrum(g, kNat, 30, {SolveMethod::closed_form_scan, 0.5}), NumericalError);
  CHECK_THROWS_AS(solve_spectrum(g, kNat, 0), DomainError);
}

TEST_CASE("precise closed form agrees with the double spectrum") {
  // b = 1 keeps the pair gaps (~1e-12 and up) inside long double resolution
  const auto g = WellGeometry::symmetric(35, 1, 360);
  const auto sp = solve_spectrum(g, kNat, 30);
  const auto pl = closed_form_levels_precise(g, kNat, 30);
  REQUIRE(pl.size() == 30);
  for (int n = 0; n < 30; ++n) {
    CHECK(rel(static_cast<double>(pl[n].energy), sp[n].energy) < 1e-12);
    if (n % 2 == 0) {
      CHECK(pl[n].parity == 1);
      CHECK(pl[n + 1].energy > pl[n].energy);
    }
  }
}

TEST_CASE("fingerprint and spectrum csv") {
  const auto g = WellGeometry::symmetric(35, 3, 360);
  const auto a = solve_spectrum(g, kNat, 5), b = solve_spectrum(g, kNat, 5);
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(a.fingerprint() != solve_spectrum(g, kNat, 6).fingerprint());
  std::ostringstream os;
  write_spectrum_csv(os, a);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "n,E_n,k_n,q_or_kappa,regime,C_n");
  int rows = 0;
  while (std::getline(is, line))
    if (!line.empty() && line[0] != '#') ++rows;
  CHECK(rows == 5);
}
