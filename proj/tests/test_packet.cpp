// Projection of the initial Gaussian and the evolved wave field.

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "qtunnel/error.hpp"
#include "qtunnel/packet.hpp"

using namespace qtunnel;

namespace {

const auto kNat = PhysicalConstants::natural();
const double kPeak = 1.0 / std::sqrt(2 * std::numbers::pi * 9.0);

std::shared_ptr<const Spectrum> default_spectrum(int n = 30) {
  return std::make_shared<const Spectrum>(solve_spectrum(WellGeometry::symmetric(35, 3, 360), kNat, n));
}

}  // namespace

TEST_CASE("projecting an eigenfunction recovers a unit coefficient") {
  const auto sp = default_spectrum();
  const auto& g = sp->geometry;
  for (int target : {1, 3, 8, 17}) {
    const auto a = project_function(*sp, [&](double x) {
      return std::complex<double>(eigenfunction_eval((*sp)[target - 1], g, x), 0.0);
    });
    for (int n = 0; n < 30; ++n) {
      if (n == target - 1)
        CHECK(std::abs(a[n] - 1.0) < 1e-9);
      else
        CHECK(std::abs(a[n]) < 1e-9);
    }
  }
}

TEST_CASE("default packet is captured by thirty levels") {
  const auto sp = default_spectrum();
  const auto ex = project_packet(PacketSpec{}, *sp);
  CHECK(ex.captured_norm >= 0.999);
  CHECK(ex.captured_norm <= 1.0 + 1e-9);
  CHECK(ex.spectrum_id == sp->fingerprint());
  // a 60-level reference only adds the missing tail
  const auto ref = project_packet(PacketSpec{}, *default_spectrum(60));
  CHECK(ref.captured_norm >= ex.captured_norm);
  CHECK(ref.captured_norm <= 1.0 + 1e-9);
  for (int n = 0; n < 30; ++n) CHECK(std::abs(ref.coefficients[n] - ex.coefficients[n]) < 1e-10);
  // direct quadrature of |A_n|^2 sum against the Gaussian norm on [0, a]
  const double gauss = oracle::simpson([](double x) { return std::norm(PacketSpec{}(x)); }, 0, 35, 100000);
  CHECK(ref.captured_norm == doctest::Approx(gauss).epsilon(1e-4));
}

TEST_CASE("unresolvable momentum is an error") {
  const auto sp = default_spectrum();
  PacketSpec fast;
  fast.momentum_wavenumber = 20.0 * (*sp)[29].k;
  CHECK_THROWS_AS(project_packet(fast, *sp), NumericalError);
  PacketSpec bad;
  bad.width = -1;
  CHECK_THROWS_AS(project_packet(bad, *sp), DomainError);
  bad = PacketSpec{};
  bad.center = 80;
  CHECK_THROWS_AS(project_packet(bad, *sp), DomainError);
}

TEST_CASE("packet warnings") {
  const auto g = WellGeometry::symmetric(35, 3, 360);
  CHECK(PacketSpec{}.warnings(g).empty());
  PacketSpec near_wall;
  near_wall.center = 2;
  CHECK(!near_wall.warnings(g).empty());
}

TEST_CASE("initial field reproduces the Gaussian") {
  const auto sp = default_spectrum();
  const WaveField field(sp, project_packet(PacketSpec{}, *sp));
  CHECK(std::norm(wavefunction_at(field, 11.0, 0.0)) == doctest::Approx(kPeak).epsilon(0.01));
  CHECK(kPeak == doctest::Approx(0.1330).epsilon(1e-3));
  std::vector<double> grid;
  for (int i = 0; i <= 700; ++i) grid.push_back(35.0 * i / 700);
  const auto rho = density_profile(field, grid, 0.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    worst = std::max(worst, std::abs(rho[i] - std::norm(PacketSpec{}(grid[i]))));
  CHECK(worst < 0.01 * kPeak);
  // kinetic energy of a k0 = 0 Gaussian: hbar^2 / (8 m sigma^2)
  CHECK(field.energy_expectation() == doctest::Approx(1.0 / 36.0).epsilon(0.02));
}

TEST_CASE("wall condition and norm of the profile") {
  const auto sp = default_spectrum();
  const WaveField field(sp, project_packet(PacketSpec{}, *sp));
  const auto& g = sp->geometry;
  for (double t : {0.0, 1.0, 17.3, 250.0}) {
    CHECK(std::abs(wavefunction_at(field, 0.0, t)) == 0.0);
    CHECK(std::abs(wavefunction_at(field, g.total_length(), t)) == 0.0);
    // profile integral over a fine grid, region by region
    double total = 0.0;
    for (const auto& iv : g.regions()) {
      const int n = 20000;
      std::vector<double> grid;
      for (int i = 0; i <= n; ++i) grid.push_back(iv.lo + iv.length() * i / n);
      total += oracle::simpson_samples(density_profile(field, grid, t), iv.length() / n);
    }
    CHECK(total == doctest::Approx(field.captured_norm()).epsilon(1e-6));
  }
}

TEST_CASE("a single mode is stationary") {
  const auto sp = default_spectrum();
  std::vector<std::complex<double>> c(30, 0.0);
  c[2] = 1.0;
  const WaveField field(sp, make_expansion(*sp, c));
  CHECK(field.captured_norm() == doctest::Approx(1.0));
  std::vector<double> grid;
  for (int i = 0; i <= 146; ++i) grid.push_back(0.5 * i);
  const auto p0 = density_profile(field, grid, 0.0), p1 = density_profile(field, grid, 17.3);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(p0[i] == doctest::Approx(p1[i]).epsilon(1e-12).scale(1e-12));
    CHECK(p0[i] == doctest::Approx(std::pow(eigenfunction_eval((*sp)[2], sp->geometry, grid[i]), 2))
                       .epsilon(1e-12)
                       .scale(1e-12));
  }
  CHECK_THROWS_AS(make_expansion(*sp, std::vector<std::complex<double>>(3)), DomainError);
}

TEST_CASE("field refuses an expansion from another spectrum") {
  const auto sp = default_spectrum();
  const auto other = std::make_shared<const Spectrum>(
      solve_spectrum(WellGeometry::symmetric(35, 3, 7), kNat, 30));
  const auto ex = project_packet(PacketSpec{}, *sp);
  CHECK_THROWS_AS(WaveField(other, ex), DomainError);
  CHECK_NOTHROW(WaveField(sp, ex));
}

TEST_CASE("coefficients rotate with the level energies") {
  const auto sp = default_spectrum();
  const WaveField field(sp, project_packet(PacketSpec{}, *sp));
  const auto c0 = field.coefficients_at(0.0), c1 = field.coefficients_at(3.7);
  for (int n = 0; n < 30; ++n) {
    CHECK(std::abs(c1[n]) == doctest::Approx(std::abs(c0[n])).epsilon(1e-14).scale(1e-14));
    const auto expect = c0[n] * std::exp(std::complex<double>(0, -(*sp)[n].energy * 3.7));
    CHECK(std::abs(c1[n] - expect) < 1e-14);
  }
}

TEST_CASE("profile csv layout") {
  const auto sp = default_spectrum(10);
  std::vector<std::complex<double>> c(10, 0.0);
  c[0] = 1.0;
  const WaveField field(sp, make_expansion(*sp, c));
  std::ostringstream os;
  write_profile_csv(os, field, {1.0, 2.0, 3.0}, {0.0, 1.0});
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "x,t,re_psi,im_psi,density");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 6);
}
