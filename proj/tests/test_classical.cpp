// Classical Gaussian baseline and the quantum-classical divergence time.

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "qtunnel/classical.hpp"
#include "qtunnel/error.hpp"

using namespace qtunnel;

namespace {

const auto kNat = PhysicalConstants::natural();
const double kPeak = 1.0 / std::sqrt(2 * std::numbers::pi * 9.0);

double simpson_variance(const ClassicalPacket& p, double t) {
  auto m = [&](int k) {
    return oracle::simpson([&](double x) { return std::pow(x, k) * classical_density(p, x, t); },
                           p.wall_left, std::nextafter(p.wall_right, 0.0), 100000);
  };
  const double m0 = m(0), mean = m(1) / m0;
  return m(2) / m0 - mean * mean;
}

}  // namespace

TEST_CASE("density at the initial centre") {
  ClassicalPacket p;
  CHECK(classical_density(p, 11.0, 0.0) == doctest::Approx(kPeak).epsilon(1e-6));
  CHECK(classical_density(p, 35.0, 0.0) == 0.0);
  CHECK(classical_density(p, 40.0, 0.0) == 0.0);
  CHECK(classical_density(p, -1.0, 0.0) == 0.0);
  CHECK_THROWS_AS(classical_density(p, 11.0, -1.0), DomainError);
}

TEST_CASE("mirror image reinforces the density next to the wall") {
  ClassicalPacket p;
  p.center0 = 35.0 - 0.1;
  CHECK(classical_density(p, p.center0, 0.0) > kPeak);
  CHECK(classical_density(p, p.center0, 5.0) == classical_density(p, p.center0, 0.0));
}

TEST_CASE("mass and variance of a packet far from the walls") {
  ClassicalPacket p;
  p.center0 = 17.5;
  CHECK(classical_mass(p, 0.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(classical_variance(p, 0.0) == doctest::Approx(9.0).epsilon(0.01));
  for (double t : {1.0, 10.0, 100.0}) CHECK(classical_variance(p, t) == classical_variance(p, 0.0));
  // default packet: the image tails are not negligible, so compare against Simpson instead
  const ClassicalPacket d;
  CHECK(classical_variance(d, 0.0) == doctest::Approx(simpson_variance(d, 0.0)).epsilon(1e-9));
}

TEST_CASE("moving packet variance against a Simpson oracle") {
  for (auto mode : {ImageMode::two_term, ImageMode::full_images}) {
    ClassicalPacket p;
    p.speed = 0.8;
    p.mode = mode;
    for (double t : {0.0, 10.0, 25.0, 40.0, 90.0})
      CHECK(classical_variance(p, t) == doctest::Approx(simpson_variance(p, t)).epsilon(1e-8));
  }
}

TEST_CASE("full images conserve probability") {
  ClassicalPacket p;
  p.speed = 1.3;
  p.mode = ImageMode::full_images;
  for (double t : {0.0, 7.0, 31.0, 200.0}) CHECK(classical_mass(p, t) == doctest::Approx(1.0).epsilon(1e-9));
  // two-term mode loses the part reflected off x = 0, which it does not mirror
  p.mode = ImageMode::two_term;
  CHECK(classical_mass(p, 200.0) < 0.5);
}

TEST_CASE("matched packet from the quantum spec") {
  const auto g = WellGeometry::symmetric(35, 3, 360);
  PacketSpec s;
  s.momentum_wavenumber = 0.4;
  const auto p = ClassicalPacket::from_spec(s, g, kNat);
  CHECK(p.center0 == 11.0);
  CHECK(p.width == 3.0);
  CHECK(p.speed == doctest::Approx(0.8));
  CHECK(p.wall_right == 35.0);
}

TEST_CASE("divergence time edge cases") {
  const auto sp = std::make_shared<const Spectrum>(solve_spectrum(WellGeometry::symmetric(35, 3, 360), kNat, 30));
  const WaveField field(sp, project_packet(PacketSpec{}, *sp));
  const auto packet = ClassicalPacket::from_spec(PacketSpec{}, sp->geometry, kNat);
  const std::vector<double> times{0.0, 1.0, 2.0, 3.0};

  const auto zero = divergence_time(field, packet, times, 0.0);
  CHECK(zero.reached);
  CHECK(zero.t_star == 0.0);

  CHECK_THROWS_AS(divergence_time(field, packet, {1.0, 2.0}, 1.0), DomainError);
  auto other = packet;
  other.center0 = 12.0;
  CHECK_THROWS_AS(divergence_time(field, other, times, 1.0), ConfigError);
  other = packet;
  other.speed = 1.0;
  CHECK_THROWS_AS(divergence_time(field, other, times, 1.0), ConfigError);

  // stationary quantum mode against a static classical packet: bounded difference
  std::vector<std::complex<double>> c(30, 0.0);
  c[0] = 1.0;
  const WaveField still(sp, make_expansion(*sp, c));
  std::vector<double> long_times;
  for (int i = 0; i <= 100; ++i) long_times.push_back(3.0 * i);
  const auto r = divergence_time(still, packet, long_times, 1e6);
  CHECK(!r.reached);
  double lo = 1e300, hi = 0;
  for (double d : r.abs_diff) {
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  CHECK(hi - lo < 1e-9);
  std::ostringstream os;
  write_divergence_csv(os, r);
  CHECK(os.str().rfind("# t_star=not_reached\n") != std::string::npos);
  CHECK(os.str().rfind("t,var_qm,var_cl,abs_diff\n", 0) == 0);
}

TEST_CASE("first crossing interpolates linearly") {
  double t = -1;
  CHECK(first_crossing({0, 1, 2, 3}, {0, 1, 3, 5}, 2.0, t));
  CHECK(t == doctest::Approx(1.5));
  CHECK(!first_crossing({0, 1}, {0, 1}, 2.0, t));
  CHECK(first_crossing({0, 1}, {0, 1}, 1.0, t));
  CHECK(t == doctest::Approx(1.0));
}

TEST_CASE("rms metric uses standard deviations") {
  const auto sp = std::make_shared<const Spectrum>(solve_spectrum(WellGeometry::symmetric(35, 3, 7), kNat, 30));
  const WaveField field(sp, project_packet(PacketSpec{}, *sp));
  const auto packet = ClassicalPacket::from_spec(PacketSpec{}, sp->geometry, kNat);
  const std::vector<double> times{0.0, 50.0, 100.0};
  const auto rv = divergence_time(field, packet, times, 1e9, DivergenceMetric::variance_difference);
  const auto rr = divergence_time(field, packet, times, 1e9, DivergenceMetric::rms_difference);
  for (std::size_t i = 0; i < times.size(); ++i) {
    CHECK(rv.abs_diff[i] == doctest::Approx(std::abs(rv.var_qm[i] - rv.var_cl[i])));
    CHECK(rr.abs_diff[i] == doctest::Approx(std::abs(std::sqrt(rr.var_qm[i]) - std::sqrt(rr.var_cl[i]))));
  }
}
