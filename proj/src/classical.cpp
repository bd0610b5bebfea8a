#include "qtunnel/classical.hpp"

#include <cmath>
#include <numbers>

#include "qtunnel/csv.hpp"
#include "qtunnel/error.hpp"
#include "qtunnel/observables.hpp"

namespace qtunnel {
namespace {

double gaussian(double u, double sigma) {
  return std::exp(-u * u / (2.0 * sigma * sigma)) / std::sqrt(2.0 * std::numbers::pi * sigma * sigma);
}

QuadratureRule chamber_rule(const ClassicalPacket& p) {
  const double len = p.wall_right - p.wall_left;
  const int panels = std::max(8, static_cast<int>(std::ceil(2.0 * len / p.width)));
  return composite_rule({p.wall_left, p.wall_right}, panels, 16);
}

}  // namespace

ClassicalPacket ClassicalPacket::from_spec(const PacketSpec& spec, const WellGeometry& g,
                                           const PhysicalConstants& pc, ImageMode mode) {
  ClassicalPacket p;
  p.center0 = spec.center;
  p.width = spec.width;
  p.speed = pc.hbar * spec.momentum_wavenumber / pc.mass;
  p.wall_left = 0.0;
  p.wall_right = g.barrier_left();
  p.mode = mode;
  return p;
}

double classical_density(const ClassicalPacket& p, double x, double t) {
  if (t < 0.0) throw DomainError("classical density needs t >= 0", "t");
  if (x >= p.wall_right || x < p.wall_left) return 0.0;
  const double y = p.center0 + p.speed * t;
  const double a = p.wall_right;
  if (p.mode == ImageMode::two_term) return gaussian(x - y, p.width) + gaussian(x - (2.0 * a - y), p.width);

  // sources at y + m P and -y + m P for every integer m (P = 2a), walls at 0 and a
  const double period = 2.0 * (p.wall_right - p.wall_left);
  const double xl = x - p.wall_left;
  const double yl = y - p.wall_left;
  const long base = std::lround(xl / period);
  auto pair_at = [&](long m) {
    return gaussian(xl - (yl + m * period), p.width) + gaussian(xl - (-yl + m * period), p.width);
  };
  double sum = pair_at(base);
  for (long j = 1; j < 1000000; ++j) {
    const double added = pair_at(base + j) + pair_at(base - j);
    sum += added;
    if (added < 1e-12 && j > std::fabs(yl) / period + 1) break;
  }
  return sum;
}

double classical_mass(const ClassicalPacket& p, double t) {
  const auto rule = chamber_rule(p);
  return rule.integrate([&](double x) { return classical_density(p, x, t); });
}

double classical_variance(const ClassicalPacket& p, double t) {
  const auto rule = chamber_rule(p);
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double d = rule.w[i] * classical_density(p, rule.x[i], t);
    m0 += d;
    m1 += d * rule.x[i];
    m2 += d * rule.x[i] * rule.x[i];
  }
  if (!(m0 > 0.0)) return 0.0;
  const double mean = m1 / m0;
  return std::max(0.0, m2 / m0 - mean * mean);
}

bool first_crossing(const std::vector<double>& times, const std::vector<double>& diff,
                    double threshold, double& t_star) {
  for (std::size_t i = 0; i < diff.size(); ++i) {
    if (diff[i] >= threshold) {
      if (i == 0) {
        t_star = times[0];
      } else {
        const double d0 = diff[i - 1], d1 = diff[i];
        const double f = (threshold - d0) / (d1 - d0);
        t_star = times[i - 1] + f * (times[i] - times[i - 1]);
      }
      return true;
    }
  }
  return false;
}

DivergenceResult divergence_time(const WaveField& field, const ClassicalPacket& packet,
                                 const std::vector<double>& times, double threshold,
                                 DivergenceMetric metric) {
  if (times.empty() || times.front() != 0.0)
    throw DomainError("divergence time grid must start at t = 0", "times");
  if (const auto& src = field.expansion().source) {
    const auto expected = ClassicalPacket::from_spec(*src, field.geometry(), field.constants());
    auto close = [](double x, double y) { return std::fabs(x - y) <= 1e-12 * std::max({1.0, std::fabs(x), std::fabs(y)}); };
    if (!close(expected.center0, packet.center0))
      throw ConfigError("divergence.center", "classical and quantum packets start at different x0");
    if (!close(expected.width, packet.width))
      throw ConfigError("divergence.width", "classical and quantum packets have different sigma");
    if (!close(expected.speed, packet.speed))
      throw ConfigError("divergence.speed", "classical speed differs from hbar k0 / m");
  }
  SeriesOptions opts;
  opts.compute_entropy = false;
  const auto series = time_series(field, times, field.geometry().region(Region::right_well), opts);
  DivergenceResult r;
  r.times = times;
  r.var_qm = series.variance;
  r.var_cl.reserve(times.size());
  r.abs_diff.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double vc = classical_variance(packet, times[i]);
    r.var_cl.push_back(vc);
    const double vq = r.var_qm[i];
    r.abs_diff.push_back(metric == DivergenceMetric::variance_difference
                             ? std::fabs(vq - vc)
                             : std::fabs(std::sqrt(vq) - std::sqrt(vc)));
  }
  r.reached = first_crossing(r.times, r.abs_diff, threshold, r.t_star);
  return r;
}

void write_divergence_csv(std::ostream& out, const DivergenceResult& r) {
  CsvWriter csv(out);
  csv.header({"t", "var_qm", "var_cl", "abs_diff"});
  for (std::size_t i = 0; i < r.times.size(); ++i) csv.row(r.times[i], r.var_qm[i], r.var_cl[i], r.abs_diff[i]);
  out << "# t_star=" << (r.reached ? format_double(r.t_star) : std::string("not_reached")) << '\n';
}

const char* to_string(ImageMode mode) {
  return mode == ImageMode::two_term ? "two_term" : "full_images";
}

const char* to_string(DivergenceMetric metric) {
  return metric == DivergenceMetric::variance_difference ? "variance" : "rms";
}

}  // namespace qtunnel
