#pragma once

#include <ostream>
#include <vector>

#include "qtunnel/packet.hpp"

namespace qtunnel {

enum class ImageMode {
  two_term,     // direct Gaussian plus its mirror image about the barrier wall
  full_images,  // reflections about both walls (period 2a), conserves probability
};

/// Gaussian probability density translating at speed v in the left chamber [0, a).
struct ClassicalPacket {
  double center0 = 11.0;
  double width = 3.0;
  double speed = 0.0;
  double wall_left = 0.0;
  double wall_right = 35.0;
  ImageMode mode = ImageMode::two_term;

  /// Same x0 and sigma as the quantum packet, v = hbar k0 / m, wall at the barrier's left edge.
  static ClassicalPacket from_spec(const PacketSpec& spec, const WellGeometry& geometry,
                                   const PhysicalConstants& constants,
                                   ImageMode mode = ImageMode::two_term);
};

/// P(x, t) on [0, a); 0 for x >= a (and x < 0).
double classical_density(const ClassicalPacket& packet, double x, double t);
/// Integral of P over [0, a).
double classical_mass(const ClassicalPacket& packet, double t);
/// Variance of P over [0, a) normalized by its integral.
double classical_variance(const ClassicalPacket& packet, double t);

enum class DivergenceMetric {
  variance_difference,  // |var_qm - var_cl|
  rms_difference,       // |sqrt(var_qm) - sqrt(var_cl)|
};

struct DivergenceResult {
  std::vector<double> times;
  std::vector<double> var_qm;
  std::vector<double> var_cl;
  std::vector<double> abs_diff;
  bool reached = false;
  double t_star = 0.0;
};

/// First time the chosen difference reaches `threshold`, linearly interpolated between samples.
/// Times must start at 0 and increase strictly. Mismatched packets raise ConfigError.
DivergenceResult divergence_time(const WaveField& field, const ClassicalPacket& packet,
                                 const std::vector<double>& times, double threshold,
                                 DivergenceMetric metric = DivergenceMetric::variance_difference);

/// Crossing time of an existing difference series.
bool first_crossing(const std::vector<double>& times, const std::vector<double>& diff,
                    double threshold, double& t_star);

/// Header t,var_qm,var_cl,abs_diff and a trailing "# t_star=..." line.
void write_divergence_csv(std::ostream& out, const DivergenceResult& result);

const char* to_string(ImageMode mode);
const char* to_string(DivergenceMetric metric);

}  // namespace qtunnel
