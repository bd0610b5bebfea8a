#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qtunnel/classical.hpp"
#include "qtunnel/constants.hpp"
#include "qtunnel/geometry.hpp"
#include "qtunnel/packet.hpp"
#include "qtunnel/spectrum.hpp"

namespace qtunnel {

enum class SweepAxis { none, barrier_height, barrier_width, barrier_position };

enum class Output { rhs_prob, entropy, variance, divergence, degeneracy, splitting };

struct ExperimentConfig {
  Preset preset = Preset::natural;

  // geometry
  double half_width = 35.0;
  double barrier_width = 3.0;
  double barrier_height = 360.0;
  std::optional<double> barrier_left;  // default: half_width
  std::optional<double> total_length;  // default: 2 half_width + barrier_width

  PacketSpec packet;

  int n_levels = 30;
  SolveMethod method = SolveMethod::automatic;
  double bracket_resolution = 0.0;

  double t_start = 0.0;
  std::optional<double> t_end;  // default depends on the preset
  int n_samples = 2001;

  std::optional<Interval> rhs_region;  // empty: auto, [c+b, L]
  int entropy_resolution = 1024;

  double divergence_threshold = 125.58;
  DivergenceMetric divergence_metric = DivergenceMetric::variance_difference;
  ImageMode classical_mode = ImageMode::two_term;

  std::vector<double> scan_positions;  // empty: commensurate set
  double degeneracy_ratio = 0.05;
  bool scan_entropy = false;

  std::optional<double> e_res;
  std::optional<double> e_th;
  bool peres_with_hbar = false;

  SweepAxis sweep_axis = SweepAxis::none;
  std::vector<double> sweep_values;

  std::vector<Output> outputs{Output::rhs_prob, Output::entropy, Output::variance};

  PhysicalConstants constants() const { return PhysicalConstants::from_preset(preset); }
  WellGeometry geometry() const;
  /// Geometry of one sweep point (the base geometry when there is no sweep).
  WellGeometry geometry_at(double sweep_value) const;
  double time_end() const;
  std::vector<double> times() const;
  Interval rhs_region_for(const WellGeometry& geometry) const;
  bool wants(Output output) const;
  std::size_t point_count() const { return sweep_axis == SweepAxis::none ? 1 : sweep_values.size(); }

  /// Re-check every invariant; throws ConfigError naming the offending field.
  void validate() const;
};

/// Default end of the time window: 300 (natural) or 0.05 ps (paper).
double default_time_end(Preset preset);

/// Parse the key = value text format (see README). `source` labels error positions.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(to_config_text(c)) reproduces c.
std::string to_config_text(const ExperimentConfig& config);

/// Names accepted in each section, in documentation order.
std::vector<std::pair<std::string, std::vector<std::string>>> config_schema();

const char* to_string(SweepAxis axis);
const char* to_string(Output output);

}  // namespace qtunnel
