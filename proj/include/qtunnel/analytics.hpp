#pragma once

#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "qtunnel/observables.hpp"

namespace qtunnel {

/// S0 = b sqrt(2 m V0).
double instanton_action(const WellGeometry& geometry, const PhysicalConstants& constants);

/// (4 E0 hbar / S0) exp(-S0 / hbar) with E0 = pair_energy.
double splitting_estimate(const WellGeometry& geometry, const PhysicalConstants& constants,
                          double pair_energy);

struct SplittingReport {
  int pair_index = 1;
  double e_lower = 0.0;
  double e_upper = 0.0;
  double gap = 0.0;
  double estimate_eq11 = 0.0;
  double instanton_action = 0.0;
};

/// Pair p is levels (2p - 1, 2p) of the spectrum; E0 is the pair mean.
SplittingReport splitting_report(const Spectrum& spectrum, int pair_index = 1);
/// Same pair from the closed form in extended precision; the gap keeps its digits even when
/// it is far below the double spacing of the pair energy. Symmetric geometries only.
SplittingReport precise_splitting_report(const WellGeometry& geometry,
                                         const PhysicalConstants& constants, int pair_index = 1);

/// Columns pair_index,e_lower,e_upper,gap,estimate_eq11,instanton_action.
void write_splitting_csv(std::ostream& out, const std::vector<SplittingReport>& reports);

struct TunnelingTimes {
  double t_nieto = 0.0;  // pi hbar / (E_2 - E_1)
  double t_csm = 0.0;    // 25 hbar / (E_res - E_th)
  double t_peres = 0.0;  // 2 pi / (E_res - E_th), or 2 pi hbar / (...) with the flag
  std::vector<std::string> warnings;
};

/// A lowest pair degenerate within root_tolerance gives t_nieto = +inf and a warning.
TunnelingTimes tunneling_time_estimates(const Spectrum& spectrum, double e_res, double e_th,
                                        const PhysicalConstants& constants,
                                        bool peres_with_hbar = false);

inline constexpr double kDefaultDegeneracyRatio = 0.05;

/// flags[i] refers to the gap between levels i+1 and i+2 (1-based levels).
std::vector<double> level_gaps(const std::vector<double>& energies);
/// gap < ratio * mean of the (up to) four neighbouring gaps.
std::vector<bool> degeneracy_flags(const std::vector<double>& gaps, double ratio);

struct PositionScan {
  double position = 0.0;
  bool ok = false;
  std::string error;
  std::vector<double> energies;
  std::vector<double> gaps;
  std::vector<bool> flags;

  int flagged_count() const;
};

struct DegeneracyScan {
  std::vector<double> positions;
  std::vector<PositionScan> entries;
  double degeneracy_ratio = kDefaultDegeneracyRatio;
};

/// Solves every position independently; a failing position is recorded, not fatal.
DegeneracyScan degeneracy_scan(const WellGeometry& base, const PhysicalConstants& constants,
                               const std::vector<double>& positions, int n_levels,
                               double degeneracy_ratio = kDefaultDegeneracyRatio);

/// Columns position,n,E_n,gap_n,flag (gap_n between levels n and n+1).
void write_degeneracy_csv(std::ostream& out, const DegeneracyScan& scan);

/// Collapse flagged runs into clusters: 1 for a near-degenerate group, 0 for a lone level.
std::vector<int> cluster_sequence(const std::vector<bool>& flags);
/// Whether seq[i] == (i % period == phase) for some phase, except at most `defects` entries.
/// Sequences shorter than two periods never match.
bool matches_period(const std::vector<int>& seq, int period, int defects);
/// Smallest period in [1, max_period] matched with at most `defects` mismatches, or 0.
int cluster_period(const std::vector<int>& seq, int max_period = 6, int defects = 1);

/// Commensurate positions: left:right widths 1:3, 1:2, 1:1, 2:1, 3:1 and the midpoints between
/// neighbours, for a box of the base geometry's length and barrier width.
std::vector<double> commensurate_positions(const WellGeometry& base);

struct PositionEntropy {
  double position = 0.0;
  bool ok = false;
  std::string error;
  std::vector<double> entropy;
  double captured_norm = 0.0;
};

std::vector<PositionEntropy> entropy_vs_position(const WellGeometry& base,
                                                 const PhysicalConstants& constants,
                                                 const PacketSpec& packet,
                                                 const std::vector<double>& positions,
                                                 const std::vector<double>& times, int n_levels,
                                                 int entropy_resolution = kDefaultEntropyResolution);

/// Columns position,t,entropy.
void write_entropy_position_csv(std::ostream& out, const std::vector<PositionEntropy>& rows,
                                const std::vector<double>& times);

/// Least-squares slope of values over the first `fraction` of the time window.
double early_window_slope(const std::vector<double>& times, const std::vector<double>& values,
                          double fraction = 0.1);

/// Spearman rank correlation with averaged ranks for ties; NaN when either side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qtunnel
