#include "qtunnel/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "qtunnel/csv.hpp"
#include "qtunnel/error.hpp"

namespace qtunnel {

double instanton_action(const WellGeometry& g, const PhysicalConstants& pc) {
  if (g.barrier_height() < 0.0) throw DomainError("barrier height must be non-negative", "barrier_height");
  return g.barrier_width() * std::sqrt(2.0 * pc.mass * g.barrier_height());
}

double splitting_estimate(const WellGeometry& g, const PhysicalConstants& pc, double pair_energy) {
  const double s0 = instanton_action(g, pc);
  if (!(s0 > 0.0)) throw DomainError("estimate undefined for transparent barrier", "barrier_height");
  return 4.0 * pair_energy * pc.hbar / s0 * std::exp(-s0 / pc.hbar);
}

SplittingReport splitting_report(const Spectrum& sp, int pair_index) {
  const auto lo = static_cast<std::size_t>(2 * pair_index - 2);
  if (pair_index < 1 || lo + 1 >= sp.size()) throw DomainError("pair index outside the spectrum", "pair_index");
  SplittingReport r;
  r.pair_index = pair_index;
  r.e_lower = sp.states[lo].energy;
  r.e_upper = sp.states[lo + 1].energy;
  r.gap = r.e_upper - r.e_lower;
  r.instanton_action = instanton_action(sp.geometry, sp.constants);
  r.estimate_eq11 = splitting_estimate(sp.geometry, sp.constants, 0.5 * (r.e_lower + r.e_upper));
  return r;
}

SplittingReport precise_splitting_report(const WellGeometry& g, const PhysicalConstants& pc,
                                         int pair_index) {
  if (pair_index < 1) throw DomainError("pair index must be >= 1", "pair_index");
  const auto levels = closed_form_levels_precise(g, pc, 2 * pair_index);
  const auto& a = levels[2 * pair_index - 2];
  const auto& b = levels[2 * pair_index - 1];
  SplittingReport r;
  r.pair_index = pair_index;
  r.e_lower = static_cast<double>(a.energy);
  r.e_upper = static_cast<double>(b.energy);
  r.gap = static_cast<double>(b.energy - a.energy);
  r.instanton_action = instanton_action(g, pc);
  r.estimate_eq11 = splitting_estimate(g, pc, static_cast<double>((a.energy + b.energy) / 2));
  return r;
}

void write_splitting_csv(std::ostream& out, const std::vector<SplittingReport>& reports) {
  CsvWriter csv(out);
  csv.header({"pair_index", "e_lower", "e_upper", "gap", "estimate_eq11", "instanton_action"});
  for (const auto& r : reports)
    csv.row(r.pair_index, r.e_lower, r.e_upper, r.gap, r.estimate_eq11, r.instanton_action);
}

TunnelingTimes tunneling_time_estimates(const Spectrum& sp, double e_res, double e_th,
                                        const PhysicalConstants& pc, bool peres_with_hbar) {
  if (sp.size() < 2) throw DomainError("tunneling times need at least two levels", "levels");
  if (!(e_res > e_th)) throw DomainError("E_res must exceed E_th", "e_res");
  TunnelingTimes t;
  const double gap = sp.states[1].energy - sp.states[0].energy;
  if (gap <= sp.root_tolerance) {
    t.t_nieto = std::numeric_limits<double>::infinity();
    t.warnings.push_back("lowest pair is degenerate within the root tolerance; oscillation time is infinite");
  } else {
    t.t_nieto = std::numbers::pi * pc.hbar / gap;
  }
  const double de = e_res - e_th;
  t.t_csm = 25.0 * pc.hbar / de;
  t.t_peres = 2.0 * std::numbers::pi * (peres_with_hbar ? pc.hbar : 1.0) / de;
  return t;
}

std::vector<double> level_gaps(const std::vector<double>& e) {
  std::vector<double> g;
  for (std::size_t i = 1; i < e.size(); ++i) g.push_back(e[i] - e[i - 1]);
  return g;
}

std::vector<bool> degeneracy_flags(const std::vector<double>& gaps, double ratio) {
  const auto n = static_cast<long>(gaps.size());
  std::vector<bool> flags(gaps.size(), false);
  for (long i = 0; i < n; ++i) {
    double sum = 0.0;
    int count = 0;
    for (long j : {i - 2, i - 1, i + 1, i + 2}) {
      if (j < 0 || j >= n) continue;
      sum += gaps[j];
      ++count;
    }
    if (count == 0) continue;
    flags[i] = gaps[i] < ratio * (sum / count);
  }
  return flags;
}

int PositionScan::flagged_count() const {
  return static_cast<int>(std::count(flags.begin(), flags.end(), true));
}

DegeneracyScan degeneracy_scan(const WellGeometry& base, const PhysicalConstants& pc,
                               const std::vector<double>& positions, int n_levels, double ratio) {
  DegeneracyScan scan;
  scan.positions = positions;
  scan.degeneracy_ratio = ratio;
  for (double c : positions) {
    PositionScan entry;
    entry.position = c;
    try {
      const auto sp = solve_spectrum(base.with_barrier_left(c), pc, n_levels);
      for (const auto& st : sp.states) entry.energies.push_back(st.energy);
      entry.gaps = level_gaps(entry.energies);
      entry.flags = degeneracy_flags(entry.gaps, ratio);
      entry.ok = true;
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    scan.entries.push_back(std::move(entry));
  }
  return scan;
}

void write_degeneracy_csv(std::ostream& out, const DegeneracyScan& scan) {
  CsvWriter csv(out);
  csv.header({"position", "n", "E_n", "gap_n", "flag"});
  for (const auto& e : scan.entries) {
    if (!e.ok) {
      csv.comment("position=" + format_double(e.position) + " failed: " + e.error);
      continue;
    }
    for (std::size_t n = 0; n < e.energies.size(); ++n) {
      const bool has_gap = n < e.gaps.size();
      csv.row(e.position, static_cast<int>(n + 1), e.energies[n],
              has_gap ? e.gaps[n] : std::nan(""), has_gap ? (e.flags[n] ? 1 : 0) : 0);
    }
  }
}

std::vector<int> cluster_sequence(const std::vector<bool>& flags) {
  std::vector<int> seq;
  const std::size_t levels = flags.size() + 1;
  std::size_t i = 0;
  while (i < levels) {
    std::size_t j = i;
    while (j < flags.size() && flags[j]) ++j;
    seq.push_back(j > i ? 1 : 0);
    i = j + 1;
  }
  return seq;
}

bool matches_period(const std::vector<int>& seq, int period, int defects) {
  // a period needs two full cycles before it says anything
  if (period < 1 || seq.size() < 2 * static_cast<std::size_t>(period)) return false;
  for (int phase = 0; phase < period; ++phase) {
    int bad = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const int expected = static_cast<int>(i % period) == phase ? 1 : 0;
      if (seq[i] != expected) ++bad;
    }
    if (bad <= defects) return true;
  }
  return false;
}

int cluster_period(const std::vector<int>& seq, int max_period, int defects) {
  for (int p = 1; p <= max_period; ++p)
    if (matches_period(seq, p, defects)) return p;
  return 0;
}

std::vector<double> commensurate_positions(const WellGeometry& base) {
  const double span = base.total_length() - base.barrier_width();
  // left fraction of the free length for 1:3, 1:2, 1:1, 2:1, 3:1
  const std::vector<double> fractions{0.25, 1.0 / 3.0, 0.5, 2.0 / 3.0, 0.75};
  std::vector<double> out;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    out.push_back(fractions[i] * span);
    if (i + 1 < fractions.size()) out.push_back(0.5 * (fractions[i] + fractions[i + 1]) * span);
  }
  return out;
}

std::vector<PositionEntropy> entropy_vs_position(const WellGeometry& base,
                                                 const PhysicalConstants& pc,
                                                 const PacketSpec& packet,
                                                 const std::vector<double>& positions,
                                                 const std::vector<double>& times, int n_levels,
                                                 int resolution) {
  std::vector<PositionEntropy> out;
  for (double c : positions) {
    PositionEntropy row;
    row.position = c;
    try {
      const auto g = base.with_barrier_left(c);
      if (!(packet.center < g.barrier_left()))
        throw DomainError("packet centre must stay left of the barrier", "packet.center");
      auto sp = std::make_shared<const Spectrum>(solve_spectrum(g, pc, n_levels));
      const WaveField field(sp, project_packet(packet, *sp));
      row.captured_norm = field.captured_norm();
      const SampledBasis basis(*sp, resolution);
      for (double t : times) row.entropy.push_back(spatial_entropy(basis, field.coefficients_at(t)));
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    out.push_back(std::move(row));
  }
  return out;
}

void write_entropy_position_csv(std::ostream& out, const std::vector<PositionEntropy>& rows,
                                const std::vector<double>& times) {
  CsvWriter csv(out);
  csv.header({"position", "t", "entropy"});
  for (const auto& r : rows) {
    if (!r.ok) {
      csv.comment("position=" + format_double(r.position) + " failed: " + r.error);
      continue;
    }
    for (std::size_t i = 0; i < times.size(); ++i) csv.row(r.position, times[i], r.entropy[i]);
  }
}

double early_window_slope(const std::vector<double>& t, const std::vector<double>& v, double fraction) {
  if (t.size() != v.size() || t.size() < 2) throw DomainError("slope needs matching series of length >= 2");
  const double cutoff = t.front() + fraction * (t.back() - t.front());
  double st = 0.0, sv = 0.0;
  std::size_t n = 0;
  while (n < t.size() && t[n] <= cutoff) {
    st += t[n];
    sv += v[n];
    ++n;
  }
  if (n < 2) throw DomainError("early window holds fewer than two samples", "fraction");
  const double mt = st / n, mv = sv / n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (t[i] - mt) * (v[i] - mv);
    den += (t[i] - mt) * (t[i] - mt);
  }
  return num / den;
}

namespace {

std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("spearman needs two equal series of length >= 2");
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nan("");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace qtunnel
