#include "qtunnel/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qtunnel/analytics.hpp"
#include "qtunnel/classical.hpp"
#include "qtunnel/csv.hpp"
#include "qtunnel/error.hpp"
#include "qtunnel/observables.hpp"

namespace qtunnel {
namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

class StageTimer {
 public:
  explicit StageTimer(PointRecord& rec) : rec_(rec) {}
  template <class F>
  auto operator()(const std::string& stage, F&& f) {
    const auto t0 = Clock::now();
    struct Record {
      PointRecord& rec;
      std::string stage;
      Clock::time_point t0;
      ~Record() {
        rec.stage_seconds.emplace_back(stage, std::chrono::duration<double>(Clock::now() - t0).count());
      }
    } guard{rec_, stage, t0};
    return f();
  }

 private:
  PointRecord& rec_;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

template <class Writer>
void emit(const std::filesystem::path& dir, PointRecord& rec, const std::string& name, Writer&& writer) {
  std::ostringstream text;
  writer(text);
  write_file(dir / name, text.str());
  rec.files.push_back(name);
}

void run_point(const ExperimentConfig& cfg, const std::filesystem::path& dir, PointRecord& rec) {
  StageTimer stage(rec);
  const auto pc = cfg.constants();
  const auto g = cfg.sweep_axis == SweepAxis::none ? cfg.geometry() : cfg.geometry_at(rec.sweep_value);
  SolveOptions solve_opts;
  solve_opts.method = cfg.method;
  solve_opts.bracket_resolution = cfg.bracket_resolution;

  auto sp = stage("solve", [&] {
    return std::make_shared<const Spectrum>(solve_spectrum(g, pc, cfg.n_levels, solve_opts));
  });
  emit(dir, rec, point_file("spectrum", rec.index), [&](std::ostream& o) { write_spectrum_csv(o, *sp); });

  const bool series = cfg.wants(Output::rhs_prob) || cfg.wants(Output::entropy) || cfg.wants(Output::variance);
  const bool divergence = cfg.wants(Output::divergence);
  const auto times = cfg.times();

  if (series || divergence) {
    auto expansion = stage("project", [&] { return project_packet(cfg.packet, *sp); });
    rec.captured_norm = expansion.captured_norm;
    for (const auto& w : expansion.warnings) rec.warnings.push_back(w);
    const WaveField field(sp, std::move(expansion));

    if (series) {
      SeriesOptions opts;
      opts.entropy_resolution = cfg.entropy_resolution;
      opts.compute_entropy = cfg.wants(Output::entropy);
      const auto obs = stage("observables", [&] { return time_series(field, times, cfg.rhs_region_for(g), opts); });
      emit(dir, rec, point_file("observables", rec.index), [&](std::ostream& o) { write_observables_csv(o, obs); });
    }
    if (divergence) {
      const auto packet = ClassicalPacket::from_spec(cfg.packet, g, pc, cfg.classical_mode);
      if (cfg.packet.momentum_wavenumber == 0.0)
        rec.warnings.push_back("classical packet speed is 0 because k0 = 0");
      const auto result = stage("divergence", [&] {
        return divergence_time(field, packet, times, cfg.divergence_threshold, cfg.divergence_metric);
      });
      if (result.reached) rec.results["t_star"] = result.t_star;
      emit(dir, rec, point_file("divergence", rec.index), [&](std::ostream& o) { write_divergence_csv(o, result); });
    }
  }

  if (cfg.wants(Output::splitting)) {
    stage("splitting", [&] {
      std::vector<SplittingReport> reports;
      if (g.is_free_box()) {
        rec.warnings.push_back("splitting skipped: free box has no barrier");
      } else if (g.is_symmetric()) {
        reports.push_back(precise_splitting_report(g, pc, 1));
      } else {
        reports.push_back(splitting_report(*sp, 1));
      }
      if (!reports.empty()) {
        rec.results["pair_gap"] = reports[0].gap;
        rec.results["eq11_estimate"] = reports[0].estimate_eq11;
        rec.results["instanton_action"] = reports[0].instanton_action;
      }
      if (cfg.e_res && cfg.e_th) {
        const auto t = tunneling_time_estimates(*sp, *cfg.e_res, *cfg.e_th, pc, cfg.peres_with_hbar);
        rec.results["t_nieto"] = t.t_nieto;
        rec.results["t_csm"] = t.t_csm;
        rec.results["t_peres"] = t.t_peres;
        for (const auto& w : t.warnings) rec.warnings.push_back(w);
      } else if (sp->size() >= 2) {
        const double gap = sp->states[1].energy - sp->states[0].energy;
        rec.results["t_nieto"] = gap > sp->root_tolerance ? std::numbers::pi * pc.hbar / gap : std::numeric_limits<double>::infinity();
      }
      emit(dir, rec, point_file("splitting", rec.index), [&](std::ostream& o) { write_splitting_csv(o, reports); });
      return 0;
    });
  }

  if (cfg.wants(Output::degeneracy)) {
    const auto positions = cfg.scan_positions.empty() ? commensurate_positions(g) : cfg.scan_positions;
    const auto scan = stage("degeneracy", [&] {
      return degeneracy_scan(g, pc, positions, cfg.n_levels, cfg.degeneracy_ratio);
    });
    for (const auto& e : scan.entries)
      if (!e.ok) rec.warnings.push_back("scan position " + format_double(e.position) + " failed: " + e.error);
    emit(dir, rec, point_file("degeneracy", rec.index), [&](std::ostream& o) { write_degeneracy_csv(o, scan); });
    if (cfg.scan_entropy) {
      const auto rows = stage("entropy_position", [&] {
        return entropy_vs_position(g, pc, cfg.packet, positions, times, cfg.n_levels, cfg.entropy_resolution);
      });
      emit(dir, rec, point_file("entropy_position", rec.index),
           [&](std::ostream& o) { write_entropy_position_csv(o, rows, times); });
    }
  }
  rec.ok = true;
}

json double_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string point_file(const std::string& stem, std::size_t index) {
  std::ostringstream out;
  out << stem << '_' << std::setw(3) << std::setfill('0') << index << ".csv";
  return out.str();
}

std::size_t RunManifest::failed() const {
  std::size_t n = 0;
  for (const auto& p : points) n += p.ok ? 0 : 1;
  return n;
}

int exit_code(const RunManifest& m) {
  const auto failed = m.failed();
  if (failed == 0) return 0;
  return failed == m.points.size() ? 2 : 3;
}

RunManifest run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                           const RunOptions& options) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  const std::string started = utc_now();
  const auto t0 = Clock::now();

  RunManifest manifest;
  manifest.points.resize(cfg.point_count());
  for (std::size_t i = 0; i < manifest.points.size(); ++i) {
    manifest.points[i].index = i;
    manifest.points[i].sweep_value = cfg.sweep_axis == SweepAxis::none ? 0.0 : cfg.sweep_values[i];
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < manifest.points.size(); i = next++) {
      auto& rec = manifest.points[i];
      try {
        run_point(cfg, out_dir, rec);
      } catch (const ConfigError& e) {
        rec.error = e.what(), rec.error_kind = "config";
      } catch (const DomainError& e) {
        rec.error = e.what(), rec.error_kind = "domain";
      } catch (const NumericalError& e) {
        rec.error = e.what(), rec.error_kind = "numerical";
      } catch (const std::exception& e) {
        rec.error = e.what(), rec.error_kind = "other";
      }
      if (!rec.ok) {
        std::error_code ec;
        for (const auto& f : rec.files) std::filesystem::remove(out_dir / f, ec);
        rec.files.clear();
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(manifest.points.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  json j;
  j["library_version"] = QTUNNEL_VERSION;
  j["config"] = to_config_text(cfg);
  const auto labels = unit_labels(cfg.preset);
  j["units"] = {{"energy", labels.energy}, {"length", labels.length}, {"time", labels.time}};
  j["sweep_axis"] = to_string(cfg.sweep_axis);
  json points = json::array();
  json timing = json::array();
  for (const auto& p : manifest.points) {
    json jp;
    jp["index"] = p.index;
    if (cfg.sweep_axis != SweepAxis::none) jp["sweep_value"] = p.sweep_value;
    jp["status"] = p.ok ? "ok" : "failed";
    if (!p.ok) {
      jp["error_kind"] = p.error_kind;
      jp["error"] = p.error;
    }
    jp["captured_norm"] = double_or_null(p.captured_norm);
    jp["files"] = p.files;
    jp["warnings"] = p.warnings;
    json results = json::object();
    for (const auto& [k, v] : p.results) results[k] = double_or_null(v);
    jp["results"] = results;
    points.push_back(jp);
    json stages = json::object();
    for (const auto& [name, sec] : p.stage_seconds) stages[name] = sec;
    timing.push_back({{"index", p.index}, {"stage_seconds", stages}});
  }
  j["points"] = points;
  j["failed_points"] = manifest.failed();
  // everything that changes between identical runs lives here
  j["volatile"] = {{"started_utc", started},
                   {"finished_utc", utc_now()},
                   {"wall_clock_seconds", std::chrono::duration<double>(Clock::now() - t0).count()},
                   {"points", timing}};
  manifest.manifest_path = out_dir / "manifest.json";
  write_file(manifest.manifest_path, j.dump(2) + "\n");
  return manifest;
}

std::string describe(const ExperimentConfig& cfg) {
  cfg.validate();
  std::ostringstream out;
  const auto pc = cfg.constants();
  const auto g = cfg.geometry();
  const auto labels = unit_labels(cfg.preset);
  out << "preset: " << to_string(cfg.preset) << " (hbar = " << format_double(pc.hbar)
      << ", mass = " << format_double(pc.mass) << ", hbar^2/2m = " << format_double(pc.kinetic_scale()) << ")\n";
  out << "units: energy " << labels.energy << ", length " << labels.length << ", time " << labels.time << "\n";
  out << "geometry: L = " << format_double(g.total_length()) << ", barrier [" << format_double(g.barrier_left())
      << ", " << format_double(g.barrier_right()) << "], V0 = " << format_double(g.barrier_height())
      << (g.is_symmetric() ? " (symmetric)" : " (displaced)") << "\n";
  out << "packet: x0 = " << format_double(cfg.packet.center) << ", sigma = " << format_double(cfg.packet.width)
      << ", k0 = " << format_double(cfg.packet.momentum_wavenumber) << "\n";
  out << "time window: [" << format_double(cfg.t_start) << ", " << format_double(cfg.time_end()) << "], "
      << cfg.n_samples << " samples\n";
  if (cfg.sweep_axis != SweepAxis::none) {
    out << "sweep: " << to_string(cfg.sweep_axis) << " over";
    for (double v : cfg.sweep_values) out << ' ' << format_double(v);
    out << "\n";
  }

  std::vector<std::string> warnings;
  if (g.is_free_box()) warnings.push_back("free box: closed-form spectrum in use");
  for (const auto& w : cfg.packet.warnings(g)) warnings.push_back("wall proximity: " + w);
  warnings.push_back(
      "length unit of the half-width is not fixed by the model; absolute time and entropy scales "
      "depend on the preset, only orderings and ratios carry over");

  SolveOptions opts;
  opts.method = cfg.method;
  opts.bracket_resolution = cfg.bracket_resolution;
  try {
    const auto sp = std::make_shared<const Spectrum>(solve_spectrum(g, pc, cfg.n_levels, opts));
    out << "levels: " << sp->size() << " (method " << to_string(sp->method) << ")\n";
    const std::size_t preview = std::min<std::size_t>(10, sp->size());
    for (std::size_t n = 0; n < preview; ++n)
      out << "  E_" << (n + 1) << " = " << format_double(sp->states[n].energy) << " ("
          << to_string(sp->states[n].regime) << " barrier top)\n";
    try {
      const auto e = project_packet(cfg.packet, *sp);
      out << "captured_norm: " << format_double(e.captured_norm) << "\n";
      for (const auto& w : e.warnings)
        if (w.rfind("basis truncation", 0) == 0) warnings.push_back(w);
    } catch (const NumericalError& e) {
      warnings.push_back(std::string("truncation: ") + e.what());
    }
  } catch (const Error& e) {
    warnings.push_back(std::string("spectrum failed: ") + e.what());
  }
  if (cfg.wants(Output::divergence) && cfg.packet.momentum_wavenumber == 0.0)
    warnings.push_back("divergence with k0 = 0: the classical packet does not move");
  out << "warnings:\n";
  for (const auto& w : warnings) out << "  - " << w << "\n";
  return out.str();
}

}  // namespace qtunnel
