#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "qtunnel/analytics.hpp"
#include "qtunnel/classical.hpp"
#include "qtunnel/config.hpp"
#include "qtunnel/error.hpp"
#include "qtunnel/experiment.hpp"
#include "qtunnel/observables.hpp"

namespace fs = std::filesystem;
using namespace qtunnel;

namespace {

struct Common {
  std::string config_path;
  std::string out_dir;
  int levels = 0;
  std::string preset;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "experiment config file (key = value format)");
  cmd->add_option("--out", c.out_dir, "output directory (default: CSV to stdout)");
  cmd->add_option("--levels", c.levels, "number of eigenstates")->check(CLI::PositiveNumber);
  cmd->add_option("--preset", c.preset, "unit preset")->check(CLI::IsMember({"natural", "paper"}));
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config_path.empty() ? parse_config("", "<defaults>") : load_config(c.config_path);
  if (!c.preset.empty()) cfg.preset = preset_from_string(c.preset);
  if (c.levels > 0) cfg.n_levels = c.levels;
  cfg.validate();
  return cfg;
}

/// Writes to <out>/<name> when --out is given, else to stdout.
template <class Writer>
void deliver(const Common& c, const std::string& name, Writer&& writer) {
  if (c.out_dir.empty()) {
    writer(std::cout);
    return;
  }
  fs::create_directories(c.out_dir);
  std::ofstream out(fs::path(c.out_dir) / name, std::ios::binary);
  if (!out) throw Error("cannot write " + (fs::path(c.out_dir) / name).string());
  writer(out);
  std::cerr << "wrote " << (fs::path(c.out_dir) / name).string() << "\n";
}

SolveOptions solve_options(const ExperimentConfig& cfg) {
  SolveOptions o;
  o.method = cfg.method;
  o.bracket_resolution = cfg.bracket_resolution;
  return o;
}

std::shared_ptr<const Spectrum> spectrum_for(const ExperimentConfig& cfg) {
  return std::make_shared<const Spectrum>(solve_spectrum(cfg.geometry(), cfg.constants(), cfg.n_levels, solve_options(cfg)));
}

WaveField field_for(const ExperimentConfig& cfg) {
  auto sp = spectrum_for(cfg);
  auto expansion = project_packet(cfg.packet, *sp);
  for (const auto& w : expansion.warnings) std::cerr << "warning: " << w << "\n";
  return WaveField(sp, std::move(expansion));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Square barrier in an infinite well: spectra, packet evolution, tunneling observables"};
  app.set_version_flag("--version", std::string(QTUNNEL_VERSION));
  app.require_subcommand(1);

  Common common;
  int points = 401;
  int frames = 5;
  bool scan_entropy = false;

  auto* solve = app.add_subcommand("solve", "write the spectrum as CSV");
  auto* evolve = app.add_subcommand("evolve", "write density profiles |Psi(x,t)|^2 as CSV");
  auto* observe = app.add_subcommand("observe", "write rhs_prob, entropy, mean and variance series");
  auto* diverge = app.add_subcommand("diverge", "compare quantum and classical variances");
  auto* scan = app.add_subcommand("scan", "near-degeneracy scan over barrier positions");
  auto* describe_cmd = app.add_subcommand("describe", "summarize a config");
  auto* run = app.add_subcommand("run", "run the full configured experiment into --out");
  for (auto* cmd : {solve, evolve, observe, diverge, scan, describe_cmd, run}) add_common(cmd, common);
  evolve->add_option("--points", points, "spatial grid points")->check(CLI::Range(2, 1000000));
  evolve->add_option("--frames", frames, "time frames across the window")->check(CLI::Range(1, 100000));
  scan->add_flag("--entropy", scan_entropy, "also write entropy series per position");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const auto cfg = resolve(common);
    if (*solve) {
      const auto sp = spectrum_for(cfg);
      deliver(common, "spectrum.csv", [&](std::ostream& o) { write_spectrum_csv(o, *sp); });
    } else if (*evolve) {
      const auto field = field_for(cfg);
      const auto grid = uniform_grid(0.0, cfg.geometry().total_length(), points);
      const auto times = uniform_grid(cfg.t_start, cfg.time_end(), frames);
      deliver(common, "profiles.csv", [&](std::ostream& o) { write_profile_csv(o, field, grid, times); });
    } else if (*observe) {
      const auto field = field_for(cfg);
      SeriesOptions opts;
      opts.entropy_resolution = cfg.entropy_resolution;
      const auto series = time_series(field, cfg.times(), cfg.rhs_region_for(cfg.geometry()), opts);
      deliver(common, "observables.csv", [&](std::ostream& o) { write_observables_csv(o, series); });
    } else if (*diverge) {
      const auto field = field_for(cfg);
      const auto packet = ClassicalPacket::from_spec(cfg.packet, cfg.geometry(), cfg.constants(), cfg.classical_mode);
      if (cfg.packet.momentum_wavenumber == 0.0) std::cerr << "warning: k0 = 0, the classical packet does not move\n";
      const auto result = divergence_time(field, packet, cfg.times(), cfg.divergence_threshold, cfg.divergence_metric);
      deliver(common, "divergence.csv", [&](std::ostream& o) { write_divergence_csv(o, result); });
    } else if (*scan) {
      const auto g = cfg.geometry();
      const auto positions = cfg.scan_positions.empty() ? commensurate_positions(g) : cfg.scan_positions;
      const auto result = degeneracy_scan(g, cfg.constants(), positions, cfg.n_levels, cfg.degeneracy_ratio);
      deliver(common, "degeneracy.csv", [&](std::ostream& o) { write_degeneracy_csv(o, result); });
      if (scan_entropy || cfg.scan_entropy) {
        const auto times = cfg.times();
        const auto rows = entropy_vs_position(g, cfg.constants(), cfg.packet, positions, times, cfg.n_levels,
                                              cfg.entropy_resolution);
        deliver(common, "entropy_position.csv", [&](std::ostream& o) { write_entropy_position_csv(o, rows, times); });
      }
      for (const auto& e : result.entries)
        if (!e.ok) std::cerr << "position " << e.position << " failed: " << e.error << "\n";
    } else if (*describe_cmd) {
      std::cout << describe(cfg);
    } else if (*run) {
      if (common.out_dir.empty()) throw ConfigError("--out", "run needs an output directory");
      const auto manifest = run_experiment(cfg, common.out_dir);
      for (const auto& p : manifest.points)
        if (!p.ok) std::cerr << "point " << p.index << " failed: " << p.error << "\n";
      std::cerr << "manifest: " << manifest.manifest_path.string() << "\n";
      return exit_code(manifest);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
