// Config text format: defaults, strict keys, error positions and round trips.

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qtunnel/config.hpp"
#include "qtunnel/error.hpp"

using namespace qtunnel;

namespace {

template <class E>
E capture(const std::string& text) {
  try {
    parse_config(text, "t.cfg");
  } catch (const E& e) {
    return e;
  }
  FAIL("expected an exception");
  throw;
}

}  // namespace

TEST_CASE("empty config yields the defaults") {
  const auto c = parse_config("");
  CHECK(c.half_width == 35.0);
  CHECK(c.packet.width == 3.0);
  CHECK(c.packet.center == 11.0);
  CHECK(c.packet.momentum_wavenumber == 0.0);
  CHECK(c.barrier_width == 3.0);
  CHECK(c.n_levels == 30);
  CHECK(c.preset == Preset::natural);
  const auto g = c.geometry();
  CHECK(g.total_length() == 73.0);
  CHECK(g.barrier_left() == 35.0);
  CHECK(c.time_end() == 300.0);
  CHECK(c.times().size() == 2001);
  CHECK(c.rhs_region_for(g).lo == 38.0);
  CHECK(c.rhs_region_for(g).hi == 73.0);
  CHECK(parse_config("[constants]\npreset = paper\n").time_end() == 0.05);
}

TEST_CASE("values, comments and case") {
  const auto c = parse_config(R"(
# leading comment
[geometry]
barrier_height = 5760   ; trailing comment
BARRIER_LEFT = 40
[packet]
momentum = 0.25
[observables]
rhs_region = 50, 70
outputs = rhs_prob, divergence, splitting
[sweep]
axis = barrier_width
values = 1, 2, 3
)");
  CHECK(c.barrier_height == 5760.0);
  CHECK(c.geometry().barrier_left() == 40.0);
  CHECK(c.packet.momentum_wavenumber == 0.25);
  REQUIRE(c.rhs_region);
  CHECK(c.rhs_region->lo == 50.0);
  CHECK(c.wants(Output::divergence));
  CHECK(!c.wants(Output::entropy));
  CHECK(c.sweep_axis == SweepAxis::barrier_width);
  CHECK(c.point_count() == 3);
  // a width sweep keeps the barrier in place and grows the box
  CHECK(c.geometry_at(2.0).barrier_width() == 2.0);
  CHECK(c.geometry_at(2.0).total_length() == 72.0);
}

TEST_CASE("barrier overlapping the wall names the field") {
  const auto e = capture<ConfigError>("[geometry]\nbarrier_left = 71\n");
  CHECK(e.path() == "geometry.barrier_left");
}

TEST_CASE("misspelt key suggests the right one") {
  const auto e = capture<ConfigError>("[geometry]\nbarier_height = 7\n");
  CHECK(e.path() == "geometry.barier_height");
  CHECK(std::string(e.what()).find("barrier_height") != std::string::npos);
  const auto moved = capture<ConfigError>("[geometry]\nlevels = 7\n");
  CHECK(std::string(moved.what()).find("[solver]") != std::string::npos);
}

TEST_CASE("malformed text reports line and column") {
  const auto bad_number = capture<ConfigParseError>("[geometry]\n\nbarrier_height =  abc\n");
  CHECK(bad_number.line() == 3);
  CHECK(bad_number.column() == 19);
  const auto dup = capture<ConfigParseError>("[packet]\nwidth = 2\nwidth = 3\n");
  CHECK(dup.line() == 3);
  const auto section = capture<ConfigParseError>("[geometri]\n");
  CHECK(section.line() == 1);
  CHECK(std::string(section.what()).find("geometry") != std::string::npos);
  const auto noeq = capture<ConfigParseError>("[packet]\nwidth 3\n");
  CHECK(noeq.line() == 2);
  CHECK(capture<ConfigParseError>("[constants]\npreset = atomic\n").line() == 2);
  CHECK_THROWS_AS(parse_config("width = 3\n"), ConfigError);
}

TEST_CASE("validation errors carry field paths") {
  CHECK(capture<ConfigError>("[packet]\nwidth = 0\n").path() == "packet.width");
  CHECK(capture<ConfigError>("[packet]\ncenter = 90\n").path() == "packet.center");
  CHECK(capture<ConfigError>("[solver]\nlevels = 0\n").path() == "solver.levels");
  CHECK(capture<ConfigError>("[time]\nend = -1\n").path() == "time.end");
  CHECK(capture<ConfigError>("[observables]\nrhs_region = 50, 40\n").path() == "observables.rhs_region");
  CHECK(capture<ConfigError>("[sweep]\naxis = barrier_height\n").path() == "sweep.values");
  CHECK(capture<ConfigError>("[sweep]\naxis = barrier_position\nvalues = 35, 72\n").path() == "sweep.values");
  CHECK(capture<ConfigError>("[analytics]\ne_res = 1\ne_th = 2\n").path() == "analytics.e_res");
}

TEST_CASE("canonical text round-trips") {
  const auto c = parse_config("[geometry]\nbarrier_height = 7\n[time]\nend = 12.5\n[scan]\npositions = 30, 35\n");
  const auto text = to_config_text(c);
  const auto back = parse_config(text);
  CHECK(to_config_text(back) == text);
  CHECK(back.barrier_height == 7.0);
  CHECK(back.time_end() == 12.5);
  CHECK(back.scan_positions == std::vector<double>{30.0, 35.0});
  auto none = parse_config("[observables]\noutputs = none\n");
  CHECK(none.outputs.empty());
  CHECK(parse_config(to_config_text(none)).outputs.empty());
  // every schema key appears in the canonical text
  for (const auto& [section, keys] : config_schema()) {
    CHECK(text.find("[" + section + "]") != std::string::npos);
    for (const auto& k : keys) CHECK(text.find("\n" + k + " = ") != std::string::npos);
  }
}

TEST_CASE("loading from disk") {
  const auto path = std::filesystem::temp_directory_path() / "qtunnel_test_config.cfg";
  {
    std::ofstream out(path);
    out << "[solver]\nlevels = 12\n";
  }
  CHECK(load_config(path.string()).n_levels == 12);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config(path.string()), ConfigError);
}
