#include "qtunnel/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "qtunnel/csv.hpp"
#include "qtunnel/error.hpp"
#include "qtunnel/observables.hpp"

namespace qtunnel {
namespace {

struct Cursor {
  const std::string& source;
  int line;
  int column;  // column of the value
};

[[noreturn]] void parse_fail(const Cursor& at, const std::string& what) {
  throw ConfigParseError(at.source, at.line, at.column, what);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

double to_double(const std::string& text, const Cursor& at) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    parse_fail(at, "expected a finite number, got '" + text + "'");
  return v;
}

int to_int(const std::string& text, const Cursor& at) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    parse_fail(at, "expected an integer, got '" + text + "'");
  return v;
}

bool to_bool(const std::string& text, const Cursor& at) {
  const auto t = lower(text);
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  parse_fail(at, "expected true or false, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> to_doubles(const std::string& text, const Cursor& at) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(to_double(item, at));
  return out;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string suggestion(const std::string& word, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto& c : candidates) {
    const auto d = edit_distance(word, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (best_d <= std::max<std::size_t>(2, word.size() / 3)) return " (did you mean '" + best + "'?)";
  return {};
}

template <class E>
E to_enum(const std::string& text, const Cursor& at, std::initializer_list<std::pair<const char*, E>> names) {
  std::vector<std::string> known;
  for (const auto& [n, v] : names) {
    if (lower(text) == n) return v;
    known.emplace_back(n);
  }
  std::string list;
  for (const auto& k : known) list += (list.empty() ? "" : ", ") + k;
  parse_fail(at, "unknown value '" + text + "' (expected one of: " + list + ")" + suggestion(lower(text), known));
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const Cursor&)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Field {
  std::string key;
  Setter set;
  Getter get;
};

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ", ") + format_double(x);
  return s;
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : "auto"; }

std::optional<double> to_optional(const std::string& text, const Cursor& at) {
  if (lower(text) == "auto") return std::nullopt;
  return to_double(text, at);
}

const std::vector<std::pair<std::string, std::vector<Field>>>& schema() {
  static const std::vector<std::pair<std::string, std::vector<Field>>> table = {
      {"constants",
       {{"preset",
         [](auto& c, auto& v, auto& at) {
           c.preset = to_enum<Preset>(v, at, {{"natural", Preset::natural}, {"paper", Preset::paper}});
         },
         [](auto& c) { return std::string(to_string(c.preset)); }}}},
      {"geometry",
       {{"half_width", [](auto& c, auto& v, auto& at) { c.half_width = to_double(v, at); },
         [](auto& c) { return format_double(c.half_width); }},
        {"barrier_width", [](auto& c, auto& v, auto& at) { c.barrier_width = to_double(v, at); },
         [](auto& c) { return format_double(c.barrier_width); }},
        {"barrier_height", [](auto& c, auto& v, auto& at) { c.barrier_height = to_double(v, at); },
         [](auto& c) { return format_double(c.barrier_height); }},
        {"barrier_left", [](auto& c, auto& v, auto& at) { c.barrier_left = to_optional(v, at); },
         [](auto& c) { return opt(c.barrier_left); }},
        {"total_length", [](auto& c, auto& v, auto& at) { c.total_length = to_optional(v, at); },
         [](auto& c) { return opt(c.total_length); }}}},
      {"packet",
       {{"center", [](auto& c, auto& v, auto& at) { c.packet.center = to_double(v, at); },
         [](auto& c) { return format_double(c.packet.center); }},
        {"width", [](auto& c, auto& v, auto& at) { c.packet.width = to_double(v, at); },
         [](auto& c) { return format_double(c.packet.width); }},
        {"momentum", [](auto& c, auto& v, auto& at) { c.packet.momentum_wavenumber = to_double(v, at); },
         [](auto& c) { return format_double(c.packet.momentum_wavenumber); }}}},
      {"solver",
       {{"levels", [](auto& c, auto& v, auto& at) { c.n_levels = to_int(v, at); },
         [](auto& c) { return std::to_string(c.n_levels); }},
        {"method",
         [](auto& c, auto& v, auto& at) {
           c.method = to_enum<SolveMethod>(v, at,
                                           {{"automatic", SolveMethod::automatic},
                                            {"transfer_matrix", SolveMethod::transfer_matrix},
                                            {"closed_form_scan", SolveMethod::closed_form_scan}});
         },
         [](auto& c) { return std::string(to_string(c.method)); }},
        {"bracket_resolution",
         [](auto& c, auto& v, auto& at) {
           c.bracket_resolution = lower(v) == "auto" ? 0.0 : to_double(v, at);
         },
         [](auto& c) { return c.bracket_resolution > 0 ? format_double(c.bracket_resolution) : std::string("auto"); }}}},
      {"time",
       {{"start", [](auto& c, auto& v, auto& at) { c.t_start = to_double(v, at); },
         [](auto& c) { return format_double(c.t_start); }},
        {"end", [](auto& c, auto& v, auto& at) { c.t_end = to_optional(v, at); },
         [](auto& c) { return opt(c.t_end); }},
        {"samples", [](auto& c, auto& v, auto& at) { c.n_samples = to_int(v, at); },
         [](auto& c) { return std::to_string(c.n_samples); }}}},
      {"observables",
       {{"rhs_region",
         [](auto& c, auto& v, auto& at) {
           if (lower(v) == "auto") {
             c.rhs_region.reset();
             return;
           }
           const auto xs = to_doubles(v, at);
           if (xs.size() != 2) parse_fail(at, "rhs_region takes 'auto' or two numbers 'lo, hi'");
           c.rhs_region = Interval{xs[0], xs[1]};
         },
         [](auto& c) {
           return c.rhs_region ? join({c.rhs_region->lo, c.rhs_region->hi}) : std::string("auto");
         }},
        {"entropy_resolution", [](auto& c, auto& v, auto& at) { c.entropy_resolution = to_int(v, at); },
         [](auto& c) { return std::to_string(c.entropy_resolution); }},
        {"outputs",
         [](auto& c, auto& v, auto& at) {
           c.outputs.clear();
           if (lower(v) == "none") return;
           for (const auto& item : split_list(v))
             c.outputs.push_back(to_enum<Output>(item, at,
                                                 {{"rhs_prob", Output::rhs_prob},
                                                  {"entropy", Output::entropy},
                                                  {"variance", Output::variance},
                                                  {"divergence", Output::divergence},
                                                  {"degeneracy", Output::degeneracy},
                                                  {"splitting", Output::splitting}}));
         },
         [](auto& c) {
           std::string s;
           for (auto o : c.outputs) s += (s.empty() ? "" : ", ") + std::string(to_string(o));
           return s.empty() ? std::string("none") : s;
         }}}},
      {"divergence",
       {{"threshold", [](auto& c, auto& v, auto& at) { c.divergence_threshold = to_double(v, at); },
         [](auto& c) { return format_double(c.divergence_threshold); }},
        {"metric",
         [](auto& c, auto& v, auto& at) {
           c.divergence_metric = to_enum<DivergenceMetric>(
               v, at, {{"variance", DivergenceMetric::variance_difference}, {"rms", DivergenceMetric::rms_difference}});
         },
         [](auto& c) { return std::string(to_string(c.divergence_metric)); }},
        {"classical_mode",
         [](auto& c, auto& v, auto& at) {
           c.classical_mode = to_enum<ImageMode>(
               v, at, {{"two_term", ImageMode::two_term}, {"full_images", ImageMode::full_images}});
         },
         [](auto& c) { return std::string(to_string(c.classical_mode)); }}}},
      {"scan",
       {{"positions",
         [](auto& c, auto& v, auto& at) {
           c.scan_positions = lower(v) == "commensurate" ? std::vector<double>{} : to_doubles(v, at);
         },
         [](auto& c) { return c.scan_positions.empty() ? std::string("commensurate") : join(c.scan_positions); }},
        {"degeneracy_ratio", [](auto& c, auto& v, auto& at) { c.degeneracy_ratio = to_double(v, at); },
         [](auto& c) { return format_double(c.degeneracy_ratio); }},
        {"entropy", [](auto& c, auto& v, auto& at) { c.scan_entropy = to_bool(v, at); },
         [](auto& c) { return std::string(c.scan_entropy ? "true" : "false"); }}}},
      {"analytics",
       {{"e_res", [](auto& c, auto& v, auto& at) { c.e_res = to_optional(v, at); },
         [](auto& c) { return opt(c.e_res); }},
        {"e_th", [](auto& c, auto& v, auto& at) { c.e_th = to_optional(v, at); },
         [](auto& c) { return opt(c.e_th); }},
        {"peres_with_hbar", [](auto& c, auto& v, auto& at) { c.peres_with_hbar = to_bool(v, at); },
         [](auto& c) { return std::string(c.peres_with_hbar ? "true" : "false"); }}}},
      {"sweep",
       {{"axis",
         [](auto& c, auto& v, auto& at) {
           c.sweep_axis = to_enum<SweepAxis>(v, at,
                                             {{"none", SweepAxis::none},
                                              {"barrier_height", SweepAxis::barrier_height},
                                              {"barrier_width", SweepAxis::barrier_width},
                                              {"barrier_position", SweepAxis::barrier_position}});
         },
         [](auto& c) { return std::string(to_string(c.sweep_axis)); }},
        {"values",
         [](auto& c, auto& v, auto& at) {
           c.sweep_values = lower(v) == "none" ? std::vector<double>{} : to_doubles(v, at);
         },
         [](auto& c) { return c.sweep_values.empty() ? std::string("none") : join(c.sweep_values); }}}},
  };
  return table;
}

std::vector<std::string> section_names() {
  std::vector<std::string> out;
  for (const auto& [s, f] : schema()) out.push_back(s);
  return out;
}

void check_geometry(const std::string& prefix, double L, double c, double b, double v0) {
  if (!(b >= 0.0)) throw ConfigError(prefix + "barrier_width", "must be >= 0");
  if (!(v0 >= 0.0)) throw ConfigError(prefix + "barrier_height", "must be >= 0");
  if (!(L > 0.0)) throw ConfigError(prefix + "total_length", "must be > 0");
  if (!(c > 0.0)) throw ConfigError(prefix + "barrier_left", "must be > 0");
  if (!(c + b < L))
    throw ConfigError(prefix + "barrier_left",
                      "barrier [" + format_double(c) + ", " + format_double(c + b) +
                          "] must end inside the box of length " + format_double(L));
}

}  // namespace

WellGeometry ExperimentConfig::geometry() const {
  const double L = total_length.value_or(2.0 * half_width + barrier_width);
  return WellGeometry(L, barrier_left.value_or(half_width), barrier_width, barrier_height);
}

WellGeometry ExperimentConfig::geometry_at(double v) const {
  ExperimentConfig c = *this;
  switch (sweep_axis) {
    case SweepAxis::none: break;
    case SweepAxis::barrier_height: c.barrier_height = v; break;
    case SweepAxis::barrier_width: c.barrier_width = v; break;
    case SweepAxis::barrier_position: c.barrier_left = v; break;
  }
  return c.geometry();
}

double default_time_end(Preset preset) { return preset == Preset::paper ? 0.05 : 300.0; }

double ExperimentConfig::time_end() const { return t_end.value_or(default_time_end(preset)); }

std::vector<double> ExperimentConfig::times() const { return uniform_grid(t_start, time_end(), n_samples); }

Interval ExperimentConfig::rhs_region_for(const WellGeometry& g) const {
  return rhs_region.value_or(g.region(Region::right_well));
}

bool ExperimentConfig::wants(Output o) const {
  return std::find(outputs.begin(), outputs.end(), o) != outputs.end();
}

void ExperimentConfig::validate() const {
  if (!(half_width > 0.0)) throw ConfigError("geometry.half_width", "must be > 0");
  const double L = total_length.value_or(2.0 * half_width + barrier_width);
  check_geometry("geometry.", L, barrier_left.value_or(half_width), barrier_width, barrier_height);
  if (!(packet.width > 0.0)) throw ConfigError("packet.width", "must be > 0");
  if (!(packet.center > 0.0 && packet.center < L)) throw ConfigError("packet.center", "must lie inside (0, L)");
  if (n_levels < 1) throw ConfigError("solver.levels", "must be >= 1");
  if (bracket_resolution < 0.0) throw ConfigError("solver.bracket_resolution", "must be > 0 or auto");
  if (n_samples < 1) throw ConfigError("time.samples", "must be >= 1");
  if (n_samples > 1 && !(time_end() > t_start)) throw ConfigError("time.end", "must exceed time.start");
  if (rhs_region) {
    if (rhs_region->hi < rhs_region->lo) throw ConfigError("observables.rhs_region", "bounds are inverted");
    if (rhs_region->lo < 0.0 || rhs_region->hi > L) throw ConfigError("observables.rhs_region", "must lie inside [0, L]");
  }
  if (entropy_resolution < 256) throw ConfigError("observables.entropy_resolution", "must be >= 256");
  if (!(divergence_threshold >= 0.0)) throw ConfigError("divergence.threshold", "must be >= 0");
  if (!(degeneracy_ratio > 0.0)) throw ConfigError("scan.degeneracy_ratio", "must be > 0");
  for (double c : scan_positions) check_geometry("scan.positions: ", L, c, barrier_width, barrier_height);
  if (e_res && e_th && !(*e_res > *e_th)) throw ConfigError("analytics.e_res", "must exceed analytics.e_th");
  if (sweep_axis != SweepAxis::none) {
    if (sweep_values.empty()) throw ConfigError("sweep.values", "a sweep needs at least one value");
    for (double v : sweep_values) {
      ExperimentConfig c = *this;
      c.sweep_axis = SweepAxis::none;
      switch (sweep_axis) {
        case SweepAxis::barrier_height: c.barrier_height = v; break;
        case SweepAxis::barrier_width: c.barrier_width = v; break;
        case SweepAxis::barrier_position: c.barrier_left = v; break;
        case SweepAxis::none: break;
      }
      try {
        c.validate();
      } catch (const ConfigError& e) {
        throw ConfigError("sweep.values", "value " + format_double(v) + " is invalid: " + e.what());
      }
    }
  }
  if (method == SolveMethod::closed_form_scan) {
    for (std::size_t i = 0; i < point_count(); ++i) {
      const auto g = sweep_axis == SweepAxis::none ? geometry() : geometry_at(sweep_values[i]);
      if (!g.is_symmetric()) throw ConfigError("solver.method", "closed_form_scan needs a symmetric geometry");
    }
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::set<std::string> seen;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    // comments start with # or ; at the start of a line or after whitespace
    for (std::size_t i = 0; i < line.size(); ++i) {
      if ((line[i] == '#' || line[i] == ';') && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.resize(i);
        break;
      }
    }
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '[') {
      const auto close = line.find(']', first);
      if (close == std::string::npos)
        throw ConfigParseError(source, line_no, static_cast<int>(line.size()) + 1, "missing ']' in section header");
      if (!trim(line.substr(close + 1)).empty())
        throw ConfigParseError(source, line_no, static_cast<int>(close) + 2, "unexpected text after section header");
      section = lower(trim(line.substr(first + 1, close - first - 1)));
      const auto names = section_names();
      if (std::find(names.begin(), names.end(), section) == names.end())
        throw ConfigParseError(source, line_no, static_cast<int>(first) + 2,
                               "unknown section '" + section + "'" + suggestion(section, names));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigParseError(source, line_no, static_cast<int>(first) + 1, "expected 'key = value'");
    const std::string key = lower(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigParseError(source, line_no, static_cast<int>(first) + 1, "empty key");
    const auto value_start = line.find_first_not_of(" \t", eq + 1);
    const std::string value = trim(line.substr(eq + 1));
    const int value_col = static_cast<int>(value_start == std::string::npos ? eq + 2 : value_start + 1);
    if (section.empty())
      throw ConfigError(key, "key outside any section (expected a [section] header first)");
    const std::string path = section + "." + key;
    const auto& fields =
        std::find_if(schema().begin(), schema().end(), [&](const auto& s) { return s.first == section; })->second;
    const auto it = std::find_if(fields.begin(), fields.end(), [&](const Field& f) { return f.key == key; });
    if (it == fields.end()) {
      std::vector<std::string> keys;
      for (const auto& f : fields) keys.push_back(f.key);
      std::string hint = suggestion(key, keys);
      if (hint.empty()) {
        // key may belong to another section
        for (const auto& [s, fs] : schema())
          for (const auto& f : fs)
            if (f.key == key) hint = " (it belongs in section [" + s + "])";
      }
      throw ConfigError(path, "unknown key '" + key + "'" + hint);
    }
    if (!seen.insert(path).second)
      throw ConfigParseError(source, line_no, static_cast<int>(first) + 1, "duplicate key '" + path + "'");
    if (value.empty()) throw ConfigParseError(source, line_no, value_col, "missing value for '" + path + "'");
    it->set(cfg, value, Cursor{source, line_no, value_col});
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

std::string to_config_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, fields] : schema()) {
    if (!first) out << '\n';
    first = false;
    out << '[' << section << "]\n";
    for (const auto& f : fields) out << f.key << " = " << f.get(cfg) << '\n';
  }
  return out.str();
}

std::vector<std::pair<std::string, std::vector<std::string>>> config_schema() {
  std::vector<std::pair<std::string, std::vector<std::string>>> out;
  for (const auto& [section, fields] : schema()) {
    std::vector<std::string> keys;
    for (const auto& f : fields) keys.push_back(f.key);
    out.emplace_back(section, keys);
  }
  return out;
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::none: return "none";
    case SweepAxis::barrier_height: return "barrier_height";
    case SweepAxis::barrier_width: return "barrier_width";
    case SweepAxis::barrier_position: return "barrier_position";
  }
  return "?";
}

const char* to_string(Output o) {
  switch (o) {
    case Output::rhs_prob: return "rhs_prob";
    case Output::entropy: return "entropy";
    case Output::variance: return "variance";
    case Output::divergence: return "divergence";
    case Output::degeneracy: return "degeneracy";
    case Output::splitting: return "splitting";
  }
  return "?";
}

}  // namespace qtunnel
