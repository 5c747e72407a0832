#include "dimer/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace dimer {

namespace {

const std::vector<std::pair<ExperimentKind, std::string_view>> kKindNames = {
    {ExperimentKind::poincare, "poincare"},
    {ExperimentKind::lyapunov_map, "lyapunov-map"},
    {ExperimentKind::chaos_fraction_scan, "chaos-fraction-scan"},
    {ExperimentKind::evolve, "evolve"},
    {ExperimentKind::qfunc, "qfunc"},
    {ExperimentKind::condensate_map, "condensate-map"},
    {ExperimentKind::tw_evolve, "tw-evolve"},
    {ExperimentKind::number_dist, "number-dist"},
    {ExperimentKind::bhattacharyya, "bhattacharyya"},
    {ExperimentKind::effective_compare, "effective-compare"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Entry {
  std::string value;
  int line = 0;
};

// section -> key -> entry; "" is the top-level section
using Document = std::map<std::string, std::map<std::string, Entry>>;

const std::map<std::string, std::vector<std::string>>& schema() {
  static const std::map<std::string, std::vector<std::string>> s = {
      {"", {"experiment", "seed", "output_dir"}},
      {"system",
       {"particles", "nonlinearity", "interaction", "tunnelling", "drive_amplitude",
        "drive_frequency"}},
      {"time", {"t_end", "unit", "samples"}},
      {"grid", {"nz", "nphi", "z_min", "z_max"}},
      {"states",
       {"list", "chaotic_z_window", "chaotic_phi_window", "max_abs_z_fraction",
        "island_periods", "island_max_period"}},
      {"semiclassical",
       {"periods", "dynamics", "seed_rows", "seed_cols", "initial_offset",
        "relative_tolerance", "absolute_tolerance"}},
      {"scan", {"amplitudes", "frequencies", "samples"}},
      {"quantum", {"max_step"}},
      {"wigner", {"n_traj", "sampling", "site"}},
      {"bhattacharyya", {"perturbations", "method"}},
  };
  return s;
}

Document read_document(std::string_view text, std::vector<ConfigIssue>& issues,
                       int first_line) {
  Document doc;
  std::string section;
  bool section_known = true;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = first_line - 1;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find_first_of("#;");
    if (hash != std::string::npos) s.erase(hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        issues.push_back({line, "malformed section header '" + s + "'"});
        continue;
      }
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      section_known = schema().count(section) > 0;
      if (!section_known) issues.push_back({line, "unknown section [" + section + "]"});
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      issues.push_back({line, "expected 'key = value', got '" + s + "'"});
      continue;
    }
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    if (!section_known) continue;
    const auto& keys = schema().at(section);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      issues.push_back({line, "unknown key '" + key + "'" +
                                  (section.empty() ? "" : " in [" + section + "]")});
      continue;
    }
    auto& slot = doc[section];
    if (auto it = slot.find(key); it != slot.end()) {
      issues.push_back({line, "duplicate key '" + key + "' (first set on line " +
                                  std::to_string(it->second.line) + ", again on line " +
                                  std::to_string(line) + ")"});
      continue;
    }
    slot[key] = {value, line};
  }
  return doc;
}

class Reader {
 public:
  Reader(const Document& doc, std::vector<ConfigIssue>& issues)
      : doc_(doc), issues_(issues) {}

  const Entry* find(const std::string& section, const std::string& key) const {
    auto s = doc_.find(section);
    if (s == doc_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }
  int line(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    return e ? e->line : 0;
  }
  bool has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
  }

  void number(const std::string& section, const std::string& key, double& out) const {
    const Entry* e = find(section, key);
    if (!e) return;
    double v = 0.0;
    const auto* b = e->value.data();
    const auto* end = b + e->value.size();
    auto [p, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || p != end || !std::isfinite(v)) {
      fail(e->line, key + ": expected a finite number, got '" + e->value + "'");
      return;
    }
    out = v;
  }

  template <class Int>
  void integer(const std::string& section, const std::string& key, Int& out) const {
    const Entry* e = find(section, key);
    if (!e) return;
    Int v{};
    const auto* b = e->value.data();
    const auto* end = b + e->value.size();
    auto [p, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || p != end) {
      fail(e->line, key + ": expected an integer, got '" + e->value + "'");
      return;
    }
    out = v;
  }

  void list(const std::string& section, const std::string& key,
            std::vector<double>& out) const {
    const Entry* e = find(section, key);
    if (!e) return;
    std::vector<double> values;
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      double v = 0.0;
      auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (item.empty() || ec != std::errc() || p != item.data() + item.size() ||
          !std::isfinite(v)) {
        fail(e->line, key + ": bad list element '" + item + "'");
        return;
      }
      values.push_back(v);
    }
    if (values.empty()) {
      fail(e->line, key + ": list is empty");
      return;
    }
    out = std::move(values);
  }

  template <class Enum>
  void choice(const std::string& section, const std::string& key,
              const std::vector<std::pair<std::string, Enum>>& options, Enum& out) const {
    const Entry* e = find(section, key);
    if (!e) return;
    for (const auto& [name, value] : options) {
      if (name == e->value) {
        out = value;
        return;
      }
    }
    std::string names;
    for (const auto& o : options) names += (names.empty() ? "" : ", ") + o.first;
    fail(e->line, key + ": expected one of " + names + ", got '" + e->value + "'");
  }

  void fail(int line, std::string message) const {
    issues_.push_back({line, std::move(message)});
  }

 private:
  const Document& doc_;
  std::vector<ConfigIssue>& issues_;
};

std::vector<StateSpec> parse_states(const std::string& text, int line,
                                    std::vector<ConfigIssue>& issues) {
  std::vector<StateSpec> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    StateSpec s;
    if (item == "chaotic") {
      s.role = StateSpec::Role::chaotic;
    } else if (item == "regular-1") {
      s.role = StateSpec::Role::regular_1;
    } else if (item == "regular-2") {
      s.role = StateSpec::Role::regular_2;
    } else {
      const auto colon = item.find(':');
      double z = 0.0;
      double phi = 0.0;
      bool ok = colon != std::string::npos;
      if (ok) {
        const std::string a = trim(std::string_view(item).substr(0, colon));
        const std::string b = trim(std::string_view(item).substr(colon + 1));
        auto r1 = std::from_chars(a.data(), a.data() + a.size(), z);
        auto r2 = std::from_chars(b.data(), b.data() + b.size(), phi);
        ok = !a.empty() && !b.empty() && r1.ec == std::errc() &&
             r1.ptr == a.data() + a.size() && r2.ec == std::errc() &&
             r2.ptr == b.data() + b.size() && std::isfinite(z) && std::isfinite(phi);
      }
      if (!ok) {
        issues.push_back({line, "states: expected chaotic, regular-1, regular-2 or "
                                "z_fraction:phi, got '" + item + "'"});
        continue;
      }
      if (std::abs(z) > 0.5) {
        issues.push_back({line, "states: |z/N| must be <= 0.5 in '" + item + "'"});
        continue;
      }
      s.role = StateSpec::Role::explicit_point;
      s.z_fraction = z;
      s.phi = phi;
    }
    out.push_back(s);
  }
  if (out.empty()) issues.push_back({line, "states: list is empty"});
  return out;
}

bool uses_q_grid(ExperimentKind k) {
  return k == ExperimentKind::qfunc || k == ExperimentKind::tw_evolve;
}

}  // namespace

std::string_view kind_name(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

const std::vector<ExperimentKind>& all_kinds() {
  static const std::vector<ExperimentKind> kinds = [] {
    std::vector<ExperimentKind> v;
    for (const auto& entry : kKindNames) v.push_back(entry.first);
    return v;
  }();
  return kinds;
}

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::runtime_error([&] {
        std::string s = "invalid configuration:";
        for (const auto& i : issues) {
          s += "\n  ";
          if (i.line > 0) s += "line " + std::to_string(i.line) + ": ";
          s += i.message;
        }
        return s;
      }()),
      issues_(std::move(issues)) {}

std::string StateSpec::label() const {
  switch (role) {
    case Role::chaotic: return "chaotic";
    case Role::regular_1: return "regular-1";
    case Role::regular_2: return "regular-2";
    case Role::explicit_point: break;
  }
  return format_double(z_fraction) + ":" + format_double(phi);
}

double ExperimentConfig::t_end_absolute() const {
  return time_unit == TimeUnit::periods ? t_end * system.strobe_period() : t_end;
}

std::vector<double> ExperimentConfig::sample_times() const {
  const double end = t_end_absolute();
  std::vector<double> t(samples);
  for (int k = 0; k < samples; ++k) {
    t[k] = samples == 1 ? end : end * k / (samples - 1);
  }
  return t;
}

namespace {

// first_line is the number reported for the first line of text
ExperimentConfig parse_numbered(std::string_view text, int first_line) {
  std::vector<ConfigIssue> issues;
  const Document doc = read_document(text, issues, first_line);
  Reader r(doc, issues);
  ExperimentConfig c;

  if (const Entry* e = r.find("", "experiment")) {
    if (auto k = parse_kind(e->value)) {
      c.kind = *k;
    } else {
      r.fail(e->line, "experiment: unknown kind '" + e->value + "'");
    }
  } else {
    r.fail(0, "missing required key 'experiment'");
  }
  r.integer("", "seed", c.seed);
  if (const Entry* e = r.find("", "output_dir")) c.output_dir = e->value;

  // [system]
  int particles = 0;
  double tunnelling = 1.0;
  double amplitude = 0.0;
  double frequency = 0.0;
  double nonlinearity = 0.0;
  double interaction = 0.0;
  if (!r.has("system", "particles")) r.fail(0, "missing required key [system] particles");
  r.integer("system", "particles", particles);
  r.number("system", "tunnelling", tunnelling);
  r.number("system", "drive_amplitude", amplitude);
  r.number("system", "drive_frequency", frequency);
  r.number("system", "nonlinearity", nonlinearity);
  r.number("system", "interaction", interaction);
  const bool has_c = r.has("system", "nonlinearity");
  const bool has_u = r.has("system", "interaction");
  if (has_c == has_u) {
    r.fail(r.line("system", has_c ? "interaction" : "particles"),
           "[system] needs exactly one of nonlinearity or interaction");
  }
  if (amplitude != 0.0 && !r.has("system", "drive_frequency")) {
    r.fail(r.line("system", "drive_amplitude"),
           "drive_frequency is required when drive_amplitude is nonzero");
  }
  const std::size_t before_system = issues.size();
  if (particles < 1) {
    r.fail(r.line("system", "particles"), "particles: N must be >= 1 (got " +
                                              std::to_string(particles) + ")");
  }
  if (!(tunnelling > 0.0)) {
    r.fail(r.line("system", "tunnelling"), "tunnelling: J0 must be > 0");
  }
  if (r.has("system", "drive_frequency") && !(frequency > 0.0)) {
    r.fail(r.line("system", "drive_frequency"), "drive_frequency: omega must be > 0");
  }
  if (issues.size() == before_system && has_c != has_u) {
    try {
      c.system = has_c ? build_params_from_nonlinearity(nonlinearity, tunnelling, amplitude,
                                                        frequency, particles)
                       : build_params(interaction, tunnelling, amplitude, frequency, particles);
    } catch (const std::exception& e) {
      r.fail(r.line("system", "particles"), e.what());
    }
  }

  // [time]
  c.samples = c.kind == ExperimentKind::bhattacharyya ? 21 : 81;
  c.time_unit = c.system.driven() ? TimeUnit::periods : TimeUnit::absolute;
  r.number("time", "t_end", c.t_end);
  r.integer("time", "samples", c.samples);
  r.choice<TimeUnit>("time", "unit",
                     {{"periods", TimeUnit::periods}, {"absolute", TimeUnit::absolute}},
                     c.time_unit);
  if (!(c.t_end >= 0.0)) r.fail(r.line("time", "t_end"), "t_end must be >= 0");
  if (c.samples < 1) r.fail(r.line("time", "samples"), "samples must be >= 1");
  if (c.time_unit == TimeUnit::periods && !c.system.driven() &&
      c.system.particles >= 1 && c.system.drive_frequency <= 0.0) {
    r.fail(r.line("time", "unit"),
           "unit = periods needs drive_frequency; use unit = absolute");
  }

  // [grid]
  c.grid = uses_q_grid(c.kind) ? q_grid() : lyapunov_grid();
  r.integer("grid", "nz", c.grid.nz);
  r.integer("grid", "nphi", c.grid.nphi);
  r.number("grid", "z_min", c.grid.z_min);
  r.number("grid", "z_max", c.grid.z_max);
  try {
    c.grid.validate();
  } catch (const std::exception& e) {
    r.fail(r.line("grid", "nz"), std::string("grid: ") + e.what());
  }

  // [states]
  if (const Entry* e = r.find("states", "list")) {
    c.states = parse_states(e->value, e->line, issues);
  } else {
    c.states = {{StateSpec::Role::regular_1}, {StateSpec::Role::regular_2},
                {StateSpec::Role::chaotic}};
  }
  r.number("states", "chaotic_z_window", c.locator.chaotic_z_window);
  r.number("states", "chaotic_phi_window", c.locator.chaotic_phi_window);
  r.number("states", "max_abs_z_fraction", c.locator.max_abs_z_fraction);
  r.integer("states", "island_periods", c.locator.island_periods);
  r.integer("states", "island_max_period", c.locator.island_max_period);
  if (!(c.locator.chaotic_z_window > 0.0) || !(c.locator.chaotic_phi_window > 0.0)) {
    r.fail(r.line("states", "chaotic_z_window"), "locator windows must be > 0");
  }
  if (c.locator.island_periods < 1 || c.locator.island_max_period < 1) {
    r.fail(r.line("states", "island_periods"), "island periods must be >= 1");
  }

  // [semiclassical]
  c.periods = c.kind == ExperimentKind::poincare ? 200 : 20;
  r.integer("semiclassical", "periods", c.periods);
  r.choice<Dynamics>("semiclassical", "dynamics",
                     {{"time-dependent", Dynamics::time_dependent},
                      {"effective", Dynamics::effective}},
                     c.dynamics);
  r.integer("semiclassical", "seed_rows", c.seed_rows);
  r.integer("semiclassical", "seed_cols", c.seed_cols);
  r.number("semiclassical", "initial_offset", c.initial_offset);
  r.number("semiclassical", "relative_tolerance", c.relative_tolerance);
  r.number("semiclassical", "absolute_tolerance", c.absolute_tolerance);
  if (c.periods < 1) r.fail(r.line("semiclassical", "periods"), "periods must be >= 1");
  if (c.seed_rows < 1 || c.seed_cols < 1) {
    r.fail(r.line("semiclassical", "seed_rows"), "seed_rows and seed_cols must be >= 1");
  }
  if (!(c.initial_offset > 0.0)) {
    r.fail(r.line("semiclassical", "initial_offset"), "initial_offset must be > 0");
  }
  if (!(c.relative_tolerance > 0.0) || !(c.absolute_tolerance > 0.0)) {
    r.fail(r.line("semiclassical", "relative_tolerance"), "tolerances must be > 0");
  }

  // [scan]
  r.list("scan", "amplitudes", c.scan_amplitudes);
  r.list("scan", "frequencies", c.scan_frequencies);
  r.integer("scan", "samples", c.scan_samples);
  if (c.kind == ExperimentKind::chaos_fraction_scan) {
    if (c.scan_amplitudes.empty()) r.fail(0, "missing required key [scan] amplitudes");
    if (c.scan_frequencies.empty()) r.fail(0, "missing required key [scan] frequencies");
  }
  for (double w : c.scan_frequencies) {
    if (!(w > 0.0)) r.fail(r.line("scan", "frequencies"), "frequencies must be > 0");
  }
  if (c.scan_samples < 1) r.fail(r.line("scan", "samples"), "samples must be >= 1");

  // [quantum]
  r.number("quantum", "max_step", c.max_step);
  if (!(c.max_step > 0.0)) r.fail(r.line("quantum", "max_step"), "max_step must be > 0");

  // [wigner]
  r.integer("wigner", "n_traj", c.n_traj);
  r.choice<InitialSampling>("wigner", "sampling",
                            {{"fixed-number", InitialSampling::fixed_number},
                             {"glauber", InitialSampling::glauber}},
                            c.sampling);
  r.integer("wigner", "site", c.site);
  if (c.n_traj < 2) r.fail(r.line("wigner", "n_traj"), "n_traj must be >= 2");
  if (c.site != 1 && c.site != 2) r.fail(r.line("wigner", "site"), "site must be 1 or 2");

  // [bhattacharyya]
  c.perturbations = {1e-3, 1e-4, 1e-5};
  r.list("bhattacharyya", "perturbations", c.perturbations);
  r.choice<DivergenceMethod>("bhattacharyya", "method",
                             {{"exact", DivergenceMethod::exact},
                              {"binned-tw", DivergenceMethod::binned_tw}},
                             c.method);
  for (double p : c.perturbations) {
    if (!(p > -1.0)) r.fail(r.line("bhattacharyya", "perturbations"), "perturbations must exceed -1");
  }

  if (!issues.empty()) {
    std::stable_sort(issues.begin(), issues.end(),
                     [](const ConfigIssue& a, const ConfigIssue& b) { return a.line < b.line; });
    throw ConfigError(std::move(issues));
  }
  return c;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) { return parse_numbered(text, 1); }

std::string ExperimentConfig::canonical() const {
  std::ostringstream o;
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : ", ") + format_double(x);
    return s;
  };
  o << "experiment = " << kind_name(kind) << "\n";
  o << "seed = " << seed << "\n";
  o << "output_dir = " << output_dir << "\n";
  o << "\n[system]\n";
  o << "particles = " << system.particles << "\n";
  o << "interaction = " << format_double(system.interaction) << "\n";
  o << "tunnelling = " << format_double(system.tunnelling) << "\n";
  o << "drive_amplitude = " << format_double(system.drive_amplitude) << "\n";
  if (system.drive_frequency > 0.0) {
    o << "drive_frequency = " << format_double(system.drive_frequency) << "\n";
  }
  o << "\n[time]\n";
  o << "t_end = " << format_double(t_end) << "\n";
  o << "unit = " << (time_unit == TimeUnit::periods ? "periods" : "absolute") << "\n";
  o << "samples = " << samples << "\n";
  o << "\n[grid]\n";
  o << "nz = " << grid.nz << "\nnphi = " << grid.nphi << "\n";
  o << "z_min = " << format_double(grid.z_min) << "\nz_max = " << format_double(grid.z_max) << "\n";
  o << "\n[states]\n";
  std::string states;
  for (const auto& s : this->states) states += (states.empty() ? "" : ", ") + s.label();
  o << "list = " << states << "\n";
  o << "chaotic_z_window = " << format_double(locator.chaotic_z_window) << "\n";
  o << "chaotic_phi_window = " << format_double(locator.chaotic_phi_window) << "\n";
  o << "max_abs_z_fraction = " << format_double(locator.max_abs_z_fraction) << "\n";
  o << "island_periods = " << locator.island_periods << "\n";
  o << "island_max_period = " << locator.island_max_period << "\n";
  o << "\n[semiclassical]\n";
  o << "periods = " << periods << "\n";
  o << "dynamics = " << (dynamics == Dynamics::effective ? "effective" : "time-dependent") << "\n";
  o << "seed_rows = " << seed_rows << "\nseed_cols = " << seed_cols << "\n";
  o << "initial_offset = " << format_double(initial_offset) << "\n";
  o << "relative_tolerance = " << format_double(relative_tolerance) << "\n";
  o << "absolute_tolerance = " << format_double(absolute_tolerance) << "\n";
  if (!scan_amplitudes.empty() || !scan_frequencies.empty()) {
    o << "\n[scan]\n";
    if (!scan_amplitudes.empty()) o << "amplitudes = " << list(scan_amplitudes) << "\n";
    if (!scan_frequencies.empty()) o << "frequencies = " << list(scan_frequencies) << "\n";
    o << "samples = " << scan_samples << "\n";
  }
  o << "\n[quantum]\n";
  o << "max_step = " << format_double(max_step) << "\n";
  o << "\n[wigner]\n";
  o << "n_traj = " << n_traj << "\n";
  o << "sampling = " << (sampling == InitialSampling::glauber ? "glauber" : "fixed-number") << "\n";
  o << "site = " << site << "\n";
  o << "\n[bhattacharyya]\n";
  o << "perturbations = " << list(perturbations) << "\n";
  o << "method = " << (method == DivergenceMethod::exact ? "exact" : "binned-tw") << "\n";
  return o.str();
}

std::string ExperimentConfig::hash() const {
  // output_dir does not change results, so it stays out of the hash
  std::string text = canonical();
  const auto pos = text.find("output_dir = ");
  text.erase(pos, text.find('\n', pos) - pos + 1);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig load_config(const std::string& path, std::optional<ExperimentKind> kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError({{0, "cannot open config file '" + path + "'"}});
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  bool injected = false;
  if (kind) {
    // the command line names the experiment; a file may omit it
    const bool names_kind = [&] {
      std::istringstream lines(text);
      std::string l;
      while (std::getline(lines, l)) {
        const std::string t = trim(l);
        if (!t.empty() && t.front() == '[') return false;
        if (t.rfind("experiment", 0) == 0) return true;
      }
      return false;
    }();
    if (!names_kind) {
      text = "experiment = " + std::string(kind_name(*kind)) + "\n" + text;
      injected = true;
    }
  }
  ExperimentConfig c = parse_numbered(text, injected ? 0 : 1);
  if (kind && c.kind != *kind) {
    throw ConfigError({{0, "config file is for '" + std::string(kind_name(c.kind)) +
                               "' but the command line asks for '" +
                               std::string(kind_name(*kind)) + "'"}});
  }
  return c;
}

}  // namespace dimer
