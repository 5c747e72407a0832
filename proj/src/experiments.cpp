#include "dimer/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <variant>

#include <nlohmann/json.hpp>

#include "dimer/fock.hpp"
#include "dimer/metrics.hpp"
#include "dimer/parallel.hpp"
#include "dimer/quantum.hpp"
#include "dimer/semiclassical.hpp"
#include "dimer/wigner.hpp"

#ifndef DIMER_VERSION
#define DIMER_VERSION "unknown"
#endif

namespace dimer {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string_view toolkit_version() { return DIMER_VERSION; }

namespace {

struct Cell {
  std::variant<double, long long, std::string> v;
  Cell(double x) : v(x) {}
  Cell(int x) : v(static_cast<long long>(x)) {}
  Cell(long x) : v(static_cast<long long>(x)) {}
  Cell(long long x) : v(x) {}
  Cell(std::size_t x) : v(static_cast<long long>(x)) {}
  Cell(std::string x) : v(std::move(x)) {}
  Cell(const char* x) : v(std::string(x)) {}
};

class Csv {
 public:
  Csv(const fs::path& path, std::initializer_list<std::string_view> header) : out_(path) {
    if (!out_) throw ExperimentError("cannot write " + path.string());
    bool first = true;
    for (auto h : header) {
      out_ << (first ? "" : ",") << h;
      first = false;
    }
    out_ << "\n";
  }
  void row(std::initializer_list<Cell> cells) {
    bool first = true;
    for (const auto& c : cells) {
      if (!first) out_ << ",";
      first = false;
      if (const auto* d = std::get_if<double>(&c.v)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", *d);
        out_ << buf;
      } else if (const auto* i = std::get_if<long long>(&c.v)) {
        out_ << *i;
      } else {
        out_ << std::get<std::string>(c.v);
      }
    }
    out_ << "\n";
  }
  ~Csv() { out_.flush(); }

 private:
  std::ofstream out_;
};

struct Output {
  fs::path dir;
  std::vector<std::string> files;
  json results = json::object();

  fs::path file(const std::string& name) {
    files.push_back(name);
    return dir / name;
  }
};

struct NamedState {
  std::string label;
  PhasePoint point;  // z in particle units
};

LyapunovControls lyapunov_controls(const ExperimentConfig& c) {
  LyapunovControls l;
  l.initial_offset = c.initial_offset;
  l.periods = c.periods;
  l.tolerances.relative = c.relative_tolerance;
  l.tolerances.absolute = c.absolute_tolerance;
  l.dynamics = c.dynamics;
  if (c.system.drive_frequency > 0.0) l.strobe_period = c.system.strobe_period();
  return l;
}

PropagatorControls propagator_controls(const ExperimentConfig& c) {
  PropagatorControls pc;
  pc.max_step = c.max_step;
  return pc;
}

std::vector<NamedState> resolve_states(const ExperimentConfig& c, unsigned threads,
                                       Output& out) {
  const double n = c.system.particles;
  bool needs_locator = false;
  for (const auto& s : c.states) {
    needs_locator |= s.role != StateSpec::Role::explicit_point;
  }
  RepresentativeStates located;
  if (needs_locator) {
    LyapunovControls lc = lyapunov_controls(c);
    lc.periods = 20;
    lc.dynamics = Dynamics::time_dependent;
    const auto search =
        find_representative_states(c.system, lyapunov_grid(), lc, c.locator, threads);
    located = search.states;
    auto point = [&](PhasePoint q) { return json{{"z_over_n", q.z / n}, {"phi", q.phi}}; };
    out.results["locator"] = {{"threshold", search.fraction.threshold},
                              {"chaotic_fraction", search.fraction.fraction},
                              {"chaotic", point(located.chaotic)},
                              {"regular-1", point(located.regular_island)},
                              {"regular-2", point(located.regular_outer)}};
  }
  std::vector<NamedState> states;
  for (const auto& s : c.states) {
    switch (s.role) {
      case StateSpec::Role::chaotic: states.push_back({s.label(), located.chaotic}); break;
      case StateSpec::Role::regular_1:
        states.push_back({s.label(), located.regular_island});
        break;
      case StateSpec::Role::regular_2:
        states.push_back({s.label(), located.regular_outer});
        break;
      case StateSpec::Role::explicit_point:
        states.push_back({s.label(), {s.z_fraction * n, s.phi}});
        break;
    }
  }
  return states;
}

double strobe_or_nan(const ExperimentConfig& c) {
  return c.system.drive_frequency > 0.0 ? c.system.strobe_period()
                                        : std::numeric_limits<double>::quiet_NaN();
}

void run_poincare(const ExperimentConfig& c, unsigned threads, Output& out) {
  const GridSpec seeds_grid{c.seed_rows, c.seed_cols, c.grid.z_min, c.grid.z_max};
  std::vector<PhasePoint> seeds;
  for (std::size_t k = 0; k < seeds_grid.size(); ++k) {
    seeds.push_back({seeds_grid.z_fraction(seeds_grid.row(k)) * c.system.particles,
                     seeds_grid.phi(seeds_grid.col(k))});
  }
  SectionControls sc;
  sc.strobe_period = c.system.strobe_period();
  sc.tolerances = lyapunov_controls(c).tolerances;
  sc.dynamics = c.dynamics;
  sc.threads = threads;
  const auto section = poincare_section(c.system, seeds, c.periods, sc);
  Csv csv(out.file("poincare.csv"), {"seed", "k", "t", "z_over_n", "phi"});
  std::size_t failed = 0;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    failed += section.errors[s].has_value();
    for (std::size_t k = 0; k < section.points[s].size(); ++k) {
      const auto& q = section.points[s][k];
      csv.row({s, k, k * section.strobe_period, q.z / c.system.particles, q.phi});
    }
  }
  out.results["seeds"] = seeds.size();
  out.results["failed_seeds"] = failed;
}

void write_map(Output& out, const std::string& name, const LyapunovMap& map,
               double threshold) {
  Csv csv(out.file(name), {"i", "j", "z_over_n", "phi", "lambda", "residual", "saturated",
                           "chaotic"});
  const auto& g = map.grid;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double l = map.lambda[k];
    csv.row({g.row(k), g.col(k), g.z_fraction(g.row(k)), g.phi(g.col(k)), l,
             map.residual[k], static_cast<int>(map.saturated[k]),
             static_cast<int>(std::isfinite(l) && l > threshold)});
  }
}

void run_lyapunov_map(const ExperimentConfig& c, unsigned threads, Output& out) {
  const auto lc = lyapunov_controls(c);
  const auto driven = lyapunov_map(c.system, c.grid, lc, threads);
  const auto base =
      lyapunov_map(c.system.with_drive(0.0, c.system.drive_frequency), c.grid, lc, threads);
  const auto cf = chaotic_fraction(driven, base);
  write_map(out, "lyapunov_map.csv", driven, cf.threshold);
  write_map(out, "lyapunov_map_unmodulated.csv", base, cf.threshold);
  out.results["threshold"] = cf.threshold;
  out.results["chaotic_fraction"] = cf.fraction;
  out.results["failed_nodes"] = cf.failed;
  out.results["max_lambda"] = driven.max_lambda();
}

void run_scan(const ExperimentConfig& c, unsigned threads, Output& out) {
  Csv csv(out.file("chaos_fraction_scan.csv"),
          {"mu", "omega", "fraction", "threshold", "chaotic", "classified", "failed"});
  const GridSpec g = sample_grid(c.scan_samples);
  for (double mu : c.scan_amplitudes) {
    for (double omega : c.scan_frequencies) {
      const SystemParams p = c.system.with_drive(mu, omega);
      LyapunovControls lc = lyapunov_controls(c);
      lc.strobe_period = p.strobe_period();
      const auto cf = chaotic_fraction(p, g, lc, threads);
      csv.row({mu, omega, cf.fraction, cf.threshold, cf.chaotic, cf.classified, cf.failed});
    }
  }
  out.results["grid"] = {{"nz", g.nz}, {"nphi", g.nphi}};
}

void run_evolve(const ExperimentConfig& c, unsigned threads, Output& out) {
  const auto states = resolve_states(c, threads, out);
  const auto times = c.sample_times();
  std::vector<std::optional<Evolution>> slots(states.size());
  parallel_for(states.size(), threads, [&](std::size_t s) {
    EvolveOptions o;
    o.sample_times = times;
    o.controls = propagator_controls(c);
    const auto psi = bloch_coherent_state(c.system.particles, states[s].point.z,
                                          states[s].point.phi);
    slots[s] = evolve_state(c.system, psi, c.t_end_absolute(), o);
  });
  const double period = strobe_or_nan(c);
  Csv csv(out.file("evolve.csv"), {"state", "t", "t_over_period", "z", "std_z", "x", "y",
                                   "var_x", "var_y", "var_z", "condensate_fraction"});
  json drift = json::object();
  for (std::size_t s = 0; s < states.size(); ++s) {
    const auto& series = slots[s]->series;
    for (std::size_t k = 0; k < series.times.size(); ++k) {
      const auto& m = series.moments[k];
      csv.row({states[s].label, series.times[k], series.times[k] / period, m.z,
               std::sqrt(m.var_z), m.x, m.y, m.var_x, m.var_y, m.var_z,
               series.condensate_fraction[k]});
    }
    drift[states[s].label] = slots[s]->norm_drift;
  }
  out.results["norm_drift"] = drift;
}

void write_grid(Csv& csv, const std::string& label, double t, const GridSpec& g,
                const std::vector<double>& values) {
  for (std::size_t k = 0; k < g.size(); ++k) {
    csv.row({label, t, g.row(k), g.col(k), g.z_fraction(g.row(k)), g.phi(g.col(k)),
             values[k]});
  }
}

void run_qfunc(const ExperimentConfig& c, unsigned threads, Output& out) {
  const auto states = resolve_states(c, threads, out);
  Csv csv(out.file("qfunc.csv"), {"state", "t", "i", "j", "z_over_n", "phi", "q"});
  json norms = json::object();
  for (const auto& s : states) {
    const auto psi = bloch_coherent_state(c.system.particles, s.point.z, s.point.phi);
    EvolveOptions o;
    o.controls = propagator_controls(c);
    const auto evo = evolve_state(c.system, psi, c.t_end_absolute(), o);
    const auto q0 = q_function(psi, c.grid);
    const auto q1 = q_function(evo.state, c.grid);
    write_grid(csv, s.label, 0.0, c.grid, q0.values);
    write_grid(csv, s.label, c.t_end_absolute(), c.grid, q1.values);
    norms[s.label] = {{"initial", q0.normalization()}, {"final", q1.normalization()}};
  }
  out.results["normalization_convention"] = "(N+1)/(4 pi) * sum Q (2/N) dz dphi";
  out.results["normalization"] = norms;
}

void run_condensate_map(const ExperimentConfig& c, unsigned threads, Output& out) {
  const auto map =
      condensate_fraction_map(c.system, c.grid, c.t_end_absolute(), propagator_controls(c),
                              threads);
  Csv csv(out.file("condensate_map.csv"), {"i", "j", "z_over_n", "phi", "fraction"});
  std::size_t failed = 0;
  for (std::size_t k = 0; k < c.grid.size(); ++k) {
    failed += map.errors[k].has_value();
    csv.row({c.grid.row(k), c.grid.col(k), c.grid.z_fraction(c.grid.row(k)),
             c.grid.phi(c.grid.col(k)), map.fraction[k]});
  }
  out.results["failed_nodes"] = failed;
}

WignerControls wigner_controls(unsigned threads) {
  WignerControls wc;
  wc.threads = threads;
  return wc;
}

void run_tw_evolve(const ExperimentConfig& c, unsigned threads, Output& out) {
  const auto states = resolve_states(c, threads, out);
  const auto times = c.sample_times();
  const double period = strobe_or_nan(c);
  Csv csv(out.file("tw_moments.csv"),
          {"state", "t", "t_over_period", "z", "se_z", "x", "se_x", "y", "se_y", "var_z",
           "se_var_z", "condensate_fraction", "se_condensate_fraction", "particles"});
  Csv density(out.file("tw_density.csv"), {"state", "t", "i", "j", "z_over_n", "phi", "weight"});
  json info = json::object();
  for (const auto& s : states) {
    auto e = sample_initial_ensemble(c.system, s.point.z, s.point.phi, c.n_traj, c.seed,
                                     c.sampling);
    for (double t : times) {
      evolve_ensemble(c.system, e, t, wigner_controls(threads));
      const auto m = moment_estimate(e);
      csv.row({s.label, t, t / period, m.moments.z, m.se_z, m.moments.x, m.se_x, m.moments.y,
               m.se_y, m.moments.var_z, m.se_var_z, m.condensate_fraction,
               m.se_condensate_fraction, m.moments.particles});
    }
    const auto d = binned_phase_density(e, c.grid);
    write_grid(density, s.label, e.t, c.grid, d.weights);
    info[s.label] = {{"quarantined", e.quarantine_count()},
                     {"max_norm_drift", e.max_norm_drift},
                     {"density_out_of_range", d.out_of_range}};
  }
  out.results["ensembles"] = info;
  out.results["ordering"] = "symmetric-ordering corrections applied to all moments";
}

void run_number_dist(const ExperimentConfig& c, unsigned threads, Output& out) {
  const auto states = resolve_states(c, threads, out);
  Csv csv(out.file("number_dist.csv"), {"state", "n", "exact", "binned"});
  json info = json::object();
  for (const auto& s : states) {
    const auto psi = bloch_coherent_state(c.system.particles, s.point.z, s.point.phi);
    EvolveOptions o;
    o.controls = propagator_controls(c);
    const auto evo = evolve_state(c.system, psi, c.t_end_absolute(), o);
    auto exact = number_distribution(evo.state);
    if (c.site == 2) std::reverse(exact.probabilities.begin(), exact.probabilities.end());
    auto e = sample_initial_ensemble(c.system, s.point.z, s.point.phi, c.n_traj, c.seed,
                                     c.sampling);
    evolve_ensemble(c.system, e, c.t_end_absolute(), wigner_controls(threads));
    const auto binned = binned_number_distribution(e, c.site);
    for (std::size_t n = 0; n < exact.probabilities.size(); ++n) {
      csv.row({s.label, n, exact.probabilities[n], binned.probabilities[n]});
    }
    const auto db = bhattacharyya_distance(exact.probabilities, binned.probabilities);
    info[s.label] = {{"bhattacharyya_distance", db.disjoint ? json("inf") : json(db.value)},
                     {"out_of_range", binned.out_of_range},
                     {"quarantined", e.quarantine_count()}};
  }
  out.results["distributions"] = info;
}

void run_bhattacharyya(const ExperimentConfig& c, unsigned threads, Output& out) {
  const auto states = resolve_states(c, threads, out);
  const auto times = c.sample_times();
  Csv csv(out.file("bhattacharyya.csv"), {"method", "p", "state", "t", "d_b", "disjoint"});
  const std::string method = c.method == DivergenceMethod::exact ? "exact" : "binned-tw";
  std::size_t quarantined = 0;
  for (double p : c.perturbations) {
    for (const auto& s : states) {
      PerturbationOptions o;
      o.method = c.method;
      o.n_traj = c.n_traj;
      o.seed = c.seed;
      o.sampling = c.sampling;
      o.propagator = propagator_controls(c);
      o.threads = threads;
      const auto series = perturbation_experiment(c.system, s.point, p, times, o);
      quarantined += series.quarantined;
      for (std::size_t k = 0; k < series.times.size(); ++k) {
        csv.row({method, p, s.label, series.times[k], series.distance[k],
                 static_cast<int>(series.disjoint[k])});
      }
    }
  }
  out.results["method"] = method;
  out.results["quarantined"] = quarantined;
  out.results["noise_floor"] = {
      {"binning_sigma", binning_sigma(c.n_traj, c.system.particles + 1)},
      {"d_b", sampling_noise_floor(c.system.particles,
                                   binning_sigma(c.n_traj, c.system.particles + 1))}};
}

void run_effective_compare(const ExperimentConfig& c, unsigned threads, Output& out) {
  const auto states = resolve_states(c, threads, out);
  const auto times = c.sample_times();
  Csv series(out.file("effective_compare.csv"),
             {"state", "t", "z_time_dependent", "z_effective", "condensate_time_dependent",
              "condensate_effective"});
  double worst = 0.0;
  for (const auto& s : states) {
    const auto psi = bloch_coherent_state(c.system.particles, s.point.z, s.point.phi);
    std::array<std::optional<Evolution>, 2> runs;
    parallel_for(2, threads, [&](std::size_t k) {
      EvolveOptions o;
      o.sample_times = times;
      o.controls = propagator_controls(c);
      o.source = k == 0 ? HamiltonianSource::time_dependent : HamiltonianSource::effective;
      runs[k] = evolve_state(c.system, psi, c.t_end_absolute(), o);
    });
    for (std::size_t k = 0; k < times.size(); ++k) {
      const auto& a = runs[0]->series;
      const auto& b = runs[1]->series;
      series.row({s.label, a.times[k], a.moments[k].z, b.moments[k].z,
                  a.condensate_fraction[k], b.condensate_fraction[k]});
      worst = std::max(worst, std::abs(a.moments[k].z - b.moments[k].z) / c.system.particles);
    }
  }

  const GridSpec seeds_grid{c.seed_rows, c.seed_cols, c.grid.z_min, c.grid.z_max};
  std::vector<PhasePoint> seeds;
  for (std::size_t k = 0; k < seeds_grid.size(); ++k) {
    seeds.push_back({seeds_grid.z_fraction(seeds_grid.row(k)) * c.system.particles,
                     seeds_grid.phi(seeds_grid.col(k))});
  }
  Csv sections(out.file("effective_sections.csv"),
               {"dynamics", "seed", "k", "z_over_n", "phi"});
  for (Dynamics d : {Dynamics::time_dependent, Dynamics::effective}) {
    SectionControls sc;
    sc.strobe_period = c.system.strobe_period();
    sc.tolerances = lyapunov_controls(c).tolerances;
    sc.dynamics = d;
    sc.threads = threads;
    const auto section = poincare_section(c.system, seeds, c.periods, sc);
    const std::string name = d == Dynamics::effective ? "effective" : "time-dependent";
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      for (std::size_t k = 0; k < section.points[s].size(); ++k) {
        const auto& q = section.points[s][k];
        sections.row({name, s, k, q.z / c.system.particles, q.phi});
      }
    }
  }
  out.results["max_abs_z_difference_over_n"] = worst;
  out.results["bessel_factor"] = effective_bessel_factor(c.system);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  Output out;
  out.dir = fs::path(config.output_dir) /
            (std::string(kind_name(config.kind)) + "-" + config.hash());
  std::error_code ec;
  fs::create_directories(out.dir, ec);
  if (ec) throw ExperimentError("cannot create " + out.dir.string() + ": " + ec.message());

  const std::string kind(kind_name(config.kind));
  try {
    switch (config.kind) {
      case ExperimentKind::poincare: run_poincare(config, threads, out); break;
      case ExperimentKind::lyapunov_map: run_lyapunov_map(config, threads, out); break;
      case ExperimentKind::chaos_fraction_scan: run_scan(config, threads, out); break;
      case ExperimentKind::evolve: run_evolve(config, threads, out); break;
      case ExperimentKind::qfunc: run_qfunc(config, threads, out); break;
      case ExperimentKind::condensate_map: run_condensate_map(config, threads, out); break;
      case ExperimentKind::tw_evolve: run_tw_evolve(config, threads, out); break;
      case ExperimentKind::number_dist: run_number_dist(config, threads, out); break;
      case ExperimentKind::bhattacharyya: run_bhattacharyya(config, threads, out); break;
      case ExperimentKind::effective_compare: run_effective_compare(config, threads, out); break;
    }
  } catch (const ExperimentError&) {
    throw;
  } catch (const std::exception& e) {
    throw ExperimentError(kind + ": " + e.what());
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json meta;
  meta["experiment"] = kind;
  meta["config_hash"] = config.hash();
  meta["config"] = config.canonical();
  meta["seed"] = config.seed;
  meta["version"] = std::string(toolkit_version());
  meta["threads"] = threads;
  meta["system"] = {{"interaction", config.system.interaction},
                    {"tunnelling", config.system.tunnelling},
                    {"drive_amplitude", config.system.drive_amplitude},
                    {"drive_frequency", config.system.drive_frequency},
                    {"particles", config.system.particles},
                    {"nonlinearity", config.system.nonlinearity()}};
  const double period = config.system.drive_frequency > 0.0 ? config.system.strobe_period() : 0.0;
  meta["time"] = {{"t_end_absolute", config.t_end_absolute()},
                  {"t_end_periods", period > 0.0 ? json(config.t_end_absolute() / period)
                                                 : json(nullptr)},
                  {"period", period > 0.0 ? json(period) : json(nullptr)}};
  meta["tolerances"] = {{"classical_relative", config.relative_tolerance},
                        {"classical_absolute", config.absolute_tolerance},
                        {"quantum_max_step", config.max_step}};
  meta["files"] = out.files;
  meta["results"] = out.results;
  meta["wall_seconds"] = wall;
  {
    std::ofstream f(out.dir / "meta.json");
    if (!f) throw ExperimentError("cannot write meta.json");
    f << meta.dump(2) << "\n";
  }
  out.files.push_back("meta.json");
  return {out.dir, out.files, wall};
}

}  // namespace dimer
