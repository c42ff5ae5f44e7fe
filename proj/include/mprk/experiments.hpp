#ifndef MPRK_EXPERIMENTS_HPP
#define MPRK_EXPERIMENTS_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mprk/error.hpp"
#include "mprk/linear2d.hpp"
#include "mprk/mprk22.hpp"
#include "mprk/pds.hpp"
#include "mprk/stability.hpp"

namespace mprk::experiments {

namespace fs = std::filesystem;

/// Bad configuration, unknown experiment, or a refused overwrite. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 17 significant digits round-trip any double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Short form for file names: 0.5, 0.8, 1, 20.
inline std::string format_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline StageVariant parse_variant(std::string_view s) {
  if (s == "cs") return StageVariant::ConservativeStages;
  if (s == "ncs") return StageVariant::NonConservativeStages;
  throw ConfigError("unknown variant '" + std::string(s) + "' (expected cs or ncs)");
}

struct ProblemConfig {
  double a = 25.0;
  double b = 25.0;
  StateVector y0;
};

struct RunConfig {
  double dt = 0.0;
  std::size_t n_steps = 0;
};

struct OutputConfig {
  fs::path directory;
  std::string prefix;
  bool overwrite = false;
};

struct ExperimentConfig {
  ProblemConfig problem;
  double alpha = 1.0;
  StageVariant variant = StageVariant::ConservativeStages;
  RunConfig run;
  OutputConfig outputs;

  SchemeParams params() const { return SchemeParams(alpha, variant); }
  Linear2x2PDS pds() const { return Linear2x2PDS(problem.a, problem.b); }
  fs::path trajectory_path() const { return outputs.directory / (outputs.prefix + "_trajectory.csv"); }
};

namespace detail {

using nlohmann::json;

inline void require_keys(const json& j, std::string_view where, const std::set<std::string>& required,
                         const std::set<std::string>& optional = {}) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!required.count(key) && !optional.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
    }
  }
  for (const auto& key : required) {
    if (!j.contains(key)) throw ConfigError("missing key '" + key + "' in " + std::string(where));
  }
}

inline double number(const json& j, std::string_view name) {
  if (!j.is_number()) throw ConfigError(std::string(name) + " must be a number");
  return j.get<double>();
}

}  // namespace detail

/// Parses and validates an experiment configuration. Unknown keys are rejected.
///
/// {
///   "problem": {"a": 25, "b": 25, "y0": [0.998, 0.002]},
///   "scheme":  {"alpha": 1.0, "variant": "cs"},
///   "run":     {"dt": 4.0, "n_steps": 50},
///   "outputs": {"directory": "out", "prefix": "run", "overwrite": false}
/// }
inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using detail::number;
  detail::require_keys(j, "config", {"problem", "scheme", "run", "outputs"});
  ExperimentConfig c;

  const auto& prob = j.at("problem");
  detail::require_keys(prob, "problem", {"a", "b", "y0"});
  c.problem.a = number(prob.at("a"), "problem.a");
  c.problem.b = number(prob.at("b"), "problem.b");
  const auto& y0 = prob.at("y0");
  if (!y0.is_array() || y0.size() != 2) throw ConfigError("problem.y0 must be an array of two numbers");
  c.problem.y0 = StateVector(2);
  c.problem.y0 << number(y0[0], "problem.y0[0]"), number(y0[1], "problem.y0[1]");

  const auto& scheme = j.at("scheme");
  detail::require_keys(scheme, "scheme", {"alpha", "variant"});
  c.alpha = number(scheme.at("alpha"), "scheme.alpha");
  if (!scheme.at("variant").is_string()) throw ConfigError("scheme.variant must be a string");
  c.variant = parse_variant(scheme.at("variant").get<std::string>());

  const auto& run = j.at("run");
  detail::require_keys(run, "run", {"dt", "n_steps"});
  c.run.dt = number(run.at("dt"), "run.dt");
  const auto& n_steps = run.at("n_steps");
  if (!n_steps.is_number_integer() || (!n_steps.is_number_unsigned() && n_steps.get<long long>() < 0)) {
    throw ConfigError("run.n_steps must be a nonnegative integer");
  }
  c.run.n_steps = n_steps.get<std::size_t>();

  const auto& out = j.at("outputs");
  detail::require_keys(out, "outputs", {"directory", "prefix"}, {"overwrite"});
  if (!out.at("directory").is_string() || !out.at("prefix").is_string()) {
    throw ConfigError("outputs.directory and outputs.prefix must be strings");
  }
  c.outputs.directory = out.at("directory").get<std::string>();
  c.outputs.prefix = out.at("prefix").get<std::string>();
  if (c.outputs.prefix.empty()) throw ConfigError("outputs.prefix must not be empty");
  if (out.contains("overwrite")) {
    if (!out.at("overwrite").is_boolean()) throw ConfigError("outputs.overwrite must be a boolean");
    c.outputs.overwrite = out.at("overwrite").get<bool>();
  }

  // Preconditions of the modules the config feeds.
  try {
    (void)c.params();
    (void)c.pds();
    require_positive(c.problem.y0, "problem.y0");
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!(c.run.dt > 0.0) || !std::isfinite(c.run.dt)) throw ConfigError("run.dt must be positive");
  return c;
}

inline ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  return parse_config(j);
}

/// Opens `path` for writing, creating parent directories. Refuses to
/// replace an existing file unless `overwrite` is set.
inline std::ofstream open_output(const fs::path& path, bool overwrite) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (fs::exists(path) && !overwrite) {
    throw ConfigError("refusing to overwrite existing file " + path.string() + " (pass --overwrite)");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open output file " + path.string());
  return out;
}

inline constexpr std::string_view kTrajectoryHeader = "step,t,y1,y2,mass,err1,err2";
inline constexpr std::string_view kRegionHeader = "z_a,z_b,stable";
inline constexpr std::string_view kConvergenceHeader = "dt,error,observed_order";

/// Error columns compare against the analytic solution when `problem` is given
/// and are left empty otherwise.
inline void write_trajectory_csv(std::ostream& out, const std::vector<double>& times,
                                 const std::vector<StateVector>& states,
                                 const std::optional<Linear2x2PDS>& problem) {
  out << kTrajectoryHeader << '\n';
  for (std::size_t k = 0; k < states.size(); ++k) {
    const StateVector& y = states[k];
    out << k << ',' << format_double(times[k]) << ',' << format_double(y[0]) << ',' << format_double(y[1])
        << ',' << format_double(total_mass(y)) << ',';
    if (problem) {
      const StateVector exact = exact_solution(*problem, states.front(), times[k]);
      out << format_double(y[0] - exact[0]) << ',' << format_double(y[1] - exact[1]);
    } else {
      out << ',';
    }
    out << '\n';
  }
}

inline void write_region_csv(std::ostream& out, const RegionRaster& raster) {
  out << kRegionHeader << '\n';
  for (std::size_t ib = 0; ib < raster.resolution(); ++ib) {
    for (std::size_t ia = 0; ia < raster.resolution(); ++ia) {
      out << format_double(raster.coordinate(ia)) << ',' << format_double(raster.coordinate(ib)) << ','
          << (raster.stable(ia, ib) ? 1 : 0) << '\n';
    }
  }
}

struct IntegrationOutcome {
  fs::path path;
  IntegrationResult result;
};

/// Integrates the 2x2 test problem of `config` and writes the trajectory CSV.
/// On a step failure the partial trajectory is still written.
inline IntegrationOutcome run_integration(const ExperimentConfig& config) {
  const Linear2x2PDS pds = config.pds();
  const ProductionSystem system = linear_production_system(pds.pds_matrix());
  IntegrationResult result =
      integrate(stepper(system), config.problem.y0, config.run.dt, config.run.n_steps, config.params());
  const fs::path path = config.trajectory_path();
  std::ofstream out = open_output(path, config.outputs.overwrite);
  write_trajectory_csv(out, result.trajectory.times, result.trajectory.states, pds);
  return {path, std::move(result)};
}

struct ConvergenceRow {
  double dt;
  double error;
  std::optional<double> observed_order;
};

/// Max-norm error at t_end against the analytic solution of the 25/25 test
/// problem for each dt; orders from consecutive rows.
inline std::vector<ConvergenceRow> run_convergence(double alpha, StageVariant variant, double t_end,
                                                   const std::vector<double>& dt_list,
                                                   const Linear2x2PDS& pds = Linear2x2PDS(25.0, 25.0),
                                                   const StateVector& y0 = (StateVector(2) << 0.998, 0.002).finished()) {
  const SchemeParams params(alpha, variant);
  const ProductionSystem system = linear_production_system(pds.pds_matrix());
  const StateVector exact = exact_solution(pds, y0, t_end);
  std::vector<ConvergenceRow> rows;
  for (double dt : dt_list) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidParameter, "step sizes must be positive");
    const double steps = std::round(t_end / dt);
    if (std::abs(steps * dt - t_end) > 1e-9 * t_end) {
      throw Error(ErrorCode::InvalidParameter, "t_end is not an integer multiple of dt = " + format_double(dt));
    }
    if (pds.interior_steady_states() && !classify(ScaledStepPoint::from(pds, dt), params).stable) {
      throw Error(ErrorCode::InvalidParameter, "dt = " + format_double(dt) + " lies outside the stability region");
    }
    const IntegrationResult r = integrate(stepper(system), y0, dt, static_cast<std::size_t>(steps), params);
    if (!r.ok()) throw Error(r.failure->code, r.failure->message);
    const double err = (r.trajectory.states.back() - exact).cwiseAbs().maxCoeff();
    ConvergenceRow row{dt, err, std::nullopt};
    if (!rows.empty()) {
      const ConvergenceRow& prev = rows.back();
      row.observed_order = std::log(prev.error / err) / std::log(prev.dt / dt);
    }
    rows.push_back(row);
  }
  return rows;
}

inline void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << kConvergenceHeader << '\n';
  for (const auto& r : rows) {
    out << format_double(r.dt) << ',' << format_double(r.error) << ',';
    if (r.observed_order) out << format_double(*r.observed_order);
    out << '\n';
  }
}

/// dt = 0.1 / 2^k for k = k_min..k_max.
inline std::vector<double> halving_steps(double base, int k_min, int k_max) {
  std::vector<double> out;
  for (int k = k_min; k <= k_max; ++k) out.push_back(std::ldexp(base, -k));
  return out;
}

inline const std::vector<std::string>& named_experiments() {
  static const std::vector<std::string> names{"exact-solution", "fig4",         "fig6",       "fig7",
                                              "fig8",           "region-fig2", "points-fig5", "convergence"};
  return names;
}

// Shared setup of the named experiments: a = b = 25.
inline constexpr double kRate = 25.0;
inline constexpr std::size_t kFigureSteps = 200;
inline constexpr std::size_t kFig4Steps = 100;
inline const std::vector<double> kRegionAlphas{0.5, 0.6, 0.7, 0.8, 0.9};
inline constexpr double kRegionZMin = -50.0;
inline constexpr std::size_t kRegionResolution = 200;

inline StateVector reference_initial_state() { return (StateVector(2) << 0.998, 0.002).finished(); }
inline StateVector perturbed_initial_state() { return (StateVector(2) << 0.501, 0.499).finished(); }

inline fs::path trajectory_file(const fs::path& dir, const std::string& figure, StageVariant v, double alpha) {
  return dir / (figure + "_" + std::string(short_name(v)) + "_alpha" + format_label(alpha) + ".csv");
}

inline fs::path region_file(const fs::path& dir, double alpha) {
  return dir / ("region_fig2_alpha" + format_label(alpha) + ".csv");
}

namespace detail {

struct NamedRun {
  const fs::path& dir;
  bool overwrite;
  std::vector<fs::path> written;

  void trajectory(const fs::path& path, double alpha, StageVariant v, double dt, std::size_t steps,
                  const StateVector& y0) {
    const Linear2x2PDS pds(kRate, kRate);
    const ProductionSystem system = linear_production_system(pds.pds_matrix());
    const IntegrationResult r = integrate(stepper(system), y0, dt, steps, SchemeParams(alpha, v));
    if (!r.ok()) throw Error(r.failure->code, "step " + std::to_string(r.failure->step_index) + ": " + r.failure->message);
    std::ofstream out = open_output(path, overwrite);
    write_trajectory_csv(out, r.trajectory.times, r.trajectory.states, pds);
    written.push_back(path);
  }
};

}  // namespace detail

/// Writes the data files for one named experiment into `dir` and returns their paths.
inline std::vector<fs::path> run_named(const std::string& name, const fs::path& dir, bool overwrite = false) {
  detail::NamedRun run{dir, overwrite, {}};
  const std::array<StageVariant, 2> variants{StageVariant::ConservativeStages, StageVariant::NonConservativeStages};

  if (name == "exact-solution") {
    const Linear2x2PDS pds(kRate, kRate);
    const StateVector y0 = reference_initial_state();
    constexpr std::size_t samples = 1000;
    std::vector<double> times;
    std::vector<StateVector> states;
    for (std::size_t k = 0; k < samples; ++k) {
      const double t = 0.2 * static_cast<double>(k) / static_cast<double>(samples - 1);
      times.push_back(t);
      states.push_back(exact_solution(pds, y0, t));
    }
    const fs::path path = dir / "exact_solution.csv";
    std::ofstream out = open_output(path, overwrite);
    write_trajectory_csv(out, times, states, pds);
    run.written.push_back(path);
  } else if (name == "fig4") {
    for (double alpha : {1.0, 2.0}) {
      for (double dt : {4.0, 20.0}) {
        for (StageVariant v : variants) {
          const fs::path path =
              dir / ("fig4_" + std::string(short_name(v)) + "_alpha" + format_label(alpha) + "_dt" + format_label(dt) + ".csv");
          run.trajectory(path, alpha, v, dt, kFig4Steps, reference_initial_state());
        }
      }
    }
  } else if (name == "fig6" || name == "fig7" || name == "fig8") {
    const double offset = name == "fig6" ? -0.1 : 0.1;
    const StateVector y0 = name == "fig8" ? perturbed_initial_state() : reference_initial_state();
    for (double alpha : {0.5, 0.8}) {
      const double dt = critical_time_step(kRate, kRate, alpha) + offset;
      for (StageVariant v : variants) {
        if (name == "fig8" && v == StageVariant::ConservativeStages) continue;
        run.trajectory(trajectory_file(dir, name, v, alpha), alpha, v, dt, kFigureSteps, y0);
      }
    }
  } else if (name == "region-fig2") {
    for (double alpha : kRegionAlphas) {
      const RegionRaster raster = raster_region(alpha, kRegionZMin, kRegionResolution);
      const fs::path path = region_file(dir, alpha);
      std::ofstream out = open_output(path, overwrite);
      write_region_csv(out, raster);
      run.written.push_back(path);

      const fs::path bpath = dir / ("region_fig2_boundary_alpha" + format_label(alpha) + ".csv");
      std::ofstream bout = open_output(bpath, overwrite);
      bout << "xi,f\n";
      for (std::size_t k = 0; k < kRegionResolution; ++k) {
        const double xi = raster.coordinate(k);
        const double f = boundary_f(xi, alpha);
        if (!std::isfinite(f)) continue;  // whole column stable
        bout << format_double(xi) << ',' << format_double(f) << '\n';
      }
      run.written.push_back(bpath);
    }
  } else if (name == "points-fig5") {
    const fs::path path = dir / "points_fig5.csv";
    std::ofstream out = open_output(path, overwrite);
    out << "alpha,label,dt,z_a,z_b,r0,stable\n";
    for (double alpha : {0.5, 0.8}) {
      const double dt_star = critical_time_step(kRate, kRate, alpha);
      const SchemeParams params(alpha, StageVariant::NonConservativeStages);
      const std::array<std::pair<const char*, double>, 3> points{
          {{"dt1", dt_star - 0.1}, {"dt_star", dt_star}, {"dt2", dt_star + 0.1}}};
      for (const auto& [label, dt] : points) {
        const ScaledStepPoint z{-kRate * dt, -kRate * dt};
        const StabilityVerdict verdict = classify(z, params);
        out << format_label(alpha) << ',' << label << ',' << format_double(dt) << ',' << format_double(z.z_a) << ','
            << format_double(z.z_b) << ',' << format_double(verdict.r_value) << ',' << (verdict.stable ? 1 : 0)
            << '\n';
      }
    }
    run.written.push_back(path);
  } else if (name == "convergence") {
    for (double alpha : {0.5, 1.0}) {
      for (StageVariant v : variants) {
        const auto rows = run_convergence(alpha, v, 0.1, halving_steps(0.1, 4, 10));
        const fs::path path = trajectory_file(dir, "convergence", v, alpha);
        std::ofstream out = open_output(path, overwrite);
        write_convergence_csv(out, rows);
        run.written.push_back(path);
      }
    }
  } else {
    throw ConfigError("unknown experiment '" + name + "'");
  }
  return run.written;
}

/// Minimal CSV reader for the files written above (no quoting).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw ConfigError("no column named " + std::string(name));
  }
};

inline CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  const auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  CsvTable table;
  std::string line;
  if (std::getline(in, line)) table.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty()) table.rows.push_back(split(line));
  }
  return table;
}

}  // namespace mprk::experiments

#endif  // MPRK_EXPERIMENTS_HPP
