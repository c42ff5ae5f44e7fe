// Command-line front end for the MPRK22 integrators and stability toolkit.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 numerical error.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mprk/experiments.hpp"
#include "mprk/mprk.hpp"

namespace ex = mprk::experiments;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

std::string join_names() {
  std::string out;
  for (const auto& n : ex::named_experiments()) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modified Patankar-Runge-Kutta (MPRK22) integrators and stability analysis"};
  app.require_subcommand(1);

  std::string config_path;
  bool integrate_overwrite = false;
  auto* integrate_cmd = app.add_subcommand("integrate", "Integrate the 2x2 linear test problem from a JSON config");
  integrate_cmd->add_option("--config", config_path, "Experiment configuration (JSON)")->required();
  integrate_cmd->add_flag("--overwrite", integrate_overwrite, "Replace an existing trajectory file");

  std::string experiment;
  std::string named_out;
  bool named_overwrite = false;
  auto* named_cmd = app.add_subcommand("named", "Reproduce a named experiment: " + join_names());
  named_cmd->add_option("experiment-id", experiment, "Experiment identifier")->required();
  named_cmd->add_option("--out", named_out, "Output directory")->required();
  named_cmd->add_flag("--overwrite", named_overwrite, "Replace existing files");

  double region_alpha = 0.5;
  double region_zmin = -50.0;
  std::size_t region_resolution = 200;
  std::string region_out;
  bool region_overwrite = false;
  auto* region_cmd = app.add_subcommand("region", "Rasterize the MPRK22ncs(alpha) stability region");
  region_cmd->add_option("--alpha", region_alpha, "Scheme parameter alpha >= 1/2")->required();
  region_cmd->add_option("--zmin", region_zmin, "Lower corner of the square [zmin, 0)^2")->required();
  region_cmd->add_option("--resolution", region_resolution, "Lattice points per axis")->required();
  region_cmd->add_option("--out", region_out, "Output CSV file")->required();
  region_cmd->add_flag("--overwrite", region_overwrite, "Replace an existing file");

  double crit_a = 0.0;
  double crit_b = 0.0;
  double crit_alpha = 0.5;
  auto* crit_cmd = app.add_subcommand("critical-dt", "Critical step size of MPRK22ncs(alpha), 1/2 <= alpha < 1");
  crit_cmd->add_option("--a", crit_a, "Rate a > 0")->required();
  crit_cmd->add_option("--b", crit_b, "Rate b > 0")->required();
  crit_cmd->add_option("--alpha", crit_alpha, "Scheme parameter")->required();

  double conv_alpha = 1.0;
  std::string conv_variant = "cs";
  std::string conv_out;
  double conv_t_end = 0.1;
  int conv_kmin = 4;
  int conv_kmax = 10;
  bool conv_overwrite = false;
  auto* conv_cmd = app.add_subcommand("convergence", "Convergence study on the 25/25 test problem, dt = 0.1/2^k");
  conv_cmd->add_option("--alpha", conv_alpha, "Scheme parameter alpha >= 1/2")->required();
  conv_cmd->add_option("--variant", conv_variant, "cs or ncs")->required()->check(CLI::IsMember({"cs", "ncs"}));
  conv_cmd->add_option("--out", conv_out, "Output CSV file")->required();
  conv_cmd->add_option("--t-end", conv_t_end, "Final time")->capture_default_str();
  conv_cmd->add_option("--kmin", conv_kmin, "Smallest k")->capture_default_str();
  conv_cmd->add_option("--kmax", conv_kmax, "Largest k")->capture_default_str();
  conv_cmd->add_flag("--overwrite", conv_overwrite, "Replace an existing file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*integrate_cmd) {
      ex::ExperimentConfig config = ex::load_config(config_path);
      config.outputs.overwrite = config.outputs.overwrite || integrate_overwrite;
      const ex::IntegrationOutcome outcome = ex::run_integration(config);
      if (!outcome.result.ok()) {
        std::cerr << "error: step " << outcome.result.failure->step_index << ": " << outcome.result.failure->message
                  << '\n';
        return kExitNumerical;
      }
      std::cout << outcome.path.string() << '\n';
    } else if (*named_cmd) {
      for (const auto& path : ex::run_named(experiment, named_out, named_overwrite)) {
        std::cout << path.string() << '\n';
      }
    } else if (*region_cmd) {
      const mprk::RegionRaster raster = mprk::raster_region(region_alpha, region_zmin, region_resolution);
      std::ofstream out = ex::open_output(region_out, region_overwrite);
      ex::write_region_csv(out, raster);
      std::cout << region_out << '\n';
    } else if (*crit_cmd) {
      std::cout << ex::format_double(mprk::critical_time_step(crit_a, crit_b, crit_alpha)) << '\n';
    } else if (*conv_cmd) {
      if (conv_kmin > conv_kmax) throw ex::ConfigError("--kmin must not exceed --kmax");
      const auto rows = ex::run_convergence(conv_alpha, ex::parse_variant(conv_variant), conv_t_end,
                                            ex::halving_steps(0.1, conv_kmin, conv_kmax));
      std::ofstream out = ex::open_output(conv_out, conv_overwrite);
      ex::write_convergence_csv(out, rows);
      std::cout << conv_out << '\n';
    }
  } catch (const ex::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const mprk::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.is_numerical() ? kExitNumerical : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}
