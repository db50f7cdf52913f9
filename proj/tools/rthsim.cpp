#include "rth/scenario.hpp"
#include "rth/verify.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitVerify = 4;

int do_run(const std::string& config_path, const std::string& output_override,
           std::optional<rth::ModelKind> forced_model) {
  rth::ScenarioConfig cfg = rth::parse_config(config_path);
  if (forced_model) cfg.model = *forced_model;
  std::optional<std::filesystem::path> out;
  if (!output_override.empty()) out = output_override;
  const auto artifacts = rth::run_scenario(cfg, out);
  std::cout << "wrote " << artifacts.files.size() << " files to "
            << artifacts.directory.string() << '\n';
  return kExitOk;
}

int do_render(const std::string& snapshot_path, const std::string& out_path,
              const std::string& reduce, const std::string& title_flag) {
  const auto snap = rth::read_snapshot(snapshot_path);
  std::string title = title_flag;
  if (title.empty()) title = std::filesystem::path(snapshot_path).stem().string();

  rth::ScalarField field;
  if (!snap.is_traveler) {
    if (!reduce.empty())
      throw rth::ConfigError("--reduce only applies to traveler snapshots");
    field = snap.scalar;
  } else {
    if (reduce.empty())
      throw rth::ConfigError(
          "traveler snapshots need --reduce=home-marginal|position-marginal|"
          "slice:<i1>,<i2>");
    const auto v = snap.traveler.frame == rth::Frame::eulerian
                       ? snap.traveler
                       : rth::to_eulerian(snap.traveler);
    if (reduce == "home-marginal") {
      field = rth::integrate_position(v);  // field over home nodes
    } else if (reduce == "position-marginal") {
      field = rth::integrate_home(v);  // field over position nodes
    } else if (reduce.rfind("slice:", 0) == 0) {
      const auto spec = reduce.substr(6);
      const auto comma = spec.find(',');
      if (comma == std::string::npos)
        throw rth::ConfigError("slice reduction needs two indices: slice:<i1>,<i2>");
      const auto j1 = static_cast<rth::Index>(std::stol(spec.substr(0, comma)));
      const auto j2 = static_cast<rth::Index>(std::stol(spec.substr(comma + 1)));
      const auto n = v.grid.points;
      if (j1 < 0 || j1 >= n || j2 < 0 || j2 >= n)
        throw rth::ConfigError("slice indices out of range");
      field = rth::ScalarField(v.grid, v.values.col(rth::flat_index(j1, j2, n)));
      title += " slice " + std::to_string(j1) + "," + std::to_string(j2);
    } else {
      throw rth::ConfigError("unknown reduction '" + reduce + "'");
    }
  }
  rth::render_heatmap(out_path, field, title);
  std::cout << "wrote " << out_path << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"return-to-home movement model: scenario runner and verifier"};
  app.require_subcommand(1);

  std::string config_path, output_override;
  auto* run_cmd = app.add_subcommand("run", "run a scenario config");
  run_cmd->add_option("config", config_path, "scenario config file")->required();
  run_cmd->add_option("--output", output_override,
                      "output directory (overrides the config; RTHSIM_OUTPUT_DIR "
                      "overrides both)");

  bool quick = false, full = false;
  auto* verify_cmd = app.add_subcommand("verify", "run the verification suite");
  verify_cmd->add_flag("--quick", quick, "small grids, seconds");
  verify_cmd->add_flag("--full", full, "reference grids (default)");

  std::string snapshot_path, render_out, reduce, title;
  auto* render_cmd = app.add_subcommand("render", "render a snapshot as a PNG heatmap");
  render_cmd->add_option("snapshot", snapshot_path, "snapshot .bin file")->required();
  render_cmd->add_option("out", render_out, "output .png path")->required();
  render_cmd->add_option("--reduce", reduce,
                         "traveler reduction: home-marginal, position-marginal or "
                         "slice:<i1>,<i2>");
  render_cmd->add_option("--title", title, "image title (default: snapshot stem)");

  std::string eq_config, eq_output;
  auto* eq_cmd = app.add_subcommand("equilibrium",
                                    "compute the equilibrium pair for a config");
  eq_cmd->add_option("config", eq_config, "scenario config file")->required();
  eq_cmd->add_option("--output", eq_output, "output directory override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run_cmd->parsed()) return do_run(config_path, output_override, std::nullopt);
    if (eq_cmd->parsed())
      return do_run(eq_config, eq_output, rth::ModelKind::equilibrium);
    if (render_cmd->parsed()) return do_render(snapshot_path, render_out, reduce, title);
    if (verify_cmd->parsed()) {
      if (quick && full) throw rth::ConfigError("choose one of --quick / --full");
      const auto level = quick ? rth::verify::Level::quick : rth::verify::Level::full;
      const auto results = rth::verify::run_all(level);
      const int failures = rth::verify::print_report(results, std::cout);
      return failures == 0 ? kExitOk : kExitVerify;
    }
  } catch (const rth::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver abort: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitOk;
}
