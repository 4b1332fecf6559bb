#include <CLI11.hpp>
#include <iostream>

#include "nps/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Nernst-Planck-Stokes simulator"};
  app.require_subcommand(1);

  std::string config_path;
  nps::CommandOptions opts;
  std::string out_dir;
  int resolution = 0;
  double tol = 0.0;
  double t_end = 0.0;
  std::uint64_t seed = 0;
  std::string restart;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    sub->add_option("--resolution", resolution, "Cells per side (nx = ny = N)")->check(CLI::PositiveNumber);
    sub->add_option("--tol", tol, "Steadiness tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--t-end", t_end, "Final time of a run");
    sub->add_option("--seed", seed, "Seed for randomized initial data");
  };

  CLI::App* run = app.add_subcommand("run", "Time integration with diagnostics");
  add_common(run);
  run->add_option("--restart", restart, "Checkpoint to resume from")->check(CLI::ExistingFile);
  CLI::App* steady = app.add_subcommand("steady", "Steady state by pseudo-time");
  add_common(steady);
  steady->add_option("--restart", restart, "Checkpoint used as the initial state")->check(CLI::ExistingFile);
  CLI::App* pb = app.add_subcommand("pb", "Equilibrium Poisson-Boltzmann state by Newton");
  add_common(pb);
  CLI::App* classify = app.add_subcommand("classify", "Boundary bounds, flow criterion and equilibrium test");
  add_common(classify);
  CLI::App* sweep = app.add_subcommand("sweep", "Amplitude sweep for the stability threshold");
  add_common(sweep);

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!out_dir.empty()) opts.out = out_dir;
    if (sub->count("--resolution")) opts.resolution = resolution;
    if (sub->count("--tol")) opts.tol = tol;
    if (sub->count("--t-end")) opts.t_end = t_end;
    if (sub->count("--seed")) opts.seed = seed;
    if (!restart.empty()) opts.restart = restart;

    const nps::ScenarioConfig cfg = nps::load_config(config_path);
    nlohmann::json summary;
    if (sub == run) summary = nps::cmd_run(cfg, opts);
    else if (sub == steady) summary = nps::cmd_steady(cfg, opts);
    else if (sub == pb) summary = nps::cmd_pb(cfg, opts);
    else if (sub == classify) summary = nps::cmd_classify(cfg, opts);
    else summary = nps::cmd_sweep(cfg, opts);

    summary.erase("config");
    std::cout << summary.dump(2) << '\n';
    if (sub == sweep && !summary.value("acceptance", false)) return 4;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return nps::exit_code_for(e);
  }
}
