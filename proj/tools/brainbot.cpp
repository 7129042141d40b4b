// brainbot: simulate, encode, analyze, rmsd and scan subcommands.

#include <brainbot/cli.hpp>

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace brainbot::cli;

  CLI::App app{"Vibration-driven elliptical robot simulator and trajectory analysis"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate a motion program and write a trajectory CSV");
  simulate->add_option("-c,--config", sim.config, "Run configuration file (defaults when omitted)");
  simulate->add_option("-p,--program", sim.program, "Motion program file")->required();
  simulate->add_option("-o,--output", sim.output, "Trajectory CSV to write")->required();

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "Write a motion program");
  encode->require_subcommand(1);
  auto* ballistic = encode->add_subcommand("ballistic", "Alternating CW/CCW rotations");
  ballistic->add_option("--T", enc.ballistic.T, "Duration of each rotation [s]")->capture_default_str();
  ballistic->add_option("--n", enc.ballistic.n_segments, "Number of rotations")->capture_default_str();
  ballistic->add_option("--v-eff", enc.ballistic.v_eff, "Effective motor voltage [V]")->capture_default_str();
  ballistic->add_flag("--start-ccw", enc.ballistic.start_ccw, "Start with a counter-clockwise rotation");
  ballistic->add_option("-o,--output", enc.output, "Program file (stdout when omitted)");
  auto* runtumble = encode->add_subcommand("runtumble", "Random spin sense, uniform random durations");
  runtumble->add_option("--tmin", enc.runtumble.T_min, "Shortest run [s]")->capture_default_str();
  runtumble->add_option("--tmax", enc.runtumble.T_max, "Longest run [s]")->capture_default_str();
  runtumble->add_option("--total", enc.runtumble.total_time, "Program duration [s]")->capture_default_str();
  runtumble->add_option("--seed", enc.runtumble.seed, "Random seed")->capture_default_str();
  runtumble->add_option("--v-eff", enc.runtumble.v_eff, "Effective motor voltage [V]")->capture_default_str();
  runtumble->add_option("-o,--output", enc.output, "Program file (stdout when omitted)");

  AnalyzeArgs ana;
  std::vector<double> bands;
  auto* analyze = app.add_subcommand("analyze", "Velocities, eta, centre of rotation and classification");
  analyze->add_option("inputs", ana.inputs, "Trajectory CSV files")->required();
  analyze->add_option("--window", ana.options.window, "Savitzky-Golay window (odd)")->capture_default_str();
  analyze->add_option("--degree", ana.options.degree, "Savitzky-Golay polynomial degree")->capture_default_str();
  analyze->add_option("--l-leg", ana.options.l_leg, "Centre to rear-leg distance [cm]")->capture_default_str();
  analyze->add_option("--eps-v", ana.options.eps_v, "Speed below which eta is invalid [cm/s]")->capture_default_str();
  analyze->add_option("--eps-omega", ana.options.eps_omega, "Rotation rate below which no centre is estimated [rad/s]")
      ->capture_default_str();
  analyze->add_option("--bands", bands, "Eta band edges: translation spin_low spin_high")->expected(3)->delimiter(',');
  analyze->add_option("--bin-width", ana.bin_width, "Eta histogram bin width")->capture_default_str();
  analyze->add_option("--out-dir", ana.out_dir, "Directory for per-trajectory and histogram CSVs")->capture_default_str();

  RmsdArgs rm;
  auto* rmsd = app.add_subcommand("rmsd", "Ensemble RMSD curve and two-regime log-log fit");
  rmsd->add_option("inputs", rm.inputs, "Trajectory CSV files")->required();
  rmsd->add_option("--tau-min", rm.tau_min, "Smallest lag [s] (default: one sample)");
  rmsd->add_option("--tau-max", rm.tau_max, "Largest lag [s] (default: half the shortest trajectory)");
  rmsd->add_option("--per-decade", rm.per_decade, "Lags per decade")->capture_default_str();
  rmsd->add_option("--min-pairs", rm.min_pairs, "Lags with fewer pairs are not fitted")->capture_default_str();
  rmsd->add_option("-o,--output", rm.output, "RMSD CSV (stdout when omitted)");

  ScanArgs sc;
  auto* scan = app.add_subcommand("scan", "Zigzag mean speed against rotation duration");
  scan->add_option("-c,--config", sc.config, "Run configuration file (defaults when omitted)");
  scan->add_option("--tmin", sc.T_min, "Shortest rotation duration [s]")->capture_default_str();
  scan->add_option("--tmax", sc.T_max, "Longest rotation duration [s]")->capture_default_str();
  scan->add_option("--steps", sc.steps, "Grid points")->capture_default_str();
  scan->add_option("-o,--output", sc.output, "Scan CSV (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitBadInput;
  }

  if (*simulate) return cmd_simulate(sim, std::cout, std::cerr);
  if (*encode) {
    enc.kind = *runtumble ? EncodeArgs::Kind::RunTumble : EncodeArgs::Kind::Ballistic;
    return cmd_encode(enc, std::cout, std::cerr);
  }
  if (*analyze) {
    if (!bands.empty()) ana.options.bands = {bands[0], bands[1], bands[2]};
    return cmd_analyze(ana, std::cout, std::cerr);
  }
  if (*rmsd) return cmd_rmsd(rm, std::cout, std::cerr);
  if (*scan) return cmd_scan(sc, std::cout, std::cerr);
  return kExitBadInput;
}
